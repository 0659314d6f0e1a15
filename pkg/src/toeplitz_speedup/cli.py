"""Command-line front end.

Every subcommand reads a system document (a path, or the name of a bundled
example such as ``new-non-example.json``) and prints JSON or an aligned
table.  Exit codes: 0 Yes, 1 No, 2 unknown at the given depth, 3 bad input,
4 analysis error.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from pathlib import Path

from . import decide, factors, kr, recode, toeplitz
from .errors import SpecError, SpeedupError
from .io import bundled, bundled_names, dump_system_spec, jump_to_dict, load_substitution, load_system_spec
from .substitution import classify, power, render

EXIT_INPUT, EXIT_ANALYSIS = 3, 4


class CommandError(Exception):
    pass


def _resolve(path) -> Path:
    if path is None:
        raise CommandError("no input: give a system file or --seed-file")
    p = Path(path)
    if p.exists():
        return p
    name = p.name if p.suffix == ".json" else p.name + ".json"
    if name in bundled_names():
        return bundled(name)
    raise CommandError(f"{path}: no such file (bundled examples: {', '.join(bundled_names())})")


def _spec(args):
    return load_system_spec(_resolve(args.system or args.seed_file))


def _speedup(args, spec=None):
    spec = spec or _spec(args)
    if spec.jump is None:
        raise CommandError("the document has no jump block")
    sp = kr.SpeedupSystem(spec.system, spec.jump)
    level = getattr(args, "level", None) or spec.analysis.get("level")
    if level and level > sp.level:
        sp = kr.SpeedupSystem(spec.system, kr.refine_jump(spec.system, spec.jump, level))
    return spec, sp


def _opt(args, spec, name, default=None):
    val = getattr(args, name, None)
    if val is not None:
        return val
    return spec.analysis.get(name, default)


# ---------------------------------------------------------------- table rendering

def _table(rows, header) -> str:
    rows = [[str(x) for x in r] for r in rows]
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    line = "  ".join(h.ljust(w) for h, w in zip(header, widths))
    out = [line, "  ".join("-" * w for w in widths)]
    out += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(out)


def _sub_rows(sub):
    return [[a, render(w)] for a, w in sub.items()]


def _blocks(pres, depth=1) -> list:
    """``Psi(phi^k(w))`` with a space between return-word blocks."""
    sub = pres.phi_power(depth)
    return [[w, " ".join(render(pres.psi[x]) for x in sub[w])] for w in pres.phi.domain]


# ---------------------------------------------------------------- commands

def _rule_profiles(system) -> list:
    out = []
    for i, r in enumerate(system.rules, 1):
        if r.is_endomorphism:
            out.append({"level": i, **classify(r).as_dict()})
        else:
            # primitivity is a property of endomorphisms only
            out.append({"level": i, "constant_length": r.constant_length, "left_proper": r.left_proper,
                        "proper": r.proper, "primitivity": "n/a (alphabet change)"})
    return out


def cmd_classify(args):
    spec = _spec(args)
    out = {"rules": _rule_profiles(spec.system),
           "tail": {"from_level": spec.system.tail_from, "period": spec.system.tail_period}}
    rows = [[d["level"], d["constant_length"], d["left_proper"], d["proper"], d["primitivity"]]
            for d in out["rules"]]
    return 0, out, _table(rows, ["level", "length", "left proper", "proper", "primitive"])


def cmd_periods(args):
    spec = _spec(args)
    K = args.count
    ps = toeplitz.period_structure(spec.system, K)
    odo = toeplitz.system_odometer(spec.system)
    out = {"periods": list(ps.periods), "alpha": [odo.ratio(i) for i in range(1, K + 1)],
           "supernatural": {str(p): ("inf" if e == float("inf") else e)
                            for p, e in sorted(toeplitz.supernatural(odo).items())}}
    rows = [[k, p, a] for k, (p, a) in enumerate(zip(out["periods"], out["alpha"]), 1)]
    return 0, out, _table(rows, ["k", "p_k", "alpha_k"])


def cmd_kr(args):
    spec = _spec(args)
    part = kr.build_kr(spec.system, args.level)
    out = {"level": part.level, "height": part.height,
           "towers": [{"letter": t.letter, "base_word": render(t.base_word)} for t in part.towers]}
    rows = [[t["letter"], t["base_word"]] for t in out["towers"]]
    return 0, out, f"level {part.level}, height {part.height}\n" + _table(rows, ["tower", "base word"])


def cmd_speedup(args):
    spec, sp = _speedup(args)
    val = kr.validate_jump(spec.system, sp.kr, sp.jump)
    out = {"level": sp.level, "valid": val.valid,
           "violations": [{"kind": v.kind, "detail": v.detail} for v in val.violations]}
    if not val.valid:
        return EXIT_ANALYSIS, out, _table([[v.kind, v.detail] for v in val.violations], ["violation", "detail"])
    lab = sp.labeling
    mv = sp.minimality()
    out.update({
        "c": lab.c,
        "permutations": {a: kr.cycle_notation(p) for a, p in lab.permutations.items()},
        "heights": {a: list(h) for a, h in lab.heights.items()},
        "labels": {a: list(v) for a, v in lab.labels.items()},
        "minimality": {"outcome": mv.outcome, "detail": mv.detail},
    })
    rows = [[a, kr.cycle_notation(lab.permutations[a]), list(lab.heights[a]),
             "".join(str(x) for x in lab.labels[a])] for a in lab.permutations]
    text = f"level {sp.level}, c = {lab.c}, {mv}\n" + _table(rows, ["tower", "pi", "heights", "labels by floor"])
    return 0, out, text


def cmd_recode(args):
    if args.kind == "constant":
        spec = _spec(args)
        if not spec.system.is_constant:
            raise CommandError("constant recoding needs a single substitution")
        c = args.c or spec.analysis.get("c")
        if not c:
            raise CommandError("give -c")
        rec = recode.constant_speedup_recode(spec.system.rules[0], c, names=args.names)
        sub = rec.substitution
        g_left, g_proper = rec.least_power(), rec.least_power(proper=True)
        out = {"c": c, "words": {a: render(w) for a, w in zip(sub.domain, rec.words)},
               "substitution": {a: render(w) for a, w in sub.items()},
               "left_proper_power": g_left, "proper_power": g_proper}
        rows = [[a, render(w), render(img)] for (a, img), w in zip(sub.items(), rec.words)]
        text = _table(rows, ["letter", "word", "image"])
        if g_left and g_left > 1:
            sq = power(sub, g_left)
            text += f"\n\nleft proper from power {g_left}:\n" + _table(_sub_rows(sq), ["letter", "image"])
        text += f"\nproper from power {g_proper}" if g_proper else "\nno proper power up to 8"
        return 0, out, text
    spec, sp = _speedup(args)
    pres = decide.build_presentation(sp, args.mode, names=args.names)
    out = {"presentation": pres.as_dict()}
    text = [f"mode {pres.mode}, level {pres.level}, phi taken to power g = {pres.g}"]
    if args.kind == "return-words":
        text.append(_table(_sub_rows(pres.phi), ["word", "phi"]))
        if pres.markers and pres.mode != "blocks":
            out["markers"] = list(pres.markers)
    else:
        text.append(_table(_sub_rows(pres.psi), ["word", "psi"]))
        text.append(_table(_blocks(pres), ["word", "psi(phi(word))"]))
        out["psi_phi"] = {w: b for w, b in _blocks(pres)}
    return 0, out, "\n\n".join(text)


def cmd_decide(args):
    if args.verify:
        cert = json.loads(Path(args.verify).read_text())
        cert = cert.get("certificate", cert)
        ok, msg = decide.verify_certificate(cert)
        return (0 if ok else 1), {"replayed": ok, "message": msg}, f"replay: {'ok' if ok else 'FAILED'} {msg}"
    spec, sp = _speedup(args)
    mode = _opt(args, spec, "mode", "auto")
    pres = decide.build_presentation(sp, mode)
    depth = _opt(args, spec, "depth", 3)
    v = decide.toeplitz_semidecision(pres, depth=depth, period_bound=_opt(args, spec, "period_bound"))
    if args.certificate_out:
        Path(args.certificate_out).write_text(json.dumps(v.as_dict(), indent=2, sort_keys=True) + "\n")
    cert = v.certificate or {}
    rows = [[k, b, "exact" if e else "bound exhausted"]
            for k, (b, e) in enumerate(zip(cert.get("bounds", []), cert.get("exact", [])), 1)]
    text = [f"{v.outcome.value} at depth {v.depth}: {v.detail}"]
    if cert.get("periods"):
        text.append("periods: " + ", ".join(str(q) for q in cert["periods"]))
    if rows:
        text.append(_table(rows, ["depth", "least surviving t", "status"]))
    return v.outcome.exit_code, v.as_dict(), "\n".join(text)


def cmd_coboundary(args):
    spec, sp = _speedup(args)
    rep = decide.coboundary_check(sp, budget=_opt(args, spec, "budget", 200_000))
    text = (f"{rep.outcome.value} at level {rep.level}: {rep.steps} S-steps, "
            f"{rep.returns_checked} first returns with p(x,n) = {sp.c}n")
    if rep.counterexample:
        text += "\n" + json.dumps(rep.counterexample)
    return rep.outcome.exit_code, rep.as_dict(), text


def cmd_conjugacy(args):
    spec, sp = _speedup(args)
    cv = decide.conjugacy_verdict(sp)
    out = cv.as_dict()
    try:
        pres = decide.build_presentation(sp, "auto")
        v = decide.toeplitz_semidecision(pres, depth=_opt(args, spec, "depth", 3))
        out["toeplitz"] = v.as_dict()
        if v.outcome is decide.Outcome.YES:
            out["same_odometer"] = decide.same_odometer_report(spec.system, v.certificate).as_dict()
    except (SpeedupError, ValueError) as exc:
        out["toeplitz"] = {"outcome": "error", "detail": str(exc)}
    text = [f"{cv.outcome}: {cv.detail}",
            f"sufficient condition: {cv.sufficient.outcome.value} ({cv.sufficient.detail})",
            f"gcd test for T^{sp.c}: {cv.gcd_test.outcome.value} ({cv.gcd_test.detail})"]
    if "same_odometer" in out:
        text.append(f"same odometer: {out['same_odometer']['same']} by {out['same_odometer']['method']}")
    return cv.exit_code, out, "\n".join(text)


def _factor_side(path, c):
    sub = load_substitution(_resolve(path))
    if c and c > 1:
        sub = recode.constant_speedup_recode(sub, c, names="digits" if c == 4 else "letters").substitution
    return sub


def cmd_factor(args):
    big = _factor_side(args.big, args.big_c)
    small = _factor_side(args.small, args.small_c)
    powers = tuple(args.power) if args.power else None
    if powers and len(powers) == 1:
        powers = powers * 2
    search = factors.factor_map_search(big, small, args.max_shift, args.check_length, powers)
    cands = search.candidates if args.all else search.verified
    out = {"powers": list(search.powers), "length": search.length,
           "candidates": [c.as_dict() for c in cands]}
    code = 0 if search.verified else 2
    return code, out, factors.render_table(
        factors.FactorSearch(search.big, search.small, search.powers, search.length, tuple(cands)))


def cmd_construct(args):
    spec = _spec(args)
    M = args.level or spec.analysis.get("level") or 2
    sp = kr.construct_toeplitz_speedup(spec.system, args.c, M)
    val = kr.validate_jump(spec.system, sp.kr, sp.jump)
    lab = sp.labeling
    suff = decide.sufficient_condition_check(lab)
    mv = sp.minimality()
    out = {"jump": jump_to_dict(sp.jump), "valid": val.valid,
           "permutations": {a: kr.cycle_notation(p) for a, p in lab.permutations.items()},
           "heights": {a: list(h) for a, h in lab.heights.items()},
           "minimality": mv.outcome, "sufficient_condition": suff.outcome.value}
    text = (f"valid {val.valid}, {mv}, sufficient condition {suff.outcome.value}\n"
            + json.dumps(out["jump"]))
    return suff.outcome.exit_code, out, text


def cmd_report(args):
    """Run every applicable analysis and write JSON, TSV and PNG files to ``--out``."""
    from . import plotting

    spec = _spec(args)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    summary = {"input": Path(spec.source).name, "files": []}
    rows = []

    def emit(name, payload):
        (outdir / name).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        summary["files"].append(name)

    emit("classify.json", _rule_profiles(spec.system))
    try:
        ps = toeplitz.period_structure(spec.system, args.periods)
        summary["periods"] = list(ps.periods)
        rows.append(["periods", ",".join(map(str, ps.periods)), ""])
    except SpeedupError:
        ps = None
    if spec.system.is_constant and spec.system.rules[0].constant_length:
        prof = factors.coincidence_positions(power(spec.system.rules[0], 2))
        emit("coincidences.json", prof.as_dict())
        plotting.plot_coincidences(prof, outdir / "coincidences.png")
        summary["files"].append("coincidences.png")
    if spec.jump is not None:
        _, sp = _speedup(args, spec)
        lab = sp.labeling
        plotting.plot_tower_labeling(sp, outdir / "towers.png")
        summary["files"].append("towers.png")
        rows.append(["orbit number", lab.c, ""])
        rows.append(["minimality", sp.minimality().outcome, ""])
        suff = decide.sufficient_condition_check(lab)
        rows.append(["sufficient condition", suff.outcome.value, suff.detail])
        pres = decide.build_presentation(sp, spec.analysis.get("mode", "auto"))
        v = decide.toeplitz_semidecision(pres, depth=args.depth or spec.analysis.get("depth", 3))
        emit("toeplitz.json", v.as_dict())
        rows.append(["toeplitz", v.outcome.value, v.detail])
        if v.certificate.get("bounds"):
            plotting.plot_elimination_bounds(v.certificate, outdir / "bounds.png")
            summary["files"].append("bounds.png")
        if v.certificate.get("periods"):
            ref = list(ps.periods) if ps else None
            plotting.plot_periods(v.certificate["periods"], outdir / "periods.png", ref)
            summary["files"].append("periods.png")
        cob = decide.coboundary_check(sp)
        emit("coboundary.json", cob.as_dict())
        rows.append(["coboundary", cob.outcome.value, f"{cob.returns_checked} returns checked"])
        cv = decide.conjugacy_verdict(sp)
        emit("conjugacy.json", cv.as_dict())
        rows.append(["conjugacy", cv.outcome, cv.detail])
    buf = _io.StringIO()
    writer = csv.writer(buf, delimiter="\t", lineterminator="\n")
    writer.writerow(["analysis", "result", "detail"])
    writer.writerows(rows)
    (outdir / "summary.tsv").write_text(buf.getvalue())
    summary["files"].append("summary.tsv")
    emit("summary.json", summary)
    return 0, summary, _table(rows, ["analysis", "result", "detail"])


def cmd_dump(args):
    spec = _spec(args)
    text = dump_system_spec(spec)
    return 0, json.loads(text), text.rstrip()


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    def global_flags(suppress: bool) -> argparse.ArgumentParser:
        # subcommands repeat the flags without defaults so a value given before the subcommand survives
        g = argparse.ArgumentParser(add_help=False)
        unset = argparse.SUPPRESS
        g.add_argument("--depth", type=int, default=unset if suppress else None,
                       help="search depth for semi-decisions")
        g.add_argument("--format", choices=["json", "table"], default=unset if suppress else "table")
        g.add_argument("--seed-file", default=unset if suppress else None,
                       help="input system document (alternative to the positional)")
        return g

    common = global_flags(True)
    parser = argparse.ArgumentParser(prog="toeplitz-speedup", parents=[global_flags(False)],
                                     description="Speedups of Toeplitz flows: towers, labelings, verdicts.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, system=True):
        p = sub.add_parser(name, parents=[common], help=help_)
        if system:
            p.add_argument("system", nargs="?", help="system JSON or bundled example name")
        p.set_defaults(func=func)
        return p

    add("classify", cmd_classify, "length, properness and primitivity of each rule")
    p = add("periods", cmd_periods, "period structure and odometer ratios")
    p.add_argument("--count", type=int, default=6)
    p = add("kr", cmd_kr, "Kakutani-Rokhlin towers at a level")
    p.add_argument("--level", type=int, required=True)
    p = add("speedup", cmd_speedup, "jump validation, orbit labeling, permutations, minimality")
    p.add_argument("--level", type=int)
    p = add("recode", cmd_recode, "return-word, jump-block or constant-speedup recodings", system=False)
    p.add_argument("kind", choices=["return-words", "jump-blocks", "constant"])
    p.add_argument("system", nargs="?", help="system JSON or bundled example name")
    p.add_argument("-c", type=int, help="orbit number for the constant recoding")
    p.add_argument("--mode", choices=["auto", "substitutive", "sadic", "blocks"], default="auto")
    p.add_argument("--names", choices=["letters", "digits", "w", "words"], default="letters")
    p.add_argument("--level", type=int)
    p = add("decide", cmd_decide, "Toeplitz semi-decision with a replayable certificate")
    p.add_argument("--period-bound", type=int)
    p.add_argument("--mode", choices=["auto", "substitutive", "sadic", "blocks"])
    p.add_argument("--verify", metavar="CERTIFICATE", help="replay a certificate instead of deciding")
    p.add_argument("--certificate-out", metavar="PATH")
    p.add_argument("--level", type=int)
    p = add("coboundary", cmd_coboundary, "is p - c an S-coboundary")
    p.add_argument("--level", type=int)
    p.add_argument("--budget", type=int)
    p = add("conjugacy", cmd_conjugacy, "conjugacy of the speedup to T^c")
    p.add_argument("--level", type=int)
    p = add("factor", cmd_factor, "letter-to-letter factor maps between constant-length substitutions", system=False)
    p.add_argument("big")
    p.add_argument("small")
    p.add_argument("--big-c", type=int, help="replace the big side by its constant c-speedup recoding")
    p.add_argument("--small-c", type=int, help="replace the small side by its constant c-speedup recoding")
    p.add_argument("--max-shift", type=int)
    p.add_argument("--check-length", type=int)
    p.add_argument("--power", type=int, nargs="+", help="powers of big and small (one value for both)")
    p.add_argument("--all", action="store_true", help="also list refuted candidates")
    p = add("construct-speedup", cmd_construct, "build a Toeplitz speedup with orbit number c")
    p.add_argument("-c", type=int, required=True)
    p.add_argument("--level", type=int)
    p = add("report", cmd_report, "run the pipeline and write figures, JSON and TSV")
    p.add_argument("--out", default="report")
    p.add_argument("--periods", type=int, default=6)
    p.add_argument("--level", type=int)
    add("dump", cmd_dump, "canonical pretty-print of a system document")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, payload, text = args.func(args)
    except (SpecError, CommandError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SpeedupError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
