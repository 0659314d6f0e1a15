"""JSON documents describing systems, jump functions and analysis options.

A document looks like::

    {"alphabets": [["0", "1"], ["a", "b"]],
     "rules": [{"level": 1, "map": {"a": "1001", "b": "1010"}},
               {"level": 2, "map": {"a": "aab", "b": "abb"}}],
     "tail": {"from_level": 2, "period": 1},
     "jump": {"default": 2, "cylinders": [{"word": "100110011010", "offset": 0, "p": 2}]},
     "analysis": {"depth": 3}}

Every problem found while loading is collected with a JSON path so a bad
document is reported in one go.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .errors import AlphabetMismatch, ParseError, SchemaError, ValidationError
from .kr import JumpFunction, build_kr
from .substitution import Alphabet, SAdicSystem, Substitution

ANALYSIS_KEYS = {
    "depth": int, "period_bound": int, "mode": str, "c": int, "level": int,
    "max_shift": int, "check_length": int, "budget": int,
}
MODES = {"auto", "substitutive", "sadic", "blocks"}


@dataclass
class SystemSpec:
    system: SAdicSystem
    jump: Optional[JumpFunction] = None
    analysis: dict = field(default_factory=dict)
    source: str = ""


def _read(source) -> tuple:
    if isinstance(source, dict):
        return source, "<dict>"
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        path = Path(source)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ParseError([("$", f"cannot read {path}: {exc.strerror}")]) from exc
        name = str(path)
    else:
        text, name = source, "<text>"
    try:
        return json.loads(text), name
    except json.JSONDecodeError as exc:
        raise ParseError([("$", f"{name} line {exc.lineno} column {exc.colno}: {exc.msg}")]) from exc


def _check_schema(doc) -> list:
    problems = []
    if not isinstance(doc, dict):
        return [("$", "document must be an object")]
    for key in doc:
        if key not in ("alphabets", "rules", "tail", "jump", "analysis", "name", "description"):
            problems.append((f"$.{key}", "unknown field"))
    alph = doc.get("alphabets")
    if not isinstance(alph, list) or not alph:
        problems.append(("$.alphabets", "required nonempty list of alphabets"))
    else:
        for i, a in enumerate(alph):
            if not isinstance(a, list) or not a or not all(isinstance(s, str) and s for s in a):
                problems.append((f"$.alphabets[{i}]", "must be a nonempty list of nonempty strings"))
    rules = doc.get("rules")
    if not isinstance(rules, list) or not rules:
        problems.append(("$.rules", "required nonempty list of rules"))
    else:
        for i, r in enumerate(rules):
            path = f"$.rules[{i}]"
            if not isinstance(r, dict):
                problems.append((path, "must be an object"))
                continue
            if not isinstance(r.get("level"), int):
                problems.append((f"{path}.level", "required integer"))
            m = r.get("map")
            if not isinstance(m, dict) or not m:
                problems.append((f"{path}.map", "required nonempty object"))
            else:
                for a, w in m.items():
                    if not (isinstance(w, str) or (isinstance(w, list) and all(isinstance(s, str) for s in w))):
                        problems.append((f"{path}.map.{a}", "image must be a string or a list of symbols"))
    tail = doc.get("tail")
    if tail is not None:
        if not isinstance(tail, dict):
            problems.append(("$.tail", "must be an object"))
        else:
            for key in ("from_level", "period"):
                if not isinstance(tail.get(key), int):
                    problems.append((f"$.tail.{key}", "required integer"))
    jump = doc.get("jump")
    if jump is not None:
        problems += _check_jump_schema(jump)
    analysis = doc.get("analysis")
    if analysis is not None:
        if not isinstance(analysis, dict):
            problems.append(("$.analysis", "must be an object"))
        else:
            for key, val in analysis.items():
                want = ANALYSIS_KEYS.get(key)
                if want is None:
                    problems.append((f"$.analysis.{key}", "unknown option"))
                elif not isinstance(val, want) or isinstance(val, bool):
                    problems.append((f"$.analysis.{key}", f"must be {want.__name__}"))
            if isinstance(analysis.get("mode"), str) and analysis["mode"] not in MODES:
                problems.append(("$.analysis.mode", f"must be one of {sorted(MODES)}"))
    return problems


def _check_jump_schema(jump) -> list:
    problems = []
    if not isinstance(jump, dict):
        return [("$.jump", "must be an object")]
    if not isinstance(jump.get("default"), int):
        problems.append(("$.jump.default", "required integer"))
    if "level" in jump and not isinstance(jump["level"], int):
        problems.append(("$.jump.level", "must be an integer"))
    forms = [k for k in ("floors", "cylinders") if k in jump]
    if len(forms) > 1:
        problems.append(("$.jump", "give either floors or cylinders, not both"))
    if "floors" in jump:
        if "level" not in jump:
            problems.append(("$.jump.level", "required with the floors form"))
        if not isinstance(jump["floors"], list):
            problems.append(("$.jump.floors", "must be a list"))
        else:
            for i, e in enumerate(jump["floors"]):
                if not (isinstance(e, dict) and isinstance(e.get("tower"), str)
                        and isinstance(e.get("floor"), int) and isinstance(e.get("p"), int)):
                    problems.append((f"$.jump.floors[{i}]", "needs tower (string), floor and p (integers)"))
    if "cylinders" in jump:
        if not isinstance(jump["cylinders"], list):
            problems.append(("$.jump.cylinders", "must be a list"))
        else:
            for i, e in enumerate(jump["cylinders"]):
                if not (isinstance(e, dict) and isinstance(e.get("word"), (str, list))
                        and isinstance(e.get("offset"), int) and isinstance(e.get("p"), int)):
                    problems.append((f"$.jump.cylinders[{i}]", "needs word, offset and p"))
    return problems


def _build_system(doc) -> SAdicSystem:
    problems = []
    alph = [Alphabet(tuple(a)) for a in doc["alphabets"]]
    rules = sorted(doc["rules"], key=lambda r: r["level"])
    levels = [r["level"] for r in rules]
    if levels != list(range(1, len(rules) + 1)):
        problems.append(("$.rules", f"levels must be 1..{len(rules)} without gaps, got {levels}"))
        raise ValidationError(problems)
    n = len(rules)
    if len(alph) > n + 1:
        problems.append(("$.alphabets", f"{len(alph)} alphabets for {n} rules"))
    while len(alph) < n + 1:
        alph.append(alph[-1])
    subs = []
    for i, r in enumerate(rules):
        path = f"$.rules[{doc['rules'].index(r)}].map"
        dom, cod = alph[i + 1], alph[i]
        keys = set(r["map"])
        for a in dom:
            if a not in keys:
                problems.append((f"{path}.{a}", f"missing image for letter {a!r}"))
        for a in sorted(keys - set(dom.letters)):
            problems.append((f"{path}.{a}", f"letter {a!r} is not in alphabet {list(dom.letters)}"))
        images = []
        for a in dom:
            if a not in keys:
                continue
            try:
                w = cod.tokenize(r["map"][a])
                if not w:
                    problems.append((f"{path}.{a}", "empty image"))
                images.append(w)
            except AlphabetMismatch as exc:
                problems.append((f"{path}.{a}", str(exc)))
        if len(images) == len(dom) and all(images):
            subs.append(Substitution(dom, cod, tuple(images)))
    tail = doc.get("tail") or {"from_level": n, "period": 1}
    N, M = tail["from_level"], tail["period"]
    if M < 1 or not 1 <= N <= n or N + M - 1 != n:
        problems.append(("$.tail", f"the repeating block levels {N}..{N + M - 1} must end at the last rule {n}"))
    elif alph[N - 1] != alph[n]:
        problems.append(("$.tail", f"alphabet of level {n} must equal alphabet of level {N - 1} to repeat"))
    if problems:
        raise ValidationError(problems)
    return SAdicSystem(tuple(subs), N, M)


def _build_jump(system: SAdicSystem, jump: dict) -> JumpFunction:
    problems = []
    A0 = system.alphabet(0)
    if "cylinders" in jump:
        words = []
        for i, e in enumerate(jump["cylinders"]):
            try:
                words.append(A0.tokenize(e["word"]))
            except AlphabetMismatch as exc:
                problems.append((f"$.jump.cylinders[{i}].word", str(exc)))
                words.append(())
        if problems:
            raise ValidationError(problems)
        level = jump.get("level")
        if level is None:
            level, p = 0, 1
            longest = max((len(w) for w in words), default=1)
            while p < longest:
                level += 1
                p *= system.level_length(level) or 0
            level = max(level, 1)
        kr = build_kr(system, level)
        entries = [{"word": w, "offset": e["offset"], "p": e["p"]} for w, e in zip(words, jump["cylinders"])]
        for i, e in enumerate(entries):
            if len(e["word"]) > kr.height:
                problems.append((f"$.jump.cylinders[{i}].word", f"longer than the level-{level} towers"))
            elif not 0 <= e["offset"] < kr.height:
                problems.append((f"$.jump.cylinders[{i}].offset", f"outside 0..{kr.height - 1}"))
            elif not any(t.base_word[:len(e["word"])] == e["word"] for t in kr.towers):
                problems.append((f"$.jump.cylinders[{i}].word", "matches no tower base"))
            if e["p"] < 1:
                problems.append((f"$.jump.cylinders[{i}].p", "must be positive"))
        if problems:
            raise ValidationError(problems)
        return JumpFunction.from_cylinders(kr, entries, jump["default"])
    kr = build_kr(system, jump["level"])
    for i, e in enumerate(jump.get("floors", [])):
        if e["tower"] not in kr.letters:
            problems.append((f"$.jump.floors[{i}].tower", f"unknown tower {e['tower']!r}"))
        if not 0 <= e["floor"] < kr.height:
            problems.append((f"$.jump.floors[{i}].floor", f"outside 0..{kr.height - 1}"))
        if e["p"] < 1:
            problems.append((f"$.jump.floors[{i}].p", "must be positive"))
    if jump["default"] < 1:
        problems.append(("$.jump.default", "must be positive"))
    if problems:
        raise ValidationError(problems)
    return JumpFunction.from_floors(kr, jump.get("floors", []), jump["default"])


def load_system_spec(source: Union[str, Path, dict]) -> SystemSpec:
    """Parse, schema-check and validate a system document (path, JSON text or dict)."""
    doc, name = _read(source)
    problems = _check_schema(doc)
    if problems:
        raise SchemaError(problems)
    system = _build_system(doc)
    jump = _build_jump(system, doc["jump"]) if "jump" in doc else None
    return SystemSpec(system, jump, dict(doc.get("analysis", {})), name)


def load_substitution(source) -> Substitution:
    """A single substitution: either a system document with one rule or a bare ``{letter: word}`` map."""
    doc, _ = _read(source)
    if isinstance(doc, dict) and "rules" not in doc and all(isinstance(v, (str, list)) for v in doc.values()):
        return Substitution.from_dict(doc)
    spec = load_system_spec(doc)
    if not spec.system.is_constant:
        raise ValidationError([("$.rules", "expected a single substitution")])
    return spec.system.rules[0]


def _word(w) -> Union[str, list]:
    return "".join(w) if all(len(s) == 1 for s in w) else list(w)


def system_to_dict(system: SAdicSystem) -> dict:
    alph = [list(system.alphabet(0).letters)] + [list(r.domain.letters) for r in system.rules]
    return {
        "alphabets": alph,
        "rules": [{"level": i, "map": {a: _word(w) for a, w in r.items()}}
                  for i, r in enumerate(system.rules, start=1)],
        "tail": {"from_level": system.tail_from, "period": system.tail_period},
    }


def jump_to_dict(jump: JumpFunction) -> dict:
    """Floors form with the most common value as default."""
    counts = Counter(p for _, _, p in jump.floors())
    default = min(counts, key=lambda p: (-counts[p], p))
    return {"level": jump.level, "default": default,
            "floors": [{"tower": a, "floor": f, "p": p} for a, f, p in jump.floors() if p != default]}


def dump_system_spec(spec: SystemSpec) -> str:
    doc = system_to_dict(spec.system)
    if spec.jump is not None:
        doc["jump"] = jump_to_dict(spec.jump)
    if spec.analysis:
        doc["analysis"] = dict(sorted(spec.analysis.items()))
    return json.dumps(doc, indent=2) + "\n"


def bundled(name: str) -> Path:
    """Path of a bundled example document, e.g. ``bundled("chi")`` or ``bundled("chi.json")``."""
    if not name.endswith(".json"):
        name += ".json"
    return Path(str(resources.files("toeplitz_speedup") / "data" / name))


def bundled_names() -> list:
    return sorted(p.name for p in Path(str(resources.files("toeplitz_speedup") / "data")).glob("*.json"))
