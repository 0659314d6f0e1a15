"""Substitution subshifts, Toeplitz flows and their bounded speedups."""

from .decide import (Outcome, Verdict, build_presentation, coboundary_check, conjugacy_verdict,
                     constant_speedup_toeplitz_test, same_odometer_report, sufficient_condition_check,
                     toeplitz_semidecision, verify_certificate)
from .factors import coincidence_positions, factor_map_search
from .io import bundled, load_system_spec
from .kr import (JumpFunction, SpeedupSystem, build_kr, construct_toeplitz_speedup, minimality_check,
                 orbit_labeling, simulate_speedup, validate_jump)
from .recode import constant_speedup_recode, jump_block_encode, return_word_recode
from .substitution import Alphabet, SAdicSystem, Substitution, classify, compose, power
from .toeplitz import period_structure, per_p_window, skeleton, toeplitz_window

__version__ = "0.1.0"
