"""Knuth-Bendix order termination proofs through SAT and pseudo-boolean encodings.

Typical use::

    from kbosat import load, RunConfig, prove_trs
    result = prove_trs(load("problem.trs"), RunConfig(engine="pbc", bits=4))
"""

from .kbo import Precedence, WeightFunction, brute_force, kbo_gt, orients
from .pb import kbo_pbc, minimize, objectives, solve_pb
from .proof import decode, render, verify
from .prover import RunConfig, corpus, prove, prove_trs
from .satenc import kbo_sat
from .terms import load, parse_srs, parse_trs

__all__ = [
    "Precedence", "WeightFunction", "brute_force", "kbo_gt", "orients",
    "kbo_pbc", "minimize", "objectives", "solve_pb",
    "decode", "render", "verify",
    "RunConfig", "corpus", "prove", "prove_trs",
    "kbo_sat", "load", "parse_srs", "parse_trs",
]
__version__ = "0.1.0"
