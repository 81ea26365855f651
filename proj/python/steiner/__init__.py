"""Steiner forest approximation algorithms on a simulated CONGEST network."""

from ._steiner import (
    ALGORITHMS,
    BudgetViolation,
    Infeasible,
    Instance,
    InvalidEpsilon,
    InvalidSpec,
    ParseError,
    RoundCapExceeded,
    SteinerError,
    TooLarge,
    check_feasible,
    exact_optimum,
    gen_instance,
    gen_sd_gadget_cr,
    gen_sd_gadget_ic,
    minimal_subforest,
    oracle_admits,
    profile,
    run_suite,
    sd_gadget_heavy_edges,
    solve,
)

__all__ = [name for name in dir() if not name.startswith("_")]
