from .core import (SAT, UNKNOWN, UNSAT, ConstraintVector, Model, Predicate, SolveResult,
                   check_model, complete_model, solve, split_var, var_name)
from .smtlib import emit_smtlib, external_solve, run_external

__all__ = ["SAT", "UNKNOWN", "UNSAT", "ConstraintVector", "Model", "Predicate", "SolveResult",
           "check_model", "complete_model", "emit_smtlib", "external_solve", "run_external",
           "solve", "split_var", "var_name"]
