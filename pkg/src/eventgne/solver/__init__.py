from .constraints import LevelConstraint
from .ga import GAConfig, GAResult, ga_minimize, ga_search
from .nlevel import EquilibriumResult, LevelResult, solve_level, solve_nlevel
from .oracle import brute_force_oracle
from .refine import RefineConfig, RefineResult, refine, refine_search
from .verify import CheckResult, VerificationReport, verify_equilibrium
