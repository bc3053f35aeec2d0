"""Minimizing movement schemes for gradient flows in metric spaces, with audits of their error bounds."""

from .core import AuditReport, AuditSuite, EnergySystem, Trajectory, exp_primitive
from .functionals import (AbsNorm, CallableFunctional, Functional, FunctionalSum, HarmonicPotential, NegSqrt,
                          Quadratic, QuantileEntropy, QuantilePotential, fokker_planck_energy, global_slope,
                          metric_slope, moreau_yosida_value)
from .harness import SYSTEM_IDS, build_system, convergence_study, reference_flow
from .mm import DiscreteTrajectory, SchemeAbort, SchemeParams, run_minimizing_movement
from .resolvent import ResolventResult, SolverConfig, solve_resolvent
from .spaces import EuclideanSpace, QuantileSpace, gaussian_quantile

__all__ = [
    "AbsNorm", "AuditReport", "AuditSuite", "CallableFunctional", "DiscreteTrajectory", "EnergySystem",
    "EuclideanSpace", "Functional", "FunctionalSum", "HarmonicPotential", "NegSqrt", "Quadratic",
    "QuantileEntropy", "QuantilePotential", "QuantileSpace", "ResolventResult", "SYSTEM_IDS", "SchemeAbort",
    "SchemeParams", "SolverConfig", "Trajectory", "build_system", "convergence_study", "exp_primitive",
    "fokker_planck_energy", "gaussian_quantile", "global_slope", "metric_slope", "moreau_yosida_value",
    "reference_flow", "run_minimizing_movement", "solve_resolvent",
]
