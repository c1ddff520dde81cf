"""Particle filtering and exact truncated semantics for probabilistic program graphs."""

from .bench import BenchModel, build_dmm, build_rw1
from .engine import EstimateReport, ParticleEnsemble, estimate, infer, run_scalar_pf, run_vpf
from .oracle import (
    BoundsReport,
    PathTable,
    enumerate_paths,
    expectation_t,
    filtering_distribution,
    semantics_bounds,
)
from .ppg import LiftedQuery, Ppg, State, load_model, validate
from .resample import ess, resample_multinomial, resample_systematic
from .rng import CounterRNG

__version__ = "0.1.0"
