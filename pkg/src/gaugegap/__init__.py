"""Sector-resolved spectra and gaps of CSS gauge code Hamiltonians."""

__version__ = "0.1.0"

from .f2core import BitMatrix, NoSolution, kernel, rank, row_reduce, solve  # noqa: E402
from .gaugecode import (  # noqa: E402
    CssCode,
    build_model,
    compass_2d,
    compass_3d,
    gauge_color_code_15,
    ising_1d,
    load_code,
    save_code,
    xy_1d,
    xy_plaquette_2d,
)
from .decompose import LstrDecomposition, decompose, verify  # noqa: E402
from .blocks import BlockOperator, SectorLabel, build_block, gamma_component  # noqa: E402
from .eigen import EigenResult, NoConvergence, SolverConfig, topk_symmetric  # noqa: E402
from .ideals import IdealPartition, partition_ideals, sector_spectrum_via_ideals  # noqa: E402
from .gapsearch import GapReport, ground_energy, perron_diagnostics, spectral_gap  # noqa: E402
from .cheeger import CutBound, double_well, nu_bound, sign_cut, variational_gap_bound  # noqa: E402

__all__ = [
    "BitMatrix", "NoSolution", "kernel", "rank", "row_reduce", "solve",
    "CssCode", "build_model", "compass_2d", "compass_3d", "gauge_color_code_15", "ising_1d",
    "load_code", "save_code", "xy_1d", "xy_plaquette_2d",
    "LstrDecomposition", "decompose", "verify",
    "BlockOperator", "SectorLabel", "build_block", "gamma_component",
    "EigenResult", "NoConvergence", "SolverConfig", "topk_symmetric",
    "IdealPartition", "partition_ideals", "sector_spectrum_via_ideals",
    "GapReport", "ground_energy", "perron_diagnostics", "spectral_gap",
    "CutBound", "double_well", "nu_bound", "sign_cut", "variational_gap_bound",
]
