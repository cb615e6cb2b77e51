import os

VERSION: str = "0.1.0"
"""Current version of the project."""

DEFAULT_TOL: float = float(os.getenv("CDLAB_TOL", "1e-10"))
"""Default relative tolerance of a space model."""

DEFAULT_TRUNC_LEN: int = int(os.getenv("CDLAB_TRUNC_LEN", "256"))
"""Default maximum stored degree N."""

MIN_TRUNC_LEN: int = 8
"""Smallest truncation length able to hold the test functions."""

MEMBERSHIP_THRESHOLD: float = float(os.getenv("CDLAB_MEMBERSHIP_THRESHOLD", "1e-6"))
"""Relative projection residual under which a function counts as a subspace member."""

GRAM_CONDITION_LIMIT: float = 1e12
"""Bases with a worse gram condition number are refused."""

RANK_TOLERANCE: float = 1e-8
"""Relative singular value (or distance) under which a direction counts as dependent."""

NEUMANN_STOP_RUN: int = 3
"""Consecutive small Neumann terms required to stop the series."""

NEUMANN_DIVERGENCE_RUN: int = 20
"""Consecutive non-decreasing Neumann terms after which the series is declared divergent."""

EXTERIOR_MARGIN: float = 0.1
"""Relative margin keeping exterior samples away from the spectrum of M_z."""

BOUNDARY_MARGIN: float = 0.05
"""Margin keeping samples away from 0 and from the boundary circle."""

PROBE_COUNT: int = int(os.getenv("CDLAB_PROBES", "32"))
"""Number of random probes used by each check."""

DEFAULT_SEED: int = int(os.getenv("CDLAB_SEED", "0"))
"""Seed of the random probes when none is given."""

OUTPUT_DIR: str = os.getenv("CDLAB_OUTPUT_DIR", "out")
"""Default directory for command output files."""

LOG_LEVEL: str = os.getenv("CDLAB_LOG_LEVEL", "INFO")
"""Minimum level of log records written to stderr."""
