"""
Shared configuration for the charstrat toolkit.

Central source of truth for constants used by the field layer, the
enumeration/Monte-Carlo engine, the normal-form code, the CLI and the
``verify`` battery.  Anything a user might reasonably want to tune lives
here rather than as a literal buried in a module.
"""

from __future__ import annotations

from pathlib import Path

# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------
PROJECT_ROOT = Path(__file__).resolve().parent.parent
REPORTS_DIR = PROJECT_ROOT / "reports"
SNAPSHOT_DIR = REPORTS_DIR / "snapshots"
LOG_DIR = PROJECT_ROOT / "logs"
LOG_FILE = LOG_DIR / "charstrat.log"
LOG_ROTATE_BYTES = 1_000_000  # rotate the log at ~1 MB, keep one .old generation
SNAPSHOTS_TO_KEEP = 10

# ---------------------------------------------------------------------------
# Report schema
# ---------------------------------------------------------------------------
SCHEMA = "charstrat/1"
TOOL_VERSION = "1.0.0"
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"
LOG_DATEFMT = "%Y-%m-%d %H:%M:%S"

# ---------------------------------------------------------------------------
# Defaults
# ---------------------------------------------------------------------------
DEFAULT_TRUNCATION: int = 8          # covers 2r-determinacy for mu <= ~15
DEFAULT_SEED: int = 20240601
CENSUS_BUDGET: int = 2 ** 26         # max maps enumerated by one census
DEFAULT_MC_SAMPLES: int = 10 ** 6    # per field level; resolves codim <= 4
MIN_MC_SAMPLES: int = 10 ** 5        # below this the tower fit is noise
DEFAULT_TOWER: str = "F2,F4,F16"
MC_TOLERANCE: float = 0.35           # |estimate - formula| acceptance band
MC_Z: float = 1.96                   # half-width multiplier (95 %)
RATIONAL_HEIGHT: int = 10            # coefficients drawn from [-H, H] over Q
MILNOR_MAX_TRUNC: int = 12
MAX_EXTENSION_ORDER: int = 2 ** 20   # largest p^k with log/exp tables
CENSUS_CHUNK: int = 2 ** 14          # maps per worker chunk
MC_BATCH: int = 2 ** 15              # samples drawn and ranked per numpy batch

# ---------------------------------------------------------------------------
# Built-in irreducible moduli
# ---------------------------------------------------------------------------
# (p, k) -> monic modulus, coefficients low -> high.  Pairs missing here fall
# back to the smallest monic irreducible found by search.  Every entry is
# re-verified at field construction, so a typo raises instead of corrupting.
IRREDUCIBLE_MODULI: dict[tuple[int, int], tuple[int, ...]] = {
    (2, 2): (1, 1, 1),                                  # t^2 + t + 1
    (2, 3): (1, 1, 0, 1),                               # t^3 + t + 1
    (2, 4): (1, 1, 0, 0, 1),                            # t^4 + t + 1
    (2, 5): (1, 0, 1, 0, 0, 1),                         # t^5 + t^2 + 1
    (2, 6): (1, 1, 0, 0, 0, 0, 1),                      # t^6 + t + 1
    (2, 7): (1, 1, 0, 0, 0, 0, 0, 1),                   # t^7 + t + 1
    (2, 8): (1, 0, 1, 1, 1, 0, 0, 0, 1),                # t^8 + t^4 + t^3 + t^2 + 1
    (2, 16): (1, 1, 0, 1) + (0,) * 8 + (1, 0, 0, 0, 1),  # t^16 + t^12 + t^3 + t + 1
    (3, 2): (1, 0, 1),                                  # t^2 + 1
    (3, 3): (1, 2, 0, 1),                               # t^3 + 2t + 1
    (5, 2): (2, 0, 1),                                  # t^2 + 2
    (7, 2): (1, 0, 1),                                  # t^2 + 1
    (101, 2): (99, 0, 1),                               # t^2 - 2
}

# ---------------------------------------------------------------------------
# Verification battery sizes
# ---------------------------------------------------------------------------
# "quick" keeps every check under a few seconds for CI; "full" is the
# acceptance-sized run.
VERIFY_QUICK: dict[str, int] = {
    "census_dim_f2": 10,
    "census_dim_f3": 6,
    "mc_specs": 2,
    "mc_samples": 20_000,
    "cubic_samples": 4,
    "cubic_field_bits": 4,
    "crit_seeds": 5,
    "morse_instances": 10,
    "determinacy_instances": 5,
    "parity_samples": 300,
    "pointwise_cases": 50,
}
VERIFY_FULL: dict[str, int] = {
    "census_dim_f2": 16,
    "census_dim_f3": 10,
    "mc_specs": 10,
    "mc_samples": 10 ** 6,
    "cubic_samples": 100,
    "cubic_field_bits": 8,
    "crit_seeds": 50,
    "morse_instances": 200,
    "determinacy_instances": 50,
    "parity_samples": 10 ** 4,
    "pointwise_cases": 10 ** 3,
}

# Thresholds for the statistical checks (engineering calibration).
CUBIC_MIN_ONE_POINT_FRACTION = 0.8   # >= 80 of 100 samples singular at one point
CUBIC_MAX_SINGULAR_POINTS = 3
CRIT_POINT_CAP = 16                  # Bezout-style cap for plane cubic gradients
CRIT_MIN_PASS_FRACTION = 0.9         # >= 45 of 50 seeds
