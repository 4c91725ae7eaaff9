"""Firing maps of periodically driven integrate-and-fire models.

Library layout:

* :mod:`firingmap.signals` -- 1-periodic input currents and their integrals
* :mod:`firingmap.firing` -- the firing map, orbits, derivative, lift check
* :mod:`firingmap.rotation` -- rotation numbers, locking, conjugacy
* :mod:`firingmap.isi` -- interspike-interval sequences and distributions
* :mod:`firingmap.cli` -- command-line front end
"""

from .errors import (
    CriticalValueError,
    FiringMapError,
    IllPosedError,
    InsufficientDataError,
    LockedError,
    NoConvergenceError,
    NotDifferentiableError,
    RationalRotationError,
)
from .firing import (
    IFSystem,
    Orbit,
    Regime,
    check_lift,
    derivative,
    displacement,
    firing_time,
    iterate,
    iterate_cumulative_pi,
    validate,
)
from .isi import (
    DensityCurve,
    Displacement,
    EmpiricalDist,
    IsiSeq,
    PerturbationReport,
    RegularityResult,
    check_measure_invariance,
    classify_regularity,
    cluster_values,
    displacement_range,
    empirical_isi_dist,
    fortet_mourier,
    isi_density_lif_empirical,
    isi_density_pi,
    isi_sequence,
    perturbation_harness,
    pi_invariant_density,
)
from .rotation import (
    LockingResult,
    Method,
    RotationEstimate,
    ScanPoint,
    best_rational,
    detect_locking,
    estimate_conjugacy,
    pi_conjugacy,
    pi_rotation,
    rotation_number,
    staircase_scan,
)
from .signals import (
    EssentialBounds,
    PeriodicSignal,
    PiecewiseConstant,
    Sampled,
    TrigPolynomial,
    constant,
    parse_signal,
    signal_spec,
)

__version__ = "0.1.0"

__all__ = [
    "CriticalValueError",
    "DensityCurve",
    "Displacement",
    "EmpiricalDist",
    "EssentialBounds",
    "FiringMapError",
    "IFSystem",
    "IllPosedError",
    "InsufficientDataError",
    "IsiSeq",
    "LockedError",
    "LockingResult",
    "Method",
    "NoConvergenceError",
    "NotDifferentiableError",
    "Orbit",
    "PeriodicSignal",
    "PerturbationReport",
    "PiecewiseConstant",
    "RationalRotationError",
    "Regime",
    "RegularityResult",
    "RotationEstimate",
    "Sampled",
    "ScanPoint",
    "TrigPolynomial",
    "best_rational",
    "check_lift",
    "check_measure_invariance",
    "classify_regularity",
    "cluster_values",
    "constant",
    "derivative",
    "detect_locking",
    "displacement",
    "displacement_range",
    "empirical_isi_dist",
    "estimate_conjugacy",
    "firing_time",
    "fortet_mourier",
    "isi_density_lif_empirical",
    "isi_density_pi",
    "isi_sequence",
    "iterate",
    "iterate_cumulative_pi",
    "parse_signal",
    "perturbation_harness",
    "pi_conjugacy",
    "pi_invariant_density",
    "pi_rotation",
    "rotation_number",
    "signal_spec",
    "staircase_scan",
    "validate",
]
