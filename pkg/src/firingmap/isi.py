"""Interspike-interval sequences, distributions, and their analysis.

The displacement Psi(t) = Phi(t) - t is 1-periodic and its values along an
orbit are the interspike intervals.  When the rotation number is irrational
the long-run empirical ISI distribution converges (uniformly in the start
time) to the invariant measure pushed forward by Psi; for the perfect
integrator that distribution has an explicit density away from critical
values of Psi, implemented in :func:`isi_density_pi`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    CriticalValueError,
    IllPosedError,
    InsufficientDataError,
    RationalRotationError,
)
from .firing import IFSystem, Orbit, Regime, derivative, firing_time, iterate
from .rotation import detect_locking, pi_rotation
from .signals import PeriodicSignal, TrigPolynomial


@dataclass(frozen=True)
class IsiSeq:
    """Interspike intervals of an orbit, including t_1 - t_0."""

    values: np.ndarray
    orbit: Orbit | None = None

    def __len__(self):
        return len(self.values)


class Displacement:
    """The displacement function Psi(t) = Phi(t) - t of a system.

    1-periodic; continuous in the strict regime.  Its range is the support
    of the ISI distribution and its level sets drive the density formula.
    """

    def __init__(self, system: IFSystem):
        system.regime  # validate
        self.system = system

    def __call__(self, t: float) -> float:
        return firing_time(self.system, t) - t

    def on_grid(self, ts: np.ndarray) -> np.ndarray:
        return np.array([self(float(t)) for t in ts])


def isi_sequence(orbit: Orbit) -> IsiSeq:
    """Successive differences of the firing times (first one against t0)."""
    if len(orbit) < 2:
        raise ValueError("need at least two firing times")
    return IsiSeq(orbit.isi, orbit)


@dataclass(frozen=True)
class RegularityResult:
    """Finite-sample regularity classification of an ISI sequence.

    ``kind`` is one of ``periodic``, ``asymptotically-periodic``,
    ``almost-strongly-recurrent`` or ``unclassified``; ``period`` carries q
    for the first two, ``window`` carries the recurrence bound N for the
    third.  This is a falsification test over the available window, not a
    proof: the quantifiers are checked exhaustively on the finite sample.
    """

    kind: str
    period: int | None = None
    window: int | None = None
    eps: float = 0.0
    burn_in: int = 0
    length: int = 0


def classify_regularity(
    isi: IsiSeq | np.ndarray,
    q: int,
    eps: float,
    burn_in: int = 1000,
) -> RegularityResult:
    """Classify an ISI sequence as periodic, asymptotically periodic, or
    almost strongly recurrent at tolerance eps.

    Periodic(q): |ISI_{n+q} - ISI_n| < eps for every n in the sample.
    Asymptotically periodic(q): the same holds for n >= burn_in but fails
    earlier.  Almost strongly recurrent(N): every value recurs within N
    steps of every later position, N minimal for the sample; reported as
    unclassified when the required window exceeds a quarter of the
    post-burn-in sample (insufficient evidence).
    """
    v = isi.values if isinstance(isi, IsiSeq) else np.asarray(isi, dtype=float)
    n = len(v)
    if n < burn_in + 4 * q:
        raise InsufficientDataError(
            f"need at least burn_in + 4q = {burn_in + 4 * q} intervals, got {n}"
        )
    dq = np.abs(v[q:] - v[:-q])
    if bool(np.all(dq < eps)):
        return RegularityResult("periodic", period=q, eps=eps, burn_in=burn_in, length=n)
    if bool(np.all(dq[burn_in:] < eps)):
        return RegularityResult(
            "asymptotically-periodic", period=q, eps=eps, burn_in=burn_in, length=n
        )
    # recurrence-window scan; start positions whose remaining window is
    # shorter than the acceptance budget cannot witness a recurrence and are
    # excluded (finite-sample truncation)
    budget = (n - burn_in) // 4
    worst = 0
    ok = True
    for i in range(burn_in, n - budget):
        matches = np.flatnonzero(np.abs(v[i:] - v[i]) < eps)
        if len(matches) < 2:
            ok = False
            break
        gap = int(np.max(np.diff(matches))) - 1
        if gap > worst:
            worst = gap
    if ok and worst <= budget:
        return RegularityResult(
            "almost-strongly-recurrent", window=worst, eps=eps, burn_in=burn_in, length=n
        )
    return RegularityResult("unclassified", eps=eps, burn_in=burn_in, length=n)


class EmpiricalDist:
    """A sorted sample multiset with CDF evaluation."""

    def __init__(self, samples):
        self.samples = np.sort(np.asarray(samples, dtype=float))
        if self.samples.size == 0:
            raise ValueError("empirical distribution needs at least one sample")

    @property
    def n(self) -> int:
        return self.samples.size

    def cdf(self, x):
        """Right-continuous empirical CDF, vectorized."""
        x = np.asarray(x, dtype=float)
        out = np.searchsorted(self.samples, x, side="right") / self.n
        return float(out) if out.ndim == 0 else out

    def mean(self) -> float:
        return float(self.samples.mean())

    def std(self) -> float:
        return float(self.samples.std())

    def histogram(
        self,
        bins: int = 200,
        lo: float | None = None,
        hi: float | None = None,
        bin_width: float | None = None,
    ):
        """Counts over uniform bins; defaults to the sample range padded 1%.

        Pass either a bin count or a bin width (the count is then derived
        from the range).  Degenerate (atomic) sample ranges are widened so
        the atom lands in a single occupied bin instead of breaking the
        binning.
        """
        if lo is None or hi is None:
            s_lo, s_hi = float(self.samples[0]), float(self.samples[-1])
            if s_hi - s_lo < 1e-9:
                # atomic sample: place the atom inside a bin, not on an edge
                mid, half = 0.5 * (s_lo + s_hi), 5e-4
                lo = mid - half * (bins + 1) / bins if lo is None else lo
                hi = mid + half if hi is None else hi
            else:
                pad = 0.01 * (s_hi - s_lo)
                lo = s_lo - pad if lo is None else lo
                hi = s_hi + pad if hi is None else hi
        if bin_width is not None:
            if bin_width <= 0:
                raise ValueError("bin_width must be > 0")
            bins = max(1, math.ceil((hi - lo) / bin_width))
        counts, edges = np.histogram(self.samples, bins=bins, range=(lo, hi))
        return edges, counts


def empirical_isi_dist(isi: IsiSeq | np.ndarray) -> EmpiricalDist:
    """Empirical distribution of the interspike intervals of a run."""
    v = isi.values if isinstance(isi, IsiSeq) else np.asarray(isi, dtype=float)
    return EmpiricalDist(v)


def cluster_values(values, tol: float) -> list[tuple[float, int]]:
    """Merge sorted values into clusters whose consecutive gaps are < tol.

    Returns (cluster mean, cluster size) pairs; the cluster count is how
    many distinct values the sequence takes at resolution tol.
    """
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        return []
    splits = np.flatnonzero(np.diff(v) >= tol) + 1
    return [(float(c.mean()), int(c.size)) for c in np.split(v, splits)]


def fortet_mourier(d1: EmpiricalDist, d2: EmpiricalDist) -> float:
    """Fortet-Mourier / Kantorovich distance between two empirical measures.

    On the line the supremum over 1-Lipschitz test functions equals the area
    between the CDFs, which is exact for empirical measures: the CDF
    difference is piecewise constant between merged sample points.
    """
    xs = np.unique(np.concatenate([d1.samples, d2.samples]))
    if xs.size == 1:
        return 0.0
    f1 = np.searchsorted(d1.samples, xs, side="right") / d1.n
    f2 = np.searchsorted(d2.samples, xs, side="right") / d2.n
    return float(np.sum(np.abs(f1[:-1] - f2[:-1]) * np.diff(xs)))


def pi_invariant_density(signal: PeriodicSignal, t: float) -> float:
    """Density f(t)/mean(f) of the invariant measure of the PI phase map."""
    if signal.essential_bounds(0.0).lower < -1e-12:
        raise IllPosedError("invariant density requires a nonnegative input")
    m = signal.mean()
    if m <= 0.0:
        raise IllPosedError(f"mean input {m:.6g} <= 0")
    return signal.eval(t) / m


def check_measure_invariance(signal: PeriodicSignal, intervals) -> float:
    """Max deviation of mu_f([a,b]) from mu_f([Phi(a), Phi(b)]) for PI.

    The firing map preserves the measure with density f, so the deviation
    should vanish to solver precision.
    """
    system = IFSystem(0.0, signal)
    system.regime  # validate
    worst = 0.0
    for a, b in intervals:
        pa, pb = firing_time(system, float(a)), firing_time(system, float(b))
        dev = abs(signal.integral(float(a), float(b)) - signal.integral(pa, pb))
        worst = max(worst, dev)
    return worst


def _golden_min(fn, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Argmin of a unimodal function by golden-section search."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def displacement_range(system: IFSystem, grid_size: int = 512) -> tuple[float, float]:
    """[min, max] of the displacement Psi over one period (strict regime).

    Grid scan refined by golden-section search around the grid extrema.
    """
    if system.regime is not Regime.STRICT_LIF:
        raise ValueError("displacement_range requires the strict regime")
    psi_at = Displacement(system)
    ts = np.arange(grid_size) / grid_size
    psi = psi_at.on_grid(ts)
    h = 1.0 / grid_size
    i_lo = int(np.argmin(psi))
    i_hi = int(np.argmax(psi))
    t_lo = _golden_min(psi_at, float(ts[i_lo]) - h, float(ts[i_lo]) + h)
    t_hi = _golden_min(lambda t: -psi_at(t), float(ts[i_hi]) - h, float(ts[i_hi]) + h)
    lo = min(float(psi[i_lo]), psi_at(t_lo))
    hi = max(float(psi[i_hi]), psi_at(t_hi))
    return lo, hi


@dataclass(frozen=True)
class DensityCurve:
    """A density sampled on a grid, with singular points flagged.

    ``singular`` marks grid values within 1e-6 of a critical value of the
    displacement, where the density may blow up (the values are reported
    as computed, without regularization).
    """

    y: np.ndarray
    density: np.ndarray
    singular: np.ndarray
    support: tuple[float, float]

    def integral(self) -> float:
        """Trapezoid integral over the grid; should be close to 1."""
        return float(np.trapezoid(self.density, self.y))

    def cdf(self) -> np.ndarray:
        """Cumulative trapezoid integral on the grid (starts at 0)."""
        steps = 0.5 * (self.density[1:] + self.density[:-1]) * np.diff(self.y)
        return np.concatenate([[0.0], np.cumsum(steps)])


def _psi_roots(psi_grid: np.ndarray, ts: np.ndarray, psi_at, y: float) -> list[float]:
    """All solutions of Psi(t) = y on [0, 1) by sign-change bracketing."""
    roots = []
    vals = psi_grid - y
    m = len(ts) - 1  # ts[-1] == 1.0 and psi_grid wraps
    for i in range(m):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(float(ts[i]))
            continue
        if a * b >= 0.0:
            continue
        lo, hi = float(ts[i]), float(ts[i + 1])
        glo = a
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            gm = psi_at(mid) - y
            if gm == 0.0:
                lo = hi = mid
                break
            if (gm > 0.0) == (glo > 0.0):
                lo, glo = mid, gm
            else:
                hi = mid
            if hi - lo < 1e-14:
                break
        roots.append(0.5 * (lo + hi))
    return roots


def isi_density_pi(
    signal: PeriodicSignal,
    y_grid: Sequence[float] | None = None,
    root_grid_size: int = 2048,
    n_y: int = 512,
    q_max: int = 64,
    residual_tol: float = 1e-8,
) -> DensityCurve:
    """ISI-distribution density for a perfect integrator with smooth drive.

    At y inside the displacement range the density is

        sum over t in Psi^{-1}(y) of [f(t)/mean(f)] * f(t+y) / |f(t) - f(t+y)|,

    the invariant density transported through the displacement.  Requires a
    trigonometric-polynomial input and an irrational rotation number at
    tolerance (locking raises :class:`RationalRotationError`).  The default
    y grid is cosine-spaced inside the open range, so the integrable
    inverse-square-root singularities at the endpoints are resolved.
    """
    if not isinstance(signal, TrigPolynomial):
        raise ValueError("closed-form density needs a trigonometric-polynomial input")
    system = IFSystem(0.0, signal)
    system.regime  # validate
    locking = detect_locking(
        system, q_max=q_max, residual_tol=residual_tol,
        rho_estimate=pi_rotation(signal),
    )
    if locking.locked:
        raise RationalRotationError(
            f"rotation number is rational at tolerance: {locking.p}/{locking.q} "
            f"(residual {locking.residual:.3e})"
        )
    mean = signal.mean()

    psi_at = Displacement(system)
    ts = np.linspace(0.0, 1.0, root_grid_size + 1)
    psi_grid = psi_at.on_grid(ts)
    lo, hi = displacement_range(system, grid_size=root_grid_size)
    width = hi - lo
    if width <= 0.0:
        raise RationalRotationError("degenerate displacement range (rigid rotation)")

    # critical values: range endpoints plus interior zeros of Psi'
    crit_vals = [lo, hi]
    dpsi = signal.eval_array(ts) / signal.eval_array(ts + psi_grid) - 1.0
    for i in range(root_grid_size):
        if dpsi[i] == 0.0 or dpsi[i] * dpsi[i + 1] < 0.0:
            tc = _golden_min(
                lambda t: abs(signal.eval(t) / signal.eval(t + psi_at(t)) - 1.0),
                float(ts[i]),
                float(ts[i + 1]),
            )
            crit_vals.append(psi_at(tc))
    crit_vals = np.array(sorted(set(crit_vals)))

    if y_grid is None:
        pad = 1e-9 * width
        theta = np.linspace(0.0, math.pi, n_y)
        y_grid = (lo + pad) + 0.5 * (width - 2 * pad) * (1.0 - np.cos(theta))
    ys = np.asarray(y_grid, dtype=float)

    density = np.zeros_like(ys)
    singular = np.zeros(ys.shape, dtype=bool)
    for j, y in enumerate(ys):
        if y < lo or y > hi:
            continue
        if np.any(np.abs(crit_vals - y) < 1e-6):
            singular[j] = True
        total = 0.0
        for t in _psi_roots(psi_grid, ts, psi_at, float(y)):
            ft = signal.eval(t)
            fphi = signal.eval(t + y)
            dif = abs(ft - fphi)
            if dif == 0.0:
                raise CriticalValueError(
                    f"y = {y!r} is a critical value of the displacement"
                )
            total += (ft / mean) * fphi / dif
        density[j] = total
    return DensityCurve(ys, density, singular, (lo, hi))


def isi_density_lif_empirical(
    system: IFSystem,
    y_grid: Sequence[float] | None = None,
    n_orbit: int = 200_000,
    root_grid_size: int = 1024,
    phase_bins: int = 256,
    n_y: int = 256,
) -> DensityCurve:
    """Experimental leaky-integrator analogue of :func:`isi_density_pi`.

    The conjugacy derivative has no closed form for sigma > 0, so the
    invariant density is estimated from a long orbit's phase histogram and
    substituted into the same transport formula.  No accuracy guarantee.
    """
    if system.regime is not Regime.STRICT_LIF:
        raise ValueError("requires the strict regime")
    orbit = iterate(system, 0.0, n_orbit)
    counts, edges = np.histogram(orbit.phases, bins=phase_bins, range=(0.0, 1.0))
    gamma_prime = counts * (phase_bins / n_orbit)

    def gprime(t: float) -> float:
        i = min(int((t - math.floor(t)) * phase_bins), phase_bins - 1)
        return float(gamma_prime[i])

    psi_at = Displacement(system)
    ts = np.linspace(0.0, 1.0, root_grid_size + 1)
    psi_grid = psi_at.on_grid(ts)
    lo, hi = displacement_range(system, grid_size=root_grid_size)
    width = hi - lo
    if y_grid is None:
        pad = 1e-9 * width
        theta = np.linspace(0.0, math.pi, n_y)
        y_grid = (lo + pad) + 0.5 * (width - 2 * pad) * (1.0 - np.cos(theta))
    ys = np.asarray(y_grid, dtype=float)
    density = np.zeros_like(ys)
    for j, y in enumerate(ys):
        if y < lo or y > hi:
            continue
        total = 0.0
        for t in _psi_roots(psi_grid, ts, psi_at, float(y)):
            dphi = derivative(system, t)
            if abs(dphi - 1.0) < 1e-12:
                total = math.inf
                break
            total += gprime(t) / abs(dphi - 1.0)
        density[j] = total
    singular = ~np.isfinite(density)
    return DensityCurve(ys, density, singular, (lo, hi))


@dataclass(frozen=True)
class PerturbationReport:
    """Uniform firing-map deviations and the ISI-distribution distance."""

    sup_phi_dev: float
    sup_dphi_dev: float
    d_f_isi: float


def perturbation_harness(
    base: IFSystem,
    perturbed: IFSystem,
    grid_size: int = 256,
    orbit_len: int = 20_000,
    t0: float = 0.0,
) -> PerturbationReport:
    """Measure how far a perturbed system's firing map and ISI statistics
    stray from a base system's.

    Sup norms are taken over a grid on [0, 1], which suffices because the
    displacement of both maps is 1-periodic; the distribution distance is
    the Fortet-Mourier distance between the runs' empirical ISI
    distributions.
    """
    if base.regime is not Regime.STRICT_LIF:
        raise ValueError("base system must be in the strict regime")
    perturbed.regime  # validate
    ts = np.linspace(0.0, 1.0, grid_size)
    sup_phi = 0.0
    sup_dphi = 0.0
    for t in ts:
        t = float(t)
        sup_phi = max(sup_phi, abs(firing_time(base, t) - firing_time(perturbed, t)))
        sup_dphi = max(sup_dphi, abs(derivative(base, t) - derivative(perturbed, t)))
    d1 = empirical_isi_dist(isi_sequence(iterate(base, t0, orbit_len)))
    d2 = empirical_isi_dist(isi_sequence(iterate(perturbed, t0, orbit_len)))
    return PerturbationReport(sup_phi, sup_dphi, fortet_mourier(d1, d2))
