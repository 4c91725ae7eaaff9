"""The firing map of periodically driven linear integrate-and-fire systems.

A system ``dx/dt = -sigma*x + f(t)`` with threshold 1 and reset 0 fires at
the first time the solution started from (t, 0) reaches 1.  That firing time
solves

    exp(sigma*t) = integral_t^{Phi(t)} [f(u) - sigma] exp(sigma*u) du,

and the solver below works with the equivalent scaled form (divide both
sides by exp(sigma*t)), which stays well-conditioned for arbitrarily large
t.  Two regimes are supported:

* strict: ess inf(f - sigma) > 0, where the firing map is the lift of an
  orientation-preserving circle homeomorphism and displacements are bounded
  by 1/ess inf(f - sigma);
* nonnegative perfect integrator: sigma = 0 with f >= 0 a.e. and positive
  mean, where the map is non-decreasing and left continuous but may jump.

Firing times are absolute; nothing here reduces orbits mod 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .errors import IllPosedError, NoConvergenceError, NotDifferentiableError
from .signals import (
    EssentialBounds,
    PeriodicSignal,
    PiecewiseConstant,
    TrigPolynomial,
    frac,
)

_STRICT_TOL = 1e-9  # ess inf(f - sigma) must clear this to count as strict
_RESIDUAL_TOL = 1e-13  # scaled threshold-equation residual at convergence
_MAX_ITER = 200


class Regime(Enum):
    STRICT_LIF = "strict-lif"
    NONNEG_PI = "nonneg-pi"


class IFSystem:
    """An integrate-and-fire system: leak rate sigma >= 0 plus a 1-periodic drive.

    Threshold and reset are fixed at 1 and 0.  Construction never fails;
    call :func:`validate` (or read :attr:`regime`) to check well-posedness.
    """

    def __init__(self, sigma: float, signal: PeriodicSignal):
        if sigma < 0:
            raise ValueError("sigma must be >= 0")
        self.sigma = float(sigma)
        self.signal = signal
        self._bounds: EssentialBounds | None = None
        self._regime: Regime | None = None

    def __repr__(self):
        return f"IFSystem(sigma={self.sigma!r}, signal={self.signal!r})"

    @property
    def bounds(self) -> EssentialBounds:
        if self._bounds is None:
            self._bounds = self.signal.essential_bounds(self.sigma)
        return self._bounds

    @property
    def regime(self) -> Regime:
        if self._regime is None:
            self._regime = validate(self)
        return self._regime

    @property
    def is_pi(self) -> bool:
        return self.sigma == 0.0


def validate(system: IFSystem) -> Regime:
    """Classify a system or reject it.

    Strict regime requires ess inf(f - sigma) > 0.  The perfect-integrator
    fallback requires sigma = 0, f >= 0 a.e. and a positive mean (the
    cumulative input then grows without bound, so every start time fires).
    Anything else raises :class:`IllPosedError`.
    """
    b = system.bounds
    if b.lower > _STRICT_TOL:
        return Regime.STRICT_LIF
    if system.sigma == 0.0:
        if b.lower >= -1e-12:
            mean = system.signal.mean()
            if mean > 0.0:
                return Regime.NONNEG_PI
            raise IllPosedError(
                f"ill-posed system: sigma=0 with mean input {mean:.6g} <= 0; "
                "the cumulative input never reaches the threshold"
            )
        raise IllPosedError(
            f"ill-posed system: sigma=0 but ess inf f = {b.lower:.6g} < 0; "
            "the input must be nonnegative almost everywhere"
        )
    raise IllPosedError(
        f"ill-posed system: ess inf(f - sigma) = {b.lower:.6g} is not positive; "
        "the input must satisfy f(t) - sigma > 0 almost everywhere"
    )


@dataclass(frozen=True)
class Orbit:
    """A start time and the following firing times t_1 < t_2 < ..."""

    t0: float
    times: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.times)

    @property
    def isi(self) -> np.ndarray:
        """Interspike intervals, including t_1 - t_0."""
        return np.diff(self.times, prepend=self.t0)

    @property
    def phases(self) -> np.ndarray:
        """Firing times reduced mod 1."""
        return self.times - np.floor(self.times)


def _max_displacement(system: IFSystem) -> float:
    lo = system.bounds.lower
    if lo > _STRICT_TOL:
        return 1.0 / lo + 1e-9
    # nonneg PI: one threshold of mass arrives within ceil(1/mean)+1 periods
    return 1.0 / system.signal.mean() + 2.0


def _constant_displacement(system: IFSystem) -> float | None:
    sig = system.signal
    if isinstance(sig, TrigPolynomial) and not sig.harmonics:
        c, s = sig.a0, system.sigma
        return 1.0 / c if s == 0.0 else -math.log1p(-s / c) / s
    return None


def _solve_displacement(system: IFSystem, t: float, guess: float | None = None) -> float:
    """Root of g(d) = integral_t^{t+d} [f-sigma] e^{sigma(u-t)} du - 1, d > 0.

    Safeguarded Newton within a maintained bracket; falls back to plain
    bisection whenever a Newton step leaves the bracket.
    """
    sig = system.signal
    sigma = system.sigma
    lo = 0.0
    hi = _max_displacement(system)
    expand = 0
    while sig.weighted_integral_scaled(sigma, t, hi) < 1.0:
        lo = hi  # essential bound may be slightly optimistic
        hi *= 2.0
        expand += 1
        if expand > 80:
            raise NoConvergenceError("could not bracket the firing time")

    d = guess if guess is not None and lo < guess < hi else 0.5 * (lo + hi)
    # t + d is representable only to ulp(t); don't demand finer than that
    width_tol = max(1e-15 * max(1.0, hi), 8e-16 * abs(t))
    for _ in range(_MAX_ITER):
        g = sig.weighted_integral_scaled(sigma, t, d) - 1.0
        if abs(g) <= _RESIDUAL_TOL:
            return d
        if g > 0.0:
            hi = d
        else:
            lo = d
        if hi - lo <= width_tol:
            return 0.5 * (lo + hi)
        dg = (sig.eval(t + d) - sigma) * math.exp(sigma * d)
        step_ok = False
        if dg > 0.0:
            cand = d - g / dg
            if lo < cand < hi:
                d = cand
                step_ok = True
        if not step_ok:
            d = 0.5 * (lo + hi)
    raise NoConvergenceError("firing-time iteration did not converge")


def _pi_pwc_crossing(sig: PiecewiseConstant, t: float, threshold: Fraction) -> Fraction:
    """Leftmost s with integral_t^s f >= threshold, exactly, for sigma = 0."""
    x = Fraction(t)
    need = threshold
    fb, fv, mass = sig._fb, sig._fv, sig.period_mass
    if mass <= 0:
        raise IllPosedError("piecewise-constant input has nonpositive mean")
    max_passes = math.ceil(need / mass) + 2
    for _ in range(max_passes * len(fv) + 2):
        if need == 0:
            return x
        k = math.floor(x)
        tau = x - k
        # segment containing tau
        i = 0
        for j in range(len(fv)):
            if fb[j] <= tau:
                i = j
            else:
                break
        seg_end = k + fb[i + 1]
        v = fv[i]
        cap = v * (seg_end - x)
        if v > 0 and cap >= need:
            return x + need / v
        need -= cap
        x = seg_end
    raise NoConvergenceError("piecewise-constant crossing walk did not terminate")


def _pwc_lif_displacement(system: IFSystem, t: float) -> float:
    """Segment-exact crossing for sigma > 0 piecewise-constant input."""
    sig: PiecewiseConstant = system.signal  # type: ignore[assignment]
    sigma = system.sigma
    acc = 0.0
    cur = t
    e_cur = 1.0
    for _ in range(100000):
        tau = frac(cur)
        i = 0
        for j, b in enumerate(sig.breakpoints):
            if b <= tau:
                i = j
            else:
                break
        seg_end = math.floor(cur) + float(sig._fb[i + 1])
        if seg_end <= cur:  # k + b can round onto cur; step off the sticky point
            seg_end = np.nextafter(cur, math.inf)
        v = sig.values[i]
        coef = (v - sigma) / sigma
        e_end = math.exp(sigma * (seg_end - t))
        gain = coef * (e_end - e_cur)
        if acc + gain >= 1.0:
            e_cross = e_cur + (1.0 - acc) / coef
            return math.log(e_cross) / sigma
        acc += gain
        cur, e_cur = seg_end, e_end
    raise NoConvergenceError("piecewise-constant LIF walk did not terminate")


def _nonneg_pi_infimum(system: IFSystem, t: float, threshold: float = 1.0) -> float:
    """Leftmost point where the cumulative input reaches the threshold.

    Plain predicate bisection; converges to the left edge of any plateau of
    the cumulative integral, matching the infimum in the firing-map
    definition and left continuity of the map.
    """
    sig = system.signal
    lo = 0.0
    hi = threshold / sig.mean() + 2.0
    while sig.integral(t, t + hi) < threshold:
        hi *= 2.0
        if hi > 1e9:
            raise NoConvergenceError("could not bracket the threshold crossing")
    width_tol = max(1e-14 * max(1.0, hi), 8e-16 * abs(t))
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if sig.integral(t, t + mid) >= threshold:
            hi = mid
        else:
            lo = mid
        if hi - lo <= width_tol:
            break
    return t + hi


def firing_time(system: IFSystem, t: float) -> float:
    """Next firing time Phi(t) after a reset at time t."""
    regime = system.regime  # validates
    d = _constant_displacement(system)
    if d is not None:
        return t + d
    if isinstance(system.signal, PiecewiseConstant):
        if system.sigma == 0.0:
            return float(_pi_pwc_crossing(system.signal, t, Fraction(1)))
        return t + _pwc_lif_displacement(system, t)
    if regime is Regime.STRICT_LIF:
        return t + _solve_displacement(system, t)
    return _nonneg_pi_infimum(system, t)


def displacement(system: IFSystem, t: float) -> float:
    """Phi(t) - t; 1-periodic in t, its values are the interspike intervals."""
    return firing_time(system, t) - t


def iterate(system: IFSystem, t0: float, n: int) -> Orbit:
    """The orbit t_1 = Phi(t0), ..., t_n = Phi(t_{n-1})."""
    if n < 1:
        raise ValueError("n must be >= 1")
    regime = system.regime
    d = _constant_displacement(system)
    if d is not None:
        times = t0 + d * np.arange(1, n + 1)
        return Orbit(t0, times)
    times = np.empty(n)
    if isinstance(system.signal, PiecewiseConstant):
        t = t0
        if system.sigma == 0.0:
            for i in range(n):
                t = float(_pi_pwc_crossing(system.signal, t, Fraction(1)))
                times[i] = t
        else:
            for i in range(n):
                t = t + _pwc_lif_displacement(system, t)
                times[i] = t
        return Orbit(t0, times)
    if regime is Regime.NONNEG_PI:
        t = t0
        for i in range(n):
            t = _nonneg_pi_infimum(system, t)
            times[i] = t
        return Orbit(t0, times)
    if isinstance(system.signal, TrigPolynomial):
        _fast_trig_orbit(system, t0, times)
        return Orbit(t0, times)
    t = t0
    guess = None
    for i in range(n):
        step = _solve_displacement(system, t, guess)
        t = t + step
        times[i] = t
        guess = step
    return Orbit(t0, times)


def _fast_trig_orbit(system: IFSystem, t0: float, out: np.ndarray) -> None:
    """Warm-started Newton orbit loop for trigonometric drives.

    Fuses the threshold-equation residual and its derivative into a single
    evaluation (they share the same sines and cosines), which is what makes
    million-spike runs affordable.
    """
    sig: TrigPolynomial = system.signal  # type: ignore[assignment]
    sigma = system.sigma
    a0 = sig.a0
    hs = [(2.0 * math.pi * k, c, s) for k, c, s in sig.harmonics]
    s2 = sigma * sigma
    exp, floor, cos, sin = math.exp, math.floor, math.cos, math.sin
    dmax = _max_displacement(system)

    if sigma > 0.0:
        def q_at(x):
            tau = x - floor(x)
            q = (a0 - sigma) / sigma
            fx = a0
            for w, c, s in hs:
                th = w * tau
                ct, st = cos(th), sin(th)
                q += (c * (sigma * ct + w * st) + s * (sigma * st - w * ct)) / (s2 + w * w)
                fx += c * ct + s * st
            return q, fx
    else:
        def q_at(x):
            tau = x - floor(x)
            q = 0.0
            fx = a0
            for w, c, s in hs:
                th = w * tau
                ct, st = cos(th), sin(th)
                q += (c * st - s * ct) / w
                fx += c * ct + s * st
            return q, fx

    t = t0
    q0, _ = q_at(t)
    d_prev = None
    n = len(out)
    for i in range(n):
        lo, hi = 0.0, dmax
        d = d_prev if d_prev is not None and 0.0 < d_prev < dmax else 0.5 * dmax
        width_tol = max(1e-15 * max(1.0, dmax), 8e-16 * abs(t))
        q1 = 0.0
        for _ in range(_MAX_ITER):
            q1, fx = q_at(t + d)
            if sigma > 0.0:
                e = exp(sigma * d)
                g = e * q1 - q0 - 1.0
                dg = (fx - sigma) * e
            else:
                g = a0 * d + q1 - q0 - 1.0
                dg = fx
            if abs(g) <= _RESIDUAL_TOL:
                break
            if g > 0.0:
                hi = d
            else:
                lo = d
            if hi - lo <= width_tol:
                d = 0.5 * (lo + hi)
                q1, _ = q_at(t + d)
                break
            if dg > 0.0:
                cand = d - g / dg
                d = cand if lo < cand < hi else 0.5 * (lo + hi)
            else:
                d = 0.5 * (lo + hi)
        else:
            raise NoConvergenceError("orbit iteration did not converge")
        t = t + d
        out[i] = t
        q0 = q1
        d_prev = d


def iterate_cumulative_pi(system: IFSystem, t0: float, n: int) -> Orbit:
    """Perfect-integrator orbit via cumulative thresholds.

    Uses Phi^m(t0) = inf{s : integral_t0^s f >= m} instead of iterating the
    one-step map; both formulations must agree, which the tests check.
    Only valid for sigma = 0.
    """
    if system.sigma != 0.0:
        raise ValueError("cumulative iteration applies to sigma = 0 only")
    system.regime  # validate
    if n < 1:
        raise ValueError("n must be >= 1")
    times = np.empty(n)
    if isinstance(system.signal, PiecewiseConstant):
        for m in range(1, n + 1):
            times[m - 1] = float(_pi_pwc_crossing(system.signal, t0, Fraction(m)))
        return Orbit(t0, times)
    for m in range(1, n + 1):
        times[m - 1] = _nonneg_pi_infimum(system, t0, threshold=float(m))
    return Orbit(t0, times)


def derivative(system: IFSystem, t: float) -> float:
    """Slope of the firing map, Phi'(t) = f(t)/(f(Phi(t)) - sigma) * e^{-sigma(Phi(t)-t)}.

    Requires the input to be continuous at t and Phi(t) and the denominator
    to be bounded away from zero; raises :class:`NotDifferentiableError`
    otherwise.
    """
    regime = system.regime
    phi = firing_time(system, t)
    sig = system.signal
    if not sig.is_continuous_at(t) or not sig.is_continuous_at(phi):
        raise NotDifferentiableError(f"input is discontinuous at t={t} or Phi(t)={phi}")
    ft = sig.eval(t)
    denom = sig.eval(phi) - system.sigma
    if regime is Regime.NONNEG_PI and (ft <= 0.0 or denom <= 0.0):
        raise NotDifferentiableError("input must be strictly positive at t and Phi(t)")
    if abs(denom) < 1e-12:
        raise NotDifferentiableError("f(Phi(t)) - sigma vanishes; slope is undefined")
    return ft / denom * math.exp(-system.sigma * (phi - t))


def check_lift(system: IFSystem, grid) -> float:
    """Max over the grid of |Phi(t+1) - Phi(t) - 1|.

    For a 1-periodic drive the displacement is 1-periodic, so this should
    vanish to solver precision.
    """
    worst = 0.0
    for t in grid:
        t = float(t)
        dev = abs(firing_time(system, t + 1.0) - firing_time(system, t) - 1.0)
        worst = max(worst, dev)
    return worst
