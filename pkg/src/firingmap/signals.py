"""1-periodic input currents with exact evaluation and integration.

Three concrete families are supported:

* :class:`TrigPolynomial` -- a finite cosine/sine series, all integrals in
  closed form;
* :class:`PiecewiseConstant` -- left-closed/right-open steps, integrals done
  in exact rational arithmetic;
* :class:`Sampled` -- values on a uniform grid with linear interpolation,
  integrals exact for the interpolant, exponentially weighted integrals by
  composite Simpson quadrature (approximate).

Every signal has period 1; callers with period-T inputs are expected to
rescale time themselves.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

TWO_PI = 2.0 * math.pi


def frac(t: float) -> float:
    """Fractional part t - floor(t), exact in floating point, in [0, 1)."""
    return t - math.floor(t)


@dataclass(frozen=True)
class EssentialBounds:
    """Essential bounds of a signal over one period.

    ``lower`` is ess inf(f - sigma), ``upper`` is ess sup(f); together they
    control well-posedness (lower > 0 gives a homeomorphic firing map) and
    the interspike-interval bound 1/lower.
    """

    lower: float
    upper: float


class PeriodicSignal(ABC):
    """A 1-periodic, locally integrable input current."""

    @abstractmethod
    def eval(self, t: float) -> float:
        """Value f(t mod 1)."""

    @abstractmethod
    def eval_array(self, ts: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`eval`."""

    @abstractmethod
    def integral(self, a: float, b: float) -> float:
        """Plain integral of f over [a, b] (a <= b)."""

    @abstractmethod
    def weighted_integral_scaled(self, sigma: float, t: float, delta: float) -> float:
        """Integral of [f(u) - sigma] * exp(sigma*(u - t)) over [t, t + delta].

        This is exp(-sigma*t) times :meth:`weighted_integral` and stays
        finite for arbitrarily large t, which is what the firing-time solver
        needs.
        """

    @abstractmethod
    def essential_bounds(self, sigma: float) -> EssentialBounds:
        """Essential bounds (ess inf(f - sigma), ess sup f) over one period."""

    @abstractmethod
    def is_continuous_at(self, t: float) -> bool:
        """Whether f is continuous at t (up to a null set convention)."""

    def __call__(self, t: float) -> float:
        return self.eval(t)

    def weighted_integral(self, sigma: float, a: float, b: float) -> float:
        """Integral of [f(u) - sigma] * exp(sigma*u) over [a, b] (a <= b)."""
        if b < a:
            raise ValueError("weighted_integral requires a <= b")
        if sigma == 0.0:
            return self.integral(a, b)
        return math.exp(sigma * a) * self.weighted_integral_scaled(sigma, a, b - a)

    def mean(self) -> float:
        """Average of f over one period."""
        return self.integral(0.0, 1.0)


class TrigPolynomial(PeriodicSignal):
    """f(t) = a0 + sum_k [c_k cos(2 pi k t) + s_k sin(2 pi k t)].

    Harmonics are (k, c_k, s_k) triples with distinct k >= 1.  All integrals
    use closed-form antiderivatives; the periodic part of every antiderivative
    is evaluated at t mod 1 so precision does not degrade for large times.
    """

    def __init__(self, a0: float, harmonics=()):
        harmonics = tuple((int(k), float(c), float(s)) for k, c, s in harmonics)
        ks = [k for k, _, _ in harmonics]
        if any(k < 1 for k in ks):
            raise ValueError("harmonic indices must be >= 1")
        if len(set(ks)) != len(ks):
            raise ValueError("harmonic indices must be pairwise distinct")
        self.a0 = float(a0)
        self.harmonics = tuple(sorted(harmonics))

    def __repr__(self):
        return f"TrigPolynomial(a0={self.a0!r}, harmonics={self.harmonics!r})"

    def eval(self, t: float) -> float:
        tau = frac(t)
        out = self.a0
        for k, c, s in self.harmonics:
            th = TWO_PI * k * tau
            out += c * math.cos(th) + s * math.sin(th)
        return out

    def eval_array(self, ts: np.ndarray) -> np.ndarray:
        tau = np.asarray(ts, dtype=float)
        tau = tau - np.floor(tau)
        out = np.full_like(tau, self.a0)
        for k, c, s in self.harmonics:
            th = TWO_PI * k * tau
            out += c * np.cos(th) + s * np.sin(th)
        return out

    def fprime(self, t: float) -> float:
        """Derivative f'(t)."""
        tau = frac(t)
        out = 0.0
        for k, c, s in self.harmonics:
            w = TWO_PI * k
            th = w * tau
            out += -c * w * math.sin(th) + s * w * math.cos(th)
        return out

    def _periodic_antiderivative(self, tau: float) -> float:
        # 1-periodic part of the antiderivative of f, evaluated at tau in [0,1)
        out = 0.0
        for k, c, s in self.harmonics:
            w = TWO_PI * k
            th = w * tau
            out += (c * math.sin(th) - s * math.cos(th)) / w
        return out

    def integral(self, a: float, b: float) -> float:
        return (
            self.a0 * (b - a)
            + self._periodic_antiderivative(frac(b))
            - self._periodic_antiderivative(frac(a))
        )

    def _weighted_periodic_part(self, sigma: float, tau: float) -> float:
        # Q(tau) with d/du [exp(sigma*u) Q(u mod 1)] = [f(u) - sigma] exp(sigma*u)
        out = (self.a0 - sigma) / sigma
        s2 = sigma * sigma
        for k, c, s in self.harmonics:
            w = TWO_PI * k
            th = w * tau
            den = s2 + w * w
            cth, sth = math.cos(th), math.sin(th)
            out += (c * (sigma * cth + w * sth) + s * (sigma * sth - w * cth)) / den
        return out

    def weighted_integral_scaled(self, sigma: float, t: float, delta: float) -> float:
        if sigma == 0.0:
            return self.integral(t, t + delta)
        q0 = self._weighted_periodic_part(sigma, frac(t))
        q1 = self._weighted_periodic_part(sigma, frac(t + delta))
        return math.exp(sigma * delta) * q1 - q0

    def essential_bounds(self, sigma: float) -> EssentialBounds:
        if not self.harmonics:
            return EssentialBounds(self.a0 - sigma, self.a0)
        lo = self._extremum(minimize=True)
        hi = self._extremum(minimize=False)
        return EssentialBounds(lo - sigma, hi)

    _GRID = 4096

    def _extremum(self, minimize: bool) -> float:
        # Dense grid scan refined by Newton/bisection on f' near the winner.
        ts = np.arange(self._GRID) / self._GRID
        vals = self.eval_array(ts)
        i = int(np.argmin(vals) if minimize else np.argmax(vals))
        best = float(vals[i])
        h = 1.0 / self._GRID
        t0 = float(ts[i])
        root = self._refine_critical(t0 - h, t0 + h)
        if root is not None:
            cand = self.eval(root)
            best = min(best, cand) if minimize else max(best, cand)
        return best

    def _refine_critical(self, lo: float, hi: float, tol: float = 1e-13):
        glo, ghi = self.fprime(lo), self.fprime(hi)
        if glo == 0.0:
            return lo
        if ghi == 0.0:
            return hi
        if glo * ghi > 0.0:
            return None
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            gm = self.fprime(mid)
            # one safeguarded Newton step from the midpoint
            d2 = self._fsecond(mid)
            if d2 != 0.0:
                cand = mid - gm / d2
                if lo < cand < hi:
                    gc = self.fprime(cand)
                    if abs(gc) < abs(gm):
                        mid, gm = cand, gc
            if gm == 0.0 or hi - lo < tol:
                return mid
            if (gm > 0.0) == (ghi > 0.0):
                hi, ghi = mid, gm
            else:
                lo, glo = mid, gm
        return 0.5 * (lo + hi)

    def _fsecond(self, t: float) -> float:
        tau = frac(t)
        out = 0.0
        for k, c, s in self.harmonics:
            w = TWO_PI * k
            th = w * tau
            out += -c * w * w * math.cos(th) - s * w * w * math.sin(th)
        return out

    def is_continuous_at(self, t: float) -> bool:
        return True


def constant(value: float) -> TrigPolynomial:
    """Constant signal f(t) = value."""
    return TrigPolynomial(value)


class PiecewiseConstant(PeriodicSignal):
    """Step function on [0, 1): value[i] on [breakpoints[i], breakpoints[i+1]).

    Breakpoints must start at 0 and be strictly increasing within [0, 1).
    Integrals are computed in exact rational arithmetic (floats are exact
    binary rationals), so period-unrolled integrals carry no roundoff beyond
    the final conversion back to float.
    """

    def __init__(self, breakpoints, values):
        breakpoints = tuple(float(b) for b in breakpoints)
        values = tuple(float(v) for v in values)
        if len(breakpoints) != len(values) or not breakpoints:
            raise ValueError("breakpoints and values must have equal nonzero length")
        if breakpoints[0] != 0.0:
            raise ValueError("first breakpoint must be 0")
        if any(x >= y for x, y in zip(breakpoints, breakpoints[1:])) or breakpoints[-1] >= 1.0:
            raise ValueError("breakpoints must be strictly increasing within [0, 1)")
        self.breakpoints = breakpoints
        self.values = values
        self._fb = [Fraction(b) for b in breakpoints] + [Fraction(1)]
        self._fv = [Fraction(v) for v in values]
        self._fcum = [Fraction(0)]
        for i, v in enumerate(self._fv):
            self._fcum.append(self._fcum[-1] + v * (self._fb[i + 1] - self._fb[i]))

    def __repr__(self):
        return f"PiecewiseConstant({list(self.breakpoints)!r}, {list(self.values)!r})"

    @property
    def period_mass(self) -> Fraction:
        """Exact integral of f over one period."""
        return self._fcum[-1]

    def _segment_index(self, tau: float) -> int:
        return bisect_right(self.breakpoints, tau) - 1

    def eval(self, t: float) -> float:
        return self.values[self._segment_index(frac(t))]

    def eval_array(self, ts: np.ndarray) -> np.ndarray:
        tau = np.asarray(ts, dtype=float)
        tau = tau - np.floor(tau)
        idx = np.searchsorted(self.breakpoints, tau, side="right") - 1
        return np.asarray(self.values, dtype=float)[idx]

    def cumulative_exact(self, x: Fraction) -> Fraction:
        """Exact integral of f over [0, x] for rational x."""
        k = math.floor(x)
        tau = x - k
        i = bisect_right(self._fb, tau) - 1
        if i == len(self._fv):  # tau == 1 cannot happen, but guard anyway
            i -= 1
        return k * self._fcum[-1] + self._fcum[i] + self._fv[i] * (tau - self._fb[i])

    def integral_exact(self, a: Fraction, b: Fraction) -> Fraction:
        return self.cumulative_exact(b) - self.cumulative_exact(a)

    def integral(self, a: float, b: float) -> float:
        return float(self.integral_exact(Fraction(a), Fraction(b)))

    def weighted_integral_scaled(self, sigma: float, t: float, delta: float) -> float:
        if sigma == 0.0:
            return self.integral(t, t + delta)
        # walk segment boundaries, each piece has an elementary antiderivative
        end = t + delta
        cur = t
        total = 0.0
        while cur < end:
            tau = frac(cur)
            i = self._segment_index(tau)
            nxt = cur + (float(self._fb[i + 1]) - tau)
            if nxt <= cur:  # guard against zero-length steps from roundoff
                nxt = np.nextafter(cur, math.inf)
            stop = min(nxt, end)
            v = self.values[i]
            total += (v - sigma) / sigma * (
                math.exp(sigma * (stop - t)) - math.exp(sigma * (cur - t))
            )
            cur = stop
        return total

    def essential_bounds(self, sigma: float) -> EssentialBounds:
        return EssentialBounds(min(self.values) - sigma, max(self.values))

    def jump_points(self):
        """Breakpoints (as fractions of the period) where f actually jumps."""
        pts = []
        m = len(self.values)
        for i, b in enumerate(self.breakpoints):
            if self.values[i] != self.values[(i - 1) % m]:
                pts.append(b)
        return pts

    def is_continuous_at(self, t: float) -> bool:
        tau = frac(t)
        return all(abs(tau - b) > 1e-12 for b in self.jump_points())


class Sampled(PeriodicSignal):
    """Linear interpolation of >= 2 samples on the uniform grid j/n, j < n.

    The interpolant wraps around (the value at t = 1 is the value at t = 0).
    Plain integrals are exact for the interpolant; exponentially weighted
    integrals use composite Simpson quadrature and are approximate.
    """

    #: Simpson panels per grid segment for weighted integrals
    _PANELS = 4

    def __init__(self, values, source_path: str | None = None):
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("Sampled requires at least two values")
        self.values = values
        self.source_path = source_path
        self._n = values.size
        ext = np.append(values, values[0])
        # exact node-to-node integrals of the interpolant
        self._node_cum = np.concatenate(
            [[0.0], np.cumsum((ext[:-1] + ext[1:]) / (2.0 * self._n))]
        )

    def __repr__(self):
        return f"Sampled(n={self._n}, source={self.source_path!r})"

    def eval(self, t: float) -> float:
        x = frac(t) * self._n
        j = int(x)
        if j == self._n:  # frac can round up to n only via x==n exactly
            j -= 1
        th = x - j
        v0 = self.values[j]
        v1 = self.values[(j + 1) % self._n]
        return v0 + (v1 - v0) * th

    def eval_array(self, ts: np.ndarray) -> np.ndarray:
        tau = np.asarray(ts, dtype=float)
        tau = tau - np.floor(tau)
        x = tau * self._n
        j = np.minimum(x.astype(int), self._n - 1)
        th = x - j
        v0 = self.values[j]
        v1 = self.values[(j + 1) % self._n]
        return v0 + (v1 - v0) * th

    def _cumulative(self, x: float) -> float:
        # integral of the interpolant over [0, x]
        k = math.floor(x)
        tau = x - k
        g = tau * self._n
        j = min(int(g), self._n - 1)
        th = g - j
        v0 = self.values[j]
        v1 = self.values[(j + 1) % self._n]
        partial = (v0 * th + 0.5 * (v1 - v0) * th * th) / self._n
        return k * self._node_cum[-1] + self._node_cum[j] + partial

    def integral(self, a: float, b: float) -> float:
        return self._cumulative(b) - self._cumulative(a)

    def weighted_integral_scaled(self, sigma: float, t: float, delta: float) -> float:
        if sigma == 0.0:
            return self.integral(t, t + delta)
        end = t + delta
        seg = 1.0 / self._n
        total = 0.0
        cur = t
        while cur < end:
            tau = frac(cur)
            j = min(int(tau * self._n), self._n - 1)
            nxt = cur + ((j + 1) * seg - tau)
            if nxt <= cur:
                nxt = np.nextafter(cur, math.inf)
            stop = min(nxt, end)
            total += self._simpson_piece(sigma, t, cur, stop)
            cur = stop
        return total

    def _simpson_piece(self, sigma: float, origin: float, a: float, b: float) -> float:
        m = 2 * self._PANELS
        xs = np.linspace(a, b, m + 1)
        ys = (self.eval_array(xs) - sigma) * np.exp(sigma * (xs - origin))
        w = np.ones(m + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return float(np.dot(w, ys)) * (b - a) / (3.0 * m)

    def essential_bounds(self, sigma: float) -> EssentialBounds:
        return EssentialBounds(float(self.values.min()) - sigma, float(self.values.max()))

    def is_continuous_at(self, t: float) -> bool:
        return True


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def parse_signal(spec: str) -> PeriodicSignal:
    """Parse a signal grammar string.

    Forms: ``const:<a0>``, ``trig:<a0>;<k>,<c>,<s>;...``,
    ``pwc:<b0>,<v0>;<b1>,<v1>;...``, ``sampled:<path-to-CSV>`` (one value
    per line).
    """
    kind, _, body = spec.partition(":")
    kind = kind.strip()
    if not body:
        raise ValueError(f"malformed signal spec: {spec!r}")
    if kind == "const":
        return TrigPolynomial(float(body))
    if kind == "trig":
        parts = [p for p in body.split(";") if p.strip()]
        a0 = float(parts[0])
        harmonics = []
        for p in parts[1:]:
            k, c, s = p.split(",")
            harmonics.append((int(k), float(c), float(s)))
        return TrigPolynomial(a0, harmonics)
    if kind == "pwc":
        breaks, vals = [], []
        for p in body.split(";"):
            if not p.strip():
                continue
            b, v = p.split(",")
            breaks.append(float(b))
            vals.append(float(v))
        return PiecewiseConstant(breaks, vals)
    if kind == "sampled":
        path = body.strip()
        values = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    values.append(float(line))
        return Sampled(values, source_path=path)
    raise ValueError(f"unknown signal kind {kind!r}")


def signal_spec(signal: PeriodicSignal) -> str:
    """Canonical grammar string for a signal (inverse of :func:`parse_signal`)."""
    if isinstance(signal, TrigPolynomial):
        if not signal.harmonics:
            return f"const:{_fmt(signal.a0)}"
        parts = [f"trig:{_fmt(signal.a0)}"]
        parts += [f"{k},{_fmt(c)},{_fmt(s)}" for k, c, s in signal.harmonics]
        return ";".join(parts)
    if isinstance(signal, PiecewiseConstant):
        pairs = ";".join(
            f"{_fmt(b)},{_fmt(v)}" for b, v in zip(signal.breakpoints, signal.values)
        )
        return f"pwc:{pairs}"
    if isinstance(signal, Sampled):
        if signal.source_path is None:
            raise ValueError("sampled signal without a source path has no spec form")
        return f"sampled:{signal.source_path}"
    raise TypeError(f"unknown signal type {type(signal)!r}")
