"""Shared system factories for the test suite."""

import math

from firingmap import IFSystem, PiecewiseConstant, TrigPolynomial, constant

# golden-mean-squared mean level: PI rotation number 2 - golden ratio,
# the "most irrational" choice, safely unlocked at any practical q_max
GOLDEN_A0 = (3.0 + math.sqrt(5.0)) / 2.0


def half_on_half_off():
    """Value 2 on [k, k+1/2], 0 on (k+1/2, k+1): the discontinuous PI fixture."""
    return PiecewiseConstant([0.0, 0.5], [2.0, 0.0])


def pi_half_on():
    return IFSystem(0.0, half_on_half_off())


def translation_lif(q: int) -> IFSystem:
    """sigma=1 with f = 1/(1 - e^-q): the firing map is the translation by q."""
    return IFSystem(1.0, constant(1.0 / (1.0 - math.exp(-q))))


def cosine_lif(beta: float) -> IFSystem:
    """sigma=1 with f = 2(1 + beta cos 2 pi t); homeomorphic lift for beta < 1/2."""
    return IFSystem(1.0, TrigPolynomial(2.0, [(1, 2.0 * beta, 0.0)]))


def golden_pi(amp: float = 0.5) -> IFSystem:
    """Perfect integrator with irrational rotation number 1/GOLDEN_A0."""
    return IFSystem(0.0, TrigPolynomial(GOLDEN_A0, [(1, amp, 0.0)]))


# a parameter value verified (by rotation estimates and a periodic-orbit
# witness) to sit inside the 7/10 locking tongue of the cosine_lif family,
# which spans roughly beta in [0.412, 0.444]
BETA_LOCKED_7_10 = 0.43
