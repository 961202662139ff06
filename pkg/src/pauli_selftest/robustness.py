"""Closed-form robustness bounds and the Werner-noise certification curve."""

import csv
import io
from dataclasses import dataclass

import numpy as np

from .certification import certification_value, decompose_witness, ideal_network, isotropic_witness
from .objects import SQRT2, werner_state, werner_strategy
from .qubit import MAX_BELL_VALUE, sos_residuals

STATE_BOUND_CONSTANT = 55 + 36 * SQRT2
ANTICOMMUTATOR_CONSTANTS = (4 + 4 * SQRT2, 6 + 6 * SQRT2, 8 + 8 * SQRT2)
WITNESS_TERMS = 12


@dataclass(frozen=True)
class NoiseModel:
    eta: float = 1.0
    epsilon: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if self.epsilon < 0 or self.theta < 0:
            raise ValueError("epsilon and theta must be non-negative")


@dataclass(frozen=True)
class RobustnessCurvePoint:
    eta: float
    expected_I: float
    theta_crit: float


def _check_epsilon(epsilon):
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")


def state_distance_bound(epsilon):
    """(55 + 36 sqrt2) sqrt(eps): distance of the swapped state from xi (x) Phi+."""
    _check_epsilon(epsilon)
    return STATE_BOUND_CONSTANT * np.sqrt(epsilon)


def anticommutator_bounds(epsilon):
    """Bounds on ||{Z,X}psi||, ||{Z,Y}psi||, ||{X,Y}psi|| at Bell deficit eps."""
    _check_epsilon(epsilon)
    return tuple(c * np.sqrt(epsilon) for c in ANTICOMMUTATOR_CONSTANTS)


def observable_mismatch_bound(epsilon):
    """Bound 2 sqrt(eps) on ||(Z^C - Z^A) psi||."""
    _check_epsilon(epsilon)
    return 2 * np.sqrt(epsilon)


def noisy_qubit_selftest(epsilon):
    """Ideal measurements on a purified Werner state whose Bell value is
    6 sqrt2 - eps. Returns ``(strategy, sos_report)``."""
    if not 0.0 <= epsilon <= MAX_BELL_VALUE:
        raise ValueError(f"epsilon must lie in [0, 6 sqrt2], got {epsilon}")
    s = werner_strategy(1 - epsilon / MAX_BELL_VALUE)
    return s, sos_residuals(s)


def worst_case_I_penalty(theta):
    """12 (u^2 + u) with u = sqrt2 theta + theta^2."""
    if theta < 0:
        raise ValueError(f"theta must be non-negative, got {theta}")
    u = SQRT2 * theta + theta ** 2
    return WITNESS_TERMS * (u ** 2 + u)


def _check_unit(name, value):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def expected_I_werner(eta, p):
    """(1/16)((1-3p) eta^2 + 2 eta (1-eta) + (1-eta)^2 / 4).

    The closed form used for the critical-radius curve. A full simulation of
    the network differs in the last term; see ``simulated_I_werner``.
    """
    _check_unit("eta", eta)
    _check_unit("p", p)
    return ((1 - 3 * p) * eta ** 2 + 2 * eta * (1 - eta) + (1 - eta) ** 2 / 4) / 16


def simulated_I_werner_closed_form(eta, p):
    """Exact network value with Werner auxiliaries of visibility eta:
    (1/16)((1-3p) eta^2 + 2 eta (1-eta) + (1-eta)^2)."""
    _check_unit("eta", eta)
    _check_unit("p", p)
    return ((1 - 3 * p) * eta ** 2 + 2 * eta * (1 - eta) + (1 - eta) ** 2) / 16


def simulated_I_werner(eta, p):
    """I from simulating the one-copy network with Werner auxiliaries."""
    ns = ideal_network(werner_state(p), 1, visibility=eta)
    return certification_value(ns, decompose_witness(isotropic_witness(1), 1))


def _theta_from_penalty(target):
    """Positive theta with worst_case_I_penalty(theta) = target."""
    u = (-1 + np.sqrt(1 + 4 * target / WITNESS_TERMS)) / 2
    return (-SQRT2 + np.sqrt(2 + 4 * u)) / 2


def _theta_bisect(target, tol=1e-15):
    lo, hi = 0.0, 1.0
    while worst_case_I_penalty(hi) < target:
        hi *= 2
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if worst_case_I_penalty(mid) < target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def critical_theta(eta, p, cross_check=True):
    """Largest robustness radius theta for which the noisy inequality still
    certifies the target: 0 when the expected value is non-negative."""
    value = expected_I_werner(eta, p)
    if value >= 0:
        return 0.0
    theta = _theta_from_penalty(-value)
    if cross_check:
        other = _theta_bisect(-value)
        if abs(other - theta) > 1e-12:
            raise ArithmeticError(f"root mismatch: {theta} vs {other}")
    return float(theta)


def robustness_curve(p, eta_grid):
    return [RobustnessCurvePoint(float(e), float(expected_I_werner(e, p)),
                                 critical_theta(e, p)) for e in eta_grid]


def curve_to_csv(points):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["eta", "expected_I", "theta_crit"])
    for pt in points:
        writer.writerow([f"{pt.eta:.12g}", f"{pt.expected_I:.12g}", f"{pt.theta_crit:.12g}"])
    return buf.getvalue()
