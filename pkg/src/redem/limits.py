"""Closed-form limit quantities built on a rate function.

All of them reduce to one constrained scalar problem: maximize
beta * x - rate(x) / alpha over the feasible set {x >= 0 : rate(x) <= q}.
Because the rate is nondecreasing the feasible set is the interval
[0, rate^{-1}(q)]; the objective is concave for a convex rate but the
convolution rate need not be convex, so the optimizer is a linear grid
followed by golden-section refinement with both endpoints evaluated
explicitly.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfRangeError, PreconditionError
from .rates import DEFAULT_TOL, MAX_ITER, _golden_max, rate_inverse

_GRID_POINTS = 129
_DERIV_H = 1e-5
_DERIV_X_CAP = 1e7


@dataclass(frozen=True)
class LimitResult:
    """Solution of one constrained growth-rate problem."""

    #: limit of (1/m) log of the normalized partition sum
    growth_rate: float
    #: -growth_rate / beta (the free-energy sign convention)
    free_energy: float
    minimizer_x: float
    #: True when rate(minimizer_x) = q within tolerance, i.e. the feasible
    #: boundary binds (q below the critical value).
    constraint_active: bool


def _constrained_sup(rate, beta, q, alpha, tol):
    """sup over {x >= 0, rate(x) <= q} of beta*x - rate(x)/alpha.

    Returns (argmax, value, feasible_upper_edge).
    """
    try:
        b_edge = rate_inverse(rate, q, tol)
    except OutOfRangeError:
        # q above the rate's supremum: the whole (finite) domain is feasible.
        if not math.isfinite(rate.x_sup):
            raise
        b_edge = rate.x_sup

    def obj(x):
        r = rate.value(x)
        return -math.inf if math.isinf(r) else beta * x - r / alpha

    xs = np.linspace(0.0, b_edge, _GRID_POINTS)
    rv = rate.values(xs)
    vals = beta * xs - rv / alpha
    i = int(np.argmax(vals))
    best_x, best_v = float(xs[i]), float(vals[i])
    lo = float(xs[max(i - 1, 0)])
    hi = float(xs[min(i + 1, _GRID_POINTS - 1)])
    x_ref, v_ref = _golden_max(obj, lo, hi, tol)
    if v_ref > best_v:
        best_x, best_v = float(x_ref), float(v_ref)
    for cand in (0.0, float(b_edge)):
        vc = obj(cand)
        if vc > best_v:
            best_x, best_v = cand, vc
    return best_x, best_v, float(b_edge)


def growth_rate(rate, beta, q, tol=DEFAULT_TOL):
    """Limiting growth rate sup_{rate(x) <= q} {beta x - rate(x)} with x* and
    the constraint-activity flag; free_energy = -growth_rate / beta."""
    if beta <= 0:
        raise PreconditionError(f"growth_rate requires beta > 0, got {beta}")
    if q <= 0:
        raise PreconditionError(f"growth_rate requires q > 0, got {q}")
    x_star, value, _ = _constrained_sup(rate, beta, q, 1.0, tol)
    r_star = rate.value(x_star)
    active = (q - r_star) <= max(1e-6, 10.0 * tol)
    return LimitResult(value, -value / beta, x_star, bool(active))


def rem_free_energy(phi, q, tol=DEFAULT_TOL):
    """inf_{phi(x) <= q} {phi(x) - x} - q, the unnormalized-sum convention
    of the fixed-length model at unit inverse temperature."""
    if q <= 0:
        raise PreconditionError(f"rem_free_energy requires q > 0, got {q}")
    _, value, _ = _constrained_sup(phi, 1.0, q, 1.0, tol)
    return -value - q


def critical_q(rate, beta, tol=DEFAULT_TOL):
    """(q_cr, x0) with rate'(x0) = beta and q_cr = rate(x0).

    For q >= q_cr the feasibility constraint in ``growth_rate`` is inactive.
    The derivative is a central difference (h = 1e-5); the crossing is
    bracketed by doubling, scanned for its first sign change (the rate need
    not be convex, so the smallest root is reported), then bisected.
    Raises OutOfRangeError when the slope never reaches beta on the finite
    domain.
    """
    if beta <= 0:
        raise PreconditionError(f"critical_q requires beta > 0, got {beta}")
    h = _DERIV_H

    def slope(x):
        r_hi = rate.value(x + h)
        r_lo = rate.value(max(x - h, 0.0))
        if math.isinf(r_hi) or math.isinf(r_lo):
            return math.inf
        return (r_hi - r_lo) / (2.0 * h)

    cap = _DERIV_X_CAP
    if math.isfinite(rate.x_sup):
        cap = min(cap, rate.x_sup - 2.0 * h)
    if cap <= 2.0 * h:
        raise OutOfRangeError("rate domain too small for a derivative search")

    lo_edge = 2.0 * h
    if slope(lo_edge) >= beta:
        hi_edge = lo_edge
        lo_edge = h
    else:
        x = 1e-3
        hi_edge = None
        prev = lo_edge
        for _ in range(MAX_ITER):
            x = min(x, cap)
            if slope(x) >= beta:
                hi_edge = x
                lo_edge = prev
                break
            if x >= cap:
                raise OutOfRangeError(
                    f"rate slope stays below beta={beta} up to x={cap:.6g}")
            prev = x
            x *= 2.0
        if hi_edge is None:
            raise OutOfRangeError("derivative bracket search exhausted its budget")

    # First sign change of slope - beta inside the bracket.
    scan = np.linspace(lo_edge, hi_edge, 65)
    a, b = lo_edge, hi_edge
    for j in range(1, len(scan)):
        if slope(float(scan[j])) >= beta:
            a, b = float(scan[j - 1]), float(scan[j])
            break
    for _ in range(MAX_ITER):
        if b - a <= tol:
            break
        mid = 0.5 * (a + b)
        if slope(mid) < beta:
            a = mid
        else:
            b = mid
    x0 = 0.5 * (a + b)
    return float(rate.value(x0)), float(x0)


def er_gamma(rate, q, tol=DEFAULT_TOL):
    """The level set rate(gamma) = q: the limiting maximum of N = floor(e^{qm})
    normalized sums, classical for an energy rate and generalized for the
    convolution rate."""
    return rate_inverse(rate, q, tol)


def interpolation_rate(rate, beta, q, alpha, tol=DEFAULT_TOL):
    """-inf_{rate(x) <= q} {rate(x)/alpha - beta x} for alpha in [1, inf].

    alpha = 1 is the growth-rate problem (same code path); alpha = +inf
    returns beta * rate^{-1}(q) exactly.
    """
    if alpha < 1:
        raise PreconditionError(f"interpolation_rate requires alpha >= 1, got {alpha}")
    if beta < 0:
        raise PreconditionError(f"interpolation_rate requires beta >= 0, got {beta}")
    if q <= 0:
        raise PreconditionError(f"interpolation_rate requires q > 0, got {q}")
    if math.isinf(alpha):
        return beta * rate_inverse(rate, q, tol)
    _, value, _ = _constrained_sup(rate, beta, q, alpha, tol)
    return value
