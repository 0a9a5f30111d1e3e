"""Rate functions by numerical convex conjugation.

``conjugate`` computes sup_{t >= 0} {x t - cgf(t)} for a convex cgf with a
doubling bracket followed by golden-section search on the concave
objective.  ``psi`` applies the same transform to a length law's scaling
cgf, with closed forms where they exist.  ``nu`` combines a length rate
with an energy rate through inf_y [psi(y) + y phi(x/y)], the decay rate of
one random-length sum, and ``tail_rate`` evaluates the same decay at a
finite mean length by summing the per-length Chernoff terms in log space.

Saturated values are ordinary IEEE infinities produced by explicit policy
(an overflow threshold on the conjugate, support bounds on psi), never by
floating-point overflow; suprema that are still climbing at the search cap
are reported at the cap and flagged, since some boundary suprema are
approached but not attained.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonConvergenceError, OutOfRangeError, PreconditionError

DEFAULT_TOL = 1e-9
#: Upper end of the conjugate search when the cgf domain is unbounded.
DEFAULT_T_CAP = 1e6
#: Conjugate values beyond this are reported as +inf (x past the law's support).
OVERFLOW_THRESHOLD = 1e8
MAX_ITER = 200

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_NU_Y_MIN = 1e-3
_NU_GRID_POINTS = 400
_PSI_CUTOFF = 1e3
_INVERSE_X_CAP = 1e12
_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class ConjugateResult:
    """Value and diagnostics of one conjugate evaluation."""

    value: float
    t_star: float
    #: True when the objective was still increasing at the search cap, so the
    #: reported value is the boundary value, not an attained supremum.
    saturated_at_cap: bool


@dataclass(frozen=True)
class NuResult:
    """Value and diagnostics of one convolution-rate evaluation."""

    value: float
    minimizer_y: float
    #: True when the infimum was taken at an edge of the search range
    #: (including the y -> 0 limit estimate) rather than in its interior.
    boundary_attained: bool


def _golden_max(g, a, b, tol):
    """Golden-section maximum of a unimodal g on [a, b]; returns (t, g(t))."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    gc, gd = g(c), g(d)
    for _ in range(MAX_ITER):
        if b - a <= tol:
            break
        if gc >= gd:
            b, d, gd = d, c, gc
            c = b - _INVPHI * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + _INVPHI * (b - a)
            gd = g(d)
    return (c, gc) if gc >= gd else (d, gd)


def _golden_min(f, a, b, tol):
    """Golden-section minimum of a unimodal f on [a, b]; returns (t, f(t))."""
    t, v = _golden_max(lambda y: -f(y), a, b, tol)
    return t, -v


def conjugate_detail(cgf, x, tol=DEFAULT_TOL, t_cap=DEFAULT_T_CAP, domain_sup=math.inf):
    """sup_{0 <= t < min(domain_sup, t_cap)} {x t - cgf(t)} with diagnostics.

    The objective is concave (cgf convex), so a doubling bracket from t = 1
    followed by golden-section search is robust, including at domain edges.
    """
    if x < 0:
        raise DomainError(f"conjugate requires x >= 0, got {x}")
    if tol <= 0:
        raise DomainError("tol must be positive")
    hi_limit = t_cap if math.isinf(domain_sup) else min(t_cap, domain_sup * (1.0 - 1e-12))
    if hi_limit <= 0:
        return ConjugateResult(0.0, 0.0, False)

    def g(t):
        return x * t - float(cgf(t))

    # g(0) = 0 for a centred law; it is the floor of the supremum.
    t_cur = min(1.0, 0.5 * hi_limit)
    g_cur = g(t_cur)
    best_t, best_g = 0.0, 0.0
    if g_cur <= 0.0:
        bracket = (0.0, t_cur)
    else:
        # g is concave, so once it keeps rising up to the cap the maximum
        # sits in the last bracket against the cap.
        t_prev = 0.0
        bracket = None
        for _ in range(MAX_ITER):
            if t_cur >= hi_limit:
                bracket = (t_prev, hi_limit)
                break
            t_next = min(2.0 * t_cur, hi_limit)
            g_next = g(t_next)
            if g_next <= g_cur:
                bracket = (t_prev, t_next)
                break
            t_prev, t_cur, g_cur = t_cur, t_next, g_next
        else:
            raise NonConvergenceError("conjugate bracket search exhausted its budget")
        best_t, best_g = t_cur, g_cur

    a, b = bracket
    t_star, g_star = _golden_max(g, a, b, tol)
    if g_star < best_g:
        t_star, g_star = best_t, best_g
    saturated = (hi_limit - t_star) <= max(100.0 * tol, 1e-9 * hi_limit)
    if g_star > OVERFLOW_THRESHOLD:
        return ConjugateResult(math.inf, t_star, saturated)
    return ConjugateResult(max(g_star, 0.0), t_star, saturated)


def conjugate(cgf, x, tol=DEFAULT_TOL, t_cap=DEFAULT_T_CAP, domain_sup=math.inf):
    """sup_{0 <= t < min(domain_sup, t_cap)} {x t - cgf(t)} to accuracy tol."""
    return conjugate_detail(cgf, x, tol, t_cap, domain_sup).value


def _conjugate_grid(cgf, xs, tol=DEFAULT_TOL, t_cap=DEFAULT_T_CAP, domain_sup=math.inf):
    """Vector variant of ``conjugate`` over a 1-D grid of x values.

    Runs the doubling bracket and the golden-section phase in lockstep
    across the grid with masks; the cgf must accept arrays.  Used by inner
    loops that evaluate a rate on hundreds of points at once.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if np.any(xs < 0):
        raise DomainError("conjugate requires x >= 0")
    hi_limit = t_cap if math.isinf(domain_sup) else min(t_cap, domain_sup * (1.0 - 1e-12))
    n = xs.shape[0]
    start = min(1.0, 0.5 * hi_limit)

    t_prev = np.zeros(n)
    t_cur = np.full(n, start)
    g_cur = xs * t_cur - cgf(t_cur)
    lo = np.zeros(n)
    hi = np.full(n, start)
    climbing = g_cur > 0.0
    for _ in range(MAX_ITER):
        if not climbing.any():
            break
        # Lanes that reached the cap while rising keep the cap as the upper
        # bracket edge; concavity puts their maximum inside [t_cur, cap].
        at_cap = climbing & (t_cur >= hi_limit)
        lo = np.where(at_cap, t_prev, lo)
        hi = np.where(at_cap, hi_limit, hi)
        climbing &= ~at_cap
        t_next = np.where(climbing, np.minimum(2.0 * t_cur, hi_limit), 0.0)
        g_next = np.where(climbing, xs * t_next - cgf(t_next), -np.inf)
        peaked = climbing & (g_next <= g_cur)
        lo = np.where(peaked, t_prev, lo)
        hi = np.where(peaked, t_next, hi)
        advance = climbing & ~peaked
        t_prev = np.where(advance, t_cur, t_prev)
        t_cur = np.where(advance, t_next, t_cur)
        g_cur = np.where(advance, g_next, g_cur)
        climbing = advance

    a, b = lo, hi
    for _ in range(MAX_ITER):
        width = b - a
        if float(width.max(initial=0.0)) <= tol:
            break
        c = b - _INVPHI * width
        d = a + _INVPHI * width
        # Interior points a < c < d < b: keep [a, d] when the left probe wins.
        keep_left = (xs * c - cgf(c)) >= (xs * d - cgf(d))
        b = np.where(keep_left, d, b)
        a = np.where(keep_left, a, c)
    t_star = 0.5 * (a + b)
    out = np.maximum(xs * t_star - cgf(t_star), 0.0)
    return np.where(out > OVERFLOW_THRESHOLD, np.inf, out)


def psi(law, s, tol=DEFAULT_TOL, t_cap=DEFAULT_T_CAP):
    """Rate of deviations of lambda/m: sup_{t >= 0} {s t - chi(t)}.

    Closed forms: deterministic lengths give 0 on [0, 1] and +inf above 1;
    Poisson gives 0 on [0, 1] and s (log s - 1) + 1 on [1, inf).  Other
    kinds fall back to numerical conjugation, with s beyond the scaled
    support mapped to +inf.
    """
    if s < 0:
        raise DomainError(f"psi requires s >= 0, got {s}")
    if law.kind == "deterministic":
        return 0.0 if s <= 1.0 else math.inf
    if law.kind == "poisson":
        if s <= 1.0:
            return 0.0
        return s * (math.log(s) - 1.0) + 1.0
    if s > law.scaled_sup:
        return math.inf
    return conjugate(law._chi, s, tol, t_cap)


def _psi_grid(law, ss, tol=DEFAULT_TOL, t_cap=DEFAULT_T_CAP):
    ss = np.atleast_1d(np.asarray(ss, dtype=float))
    if law.kind == "deterministic":
        return np.where(ss <= 1.0, 0.0, np.inf)
    if law.kind == "poisson":
        safe = np.maximum(ss, 1e-300)
        return np.where(ss <= 1.0, 0.0, ss * (np.log(safe) - 1.0) + 1.0)
    out = np.full(ss.shape, np.inf)
    mask = ss <= law.scaled_sup
    if mask.any():
        out[mask] = _conjugate_grid(law._chi, ss[mask], tol, t_cap)
    return out


class RateFunction:
    """A nonnegative nondecreasing rate on x >= 0, +inf outside its domain.

    Instances are immutable after construction, evaluation is pure, and it
    is safe to evaluate one instance from many threads.
    """

    #: supremum of the finite domain (may be +inf)
    x_sup = math.inf

    def value(self, x):
        raise NotImplementedError

    def values(self, xs):
        """Vectorized evaluation; the default is a scalar loop."""
        return np.array([self.value(float(x)) for x in np.atleast_1d(xs)])

    def __call__(self, x):
        return self.value(x)

    def inverse(self, q, tol=DEFAULT_TOL):
        return rate_inverse(self, q, tol)


class EnergyConjugate(RateFunction):
    """phi(x): the large-deviation rate of a mean of i.i.d. energy draws."""

    def __init__(self, law, eval_tolerance=DEFAULT_TOL, t_cap=DEFAULT_T_CAP):
        self.law = law
        self.eval_tolerance = eval_tolerance
        self.t_cap = t_cap
        self.x_sup = law.ess_sup

    def value(self, x):
        return self.detail(x).value

    def detail(self, x):
        """Full conjugate diagnostics (exposes the saturated-at-cap flag)."""
        return conjugate_detail(self.law._cgf, x, self.eval_tolerance,
                                self.t_cap, self.law.cgf_domain_sup)

    def values(self, xs):
        return _conjugate_grid(self.law._cgf, xs, self.eval_tolerance,
                               self.t_cap, self.law.cgf_domain_sup)

    def __repr__(self):
        return f"EnergyConjugate({self.law.kind})"


class LengthConjugate(RateFunction):
    """psi(s): the large-deviation rate of lambda/m under the scaling cgf."""

    def __init__(self, law, eval_tolerance=DEFAULT_TOL, t_cap=DEFAULT_T_CAP):
        self.law = law
        self.eval_tolerance = eval_tolerance
        self.t_cap = t_cap
        self.x_sup = law.scaled_sup

    def value(self, s):
        return psi(self.law, s, self.eval_tolerance, self.t_cap)

    def values(self, ss):
        return _psi_grid(self.law, ss, self.eval_tolerance, self.t_cap)

    def __repr__(self):
        return f"LengthConjugate({self.law.kind})"


class ConvolutionRate(RateFunction):
    """nu(x) = inf_{y >= 0} [psi(y) + y phi(x/y)], the random-length sum rate."""

    def __init__(self, length_rate, energy_rate, eval_tolerance=DEFAULT_TOL):
        self.length_rate = length_rate
        self.energy_rate = energy_rate
        self.eval_tolerance = eval_tolerance
        self.x_sup = _combined_sup(length_rate.x_sup, energy_rate.x_sup)
        # Precomputed at construction so value() stays pure and thread-safe.
        self._psi_cut = _smallest_above(length_rate, _PSI_CUTOFF)

    def value(self, x):
        return self.detail(x).value

    def detail(self, x):
        return nu_detail(self.length_rate, self.energy_rate, x,
                         self.eval_tolerance, psi_cut=self._psi_cut)

    def __repr__(self):
        return f"ConvolutionRate({self.length_rate!r}, {self.energy_rate!r})"


def _combined_sup(psi_sup, phi_sup):
    # x = y * (x/y) stays finite for y up to psi_sup and x/y up to phi_sup.
    if math.isinf(psi_sup) or math.isinf(phi_sup):
        return math.inf
    return psi_sup * phi_sup


def _smallest_above(rate, cutoff, start=1.0, growth_cap=_INVERSE_X_CAP):
    """Smallest y (within ~0.1 %) with rate(y) > cutoff; growth_cap if none."""
    y = start
    if rate.value(y) > cutoff:
        lo, hi = 1e-6, y
    else:
        hi = None
        for _ in range(MAX_ITER):
            y_next = min(2.0 * y, growth_cap)
            if rate.value(y_next) > cutoff:
                lo, hi = y, y_next
                break
            y = y_next
            if y >= growth_cap:
                return growth_cap
        if hi is None:
            return growth_cap
    for _ in range(60):
        if hi - lo <= 1e-3 * hi:
            break
        mid = 0.5 * (lo + hi)
        if rate.value(mid) > cutoff:
            hi = mid
        else:
            lo = mid
    return hi


def _h_scalar(psi_rate, phi_rate, x, y):
    p = psi_rate.value(y)
    if math.isinf(p):
        return math.inf
    u = phi_rate.value(x / y)
    if math.isinf(u):
        return math.inf
    return p + y * u


def nu_detail(psi_rate, phi_rate, x, tol=DEFAULT_TOL, psi_cut=None):
    """inf_{y > 0} [psi(y) + y phi(x/y)] with minimizer diagnostics.

    The objective need not be convex in y, so a coarse log-spaced grid
    picks the best bracket and golden-section search refines it.  The
    search range is [1e-3, y_max] with y_max = max(4x, smallest y where
    psi alone exceeds 1e3); the y -> 0 edge is handled by the limit
    y phi(x/y) -> x * (asymptotic slope of phi), estimated at u = x/1e-3.
    """
    if x < 0:
        raise DomainError(f"nu requires x >= 0, got {x}")
    if tol <= 0:
        raise DomainError("tol must be positive")
    if psi_cut is None:
        psi_cut = _smallest_above(psi_rate, _PSI_CUTOFF)
    y_max = max(4.0 * x, psi_cut)
    ys = np.geomspace(_NU_Y_MIN, y_max, _NU_GRID_POINTS)
    h_grid = psi_rate.values(ys) + ys * phi_rate.values(x / ys)

    i = int(np.argmin(h_grid))
    best_y = float(ys[i])
    best_v = float(h_grid[i])
    boundary = False

    def h(y):
        return _h_scalar(psi_rate, phi_rate, x, y)

    lo = float(ys[i - 1]) if i > 0 else float(ys[0])
    hi = float(ys[i + 1]) if i + 1 < len(ys) else float(ys[-1])
    y_ref, v_ref = _golden_min(h, lo, hi, tol)
    if v_ref < best_v:
        best_y, best_v = float(y_ref), float(v_ref)

    # psi(1) = 0 for a mean-m family, and the scale-free candidate y = x
    # catches length-dominated minima; both cost one evaluation.
    for cand in ((1.0, x) if x > 0 else (1.0,)):
        vc = h(cand)
        if vc < best_v:
            best_y, best_v = float(cand), float(vc)

    if x > 0:
        u0 = x / _NU_Y_MIN
        pu = phi_rate.value(u0)
        v0 = math.inf if math.isinf(pu) else x * (pu / u0)
        if v0 < best_v:
            best_y, best_v, boundary = 0.0, float(v0), True

    if math.isnan(best_v):
        raise NonConvergenceError(f"nu refinement produced NaN at x={x}")
    if not boundary and math.isfinite(best_v):
        boundary = (best_y <= _NU_Y_MIN * (1.0 + 1e-9)
                    or best_y >= y_max * (1.0 - 1e-9))
    if math.isinf(best_v):
        return NuResult(math.inf, math.nan, True)
    return NuResult(best_v, best_y, boundary)


def nu(psi_rate, phi_rate, x, tol=DEFAULT_TOL):
    """inf_{y > 0} [psi(y) + y phi(x/y)] to accuracy tol."""
    return nu_detail(psi_rate, phi_rate, x, tol).value


def rate_inverse(rate, q, tol=DEFAULT_TOL):
    """The unique x >= 0 with rate(x) = q, by bisection on the nondecreasing rate.

    Raises OutOfRangeError when q exceeds the supremum of the rate over its
    finite domain.
    """
    if q <= 0:
        raise PreconditionError(f"rate_inverse requires q > 0, got {q}")
    if tol <= 0:
        raise DomainError("tol must be positive")
    cap = rate.x_sup if math.isfinite(rate.x_sup) else _INVERSE_X_CAP
    hi = min(1.0, cap)
    f_hi = rate.value(hi)
    for _ in range(MAX_ITER):
        if f_hi >= q:
            break
        if hi >= cap:
            raise OutOfRangeError(
                f"q={q} exceeds the rate's supremum (~{f_hi:.6g}) on its finite domain")
        hi = min(2.0 * hi, cap)
        f_hi = rate.value(hi)
    else:
        raise NonConvergenceError("rate_inverse bracket search exhausted its budget")
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if rate.value(mid) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def tail_rate(length_law, phi, x, m, tol=DEFAULT_TOL):
    """Finite-m decay rate -(1/m) log sum_l P(lambda = l) exp(-l phi(x m / l)).

    Keeps the leading exponential order only (no subexponential prefactors).
    Unbounded supports are truncated where the length tail mass falls below
    ~1e-20 via the Chernoff bound m * kl(l/m) >= 45, and the sum runs in
    log space.
    """
    if x <= 0:
        raise DomainError(f"tail_rate requires x > 0, got {x}")
    if m < 1:
        raise DomainError(f"tail_rate requires m >= 1, got {m}")
    ls, logp = _length_log_pmf(length_law, m)
    u = x * m / ls
    phi_vals = phi.values(u)
    expo = np.where(np.isinf(phi_vals), -np.inf, logp - ls * phi_vals)
    finite = expo > -np.inf
    if not finite.any():
        return math.inf
    peak = float(expo[finite].max())
    total = float(np.exp(expo[finite] - peak).sum())
    return -(peak + math.log(total)) / m


_KL_CUT = 45.0


def _poisson_kl(s):
    # Per-unit exponent of both Poisson tails around the mean.
    if s <= 0.0:
        return 1.0
    return s * math.log(s) - s + 1.0


def _poisson_support(m):
    target = _KL_CUT / m
    # Upper cut: kl is increasing on [1, inf); smallest s with kl(s) >= target.
    hi = 2.0
    while _poisson_kl(hi) < target:
        hi *= 2.0
    lo = 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _poisson_kl(mid) >= target:
            hi = mid
        else:
            lo = mid
    l_hi = int(math.ceil(m * hi)) + 1
    # Lower cut: kl is decreasing on [0, 1] from 1 to 0.
    if target >= 1.0:
        l_lo = 0
    else:
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if _poisson_kl(mid) >= target:
                lo = mid
            else:
                hi = mid
        l_lo = max(0, int(math.floor(m * lo)) - 1)
    return max(1, l_lo), l_hi


def _length_log_pmf(law, m):
    """Support (l >= 1) and log pmf of the length law at mean m."""
    if law.kind == "deterministic":
        return np.array([float(m)]), np.array([0.0])
    if law.kind == "poisson":
        l_lo, l_hi = _poisson_support(m)
        ls = np.arange(l_lo, l_hi + 1, dtype=float)
        lgam = np.array([math.lgamma(v + 1.0) for v in ls])
        return ls, ls * math.log(m) - m - lgam
    n = 2 * int(m)
    ls = np.arange(1, n + 1, dtype=float)
    lg_n = math.lgamma(n + 1.0)
    lgam_k = np.array([math.lgamma(v + 1.0) for v in ls])
    lgam_nk = np.array([math.lgamma(n - v + 1.0) for v in ls])
    return ls, lg_n - lgam_k - lgam_nk - n * _LOG2
