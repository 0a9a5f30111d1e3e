"""Finite-size simulation of the random-length partition sum.

A single experiment draws N = floor(exp(q m)) independent chain sums
R_i (a random length, then that many energy terms) per replica and reduces
them with a streaming log-sum-exp or a running maximum.  Replica r uses
the sub-stream (master_seed, r); within a replica, draws happen in fixed
32768-chain chunks (all lengths of a chunk, then all their energies), so
results are bit-identical for any worker-thread count.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distributions import EnergyLaw, LengthLaw
from .errors import PreconditionError
from .limits import er_gamma, growth_rate, interpolation_rate
from .rates import ConvolutionRate, EnergyConjugate, LengthConjugate, tail_rate
from .rng import substream

_CHUNK = 1 << 15
_MAX_LOG_N = 40.0


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one Monte Carlo experiment."""

    energy_law: EnergyLaw
    length_law: LengthLaw
    m: int
    q: float
    beta: float
    replicas: int
    master_seed: int
    k: int | None = None
    x_probe: float | None = None

    def __post_init__(self):
        if self.m < 1:
            raise PreconditionError(f"m must be >= 1, got {self.m}")
        self.length_law.validate_mean(self.m)
        if self.q <= 0:
            raise PreconditionError(f"q must be positive, got {self.q}")
        if self.beta < 0:
            raise PreconditionError(f"beta must be >= 0, got {self.beta}")
        if self.replicas < 1:
            raise PreconditionError(f"replicas must be >= 1, got {self.replicas}")
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise PreconditionError("master_seed must be a 64-bit unsigned integer")
        if self.k is not None and self.k < self.m:
            raise PreconditionError(f"k={self.k} must be >= m={self.m}")
        if self.x_probe is not None and self.x_probe <= 0:
            raise PreconditionError(f"x_probe must be positive, got {self.x_probe}")
        if self.q * self.m > _MAX_LOG_N:
            raise PreconditionError(
                f"q*m = {self.q * self.m:.3g} implies N beyond desk scale "
                f"(limit {_MAX_LOG_N})")

    @property
    def n_terms(self):
        """N = floor(exp(q m)), the number of chains per realization."""
        return max(1, math.floor(math.exp(self.q * self.m)))

    def rate(self):
        """The convolution rate governing this config's chain-sum deviations."""
        phi = EnergyConjugate(self.energy_law)
        psi_rate = LengthConjugate(self.length_law)
        return ConvolutionRate(psi_rate, phi)


@dataclass
class ExperimentReport:
    """Empirical estimates with uncertainty plus the matching theory value."""

    values: list
    mean: float
    std_error: float | None
    theory_value: float
    abs_error: float
    n_used: int
    wall_time: float
    extras: dict = field(default_factory=dict)

    def summary(self):
        out = {
            "replicas": len(self.values),
            "mean": self.mean,
            "std_error": self.std_error,
            "theory_value": self.theory_value,
            "abs_error": self.abs_error,
            "n_used": self.n_used,
            "wall_time": self.wall_time,
        }
        out.update(self.extras)
        return out


def _segment_sums(lengths, draws):
    """Sum consecutive segments of `draws` (lengths[i] terms each); an empty
    segment sums to exactly 0.0."""
    csum = np.concatenate(([0.0], np.cumsum(draws)))
    ends = np.cumsum(lengths)
    return csum[ends] - csum[ends - lengths]


def _chunk_draws(config, rng, n_total):
    """Yield (lengths, chain_sums) in fixed chunks from one replica stream."""
    for start in range(0, n_total, _CHUNK):
        n = min(_CHUNK, n_total - start)
        lengths = config.length_law.sample(config.m, rng, size=n)
        total = int(lengths.sum())
        draws = config.energy_law.sample(rng, size=total)
        yield lengths, _segment_sums(lengths, draws)


def sample_R(config, rng):
    """One chain sum: a length draw, then that many energy draws (0.0 if the
    length is zero)."""
    lam = config.length_law.sample(config.m, rng)
    if lam == 0:
        return 0.0
    return float(np.sum(config.energy_law.sample(rng, size=int(lam))))


def _log_mean_exp(config, rng, scale):
    """log[(1/N) sum_i exp(scale * beta * R_i)] with the streaming running-max
    recurrence; raw terms are never exponentiated unshifted."""
    n_total = config.n_terms
    coef = scale * config.beta
    running_max = -math.inf
    acc = 0.0
    for _lengths, sums in _chunk_draws(config, rng, n_total):
        a = coef * sums
        chunk_max = float(a.max())
        if chunk_max > running_max:
            acc = acc * math.exp(running_max - chunk_max) + float(np.exp(a - chunk_max).sum())
            running_max = chunk_max
        else:
            acc += float(np.exp(a - running_max).sum())
    return running_max + math.log(acc) - math.log(n_total)


def log_Z_hat(config, rng):
    """log of the normalized partition sum for one realization."""
    return _log_mean_exp(config, rng, 1.0)


def _replica_values(config, fn, threads):
    """fn(rng) once per replica on sub-stream (master_seed, r), ordered by r."""
    indices = range(config.replicas)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vals = list(pool.map(lambda r: fn(substream(config.master_seed, r)), indices))
    else:
        vals = [fn(substream(config.master_seed, r)) for r in indices]
    return [float(v) for v in vals]


def _kahan_mean(values):
    # Compensated summation keeps aggregation scheduler-independent.
    total = 0.0
    comp = 0.0
    for v in values:
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total / len(values)


def _std_error(values, mean):
    if len(values) < 2:
        return None
    ss = 0.0
    comp = 0.0
    for v in values:
        y = (v - mean) ** 2 - comp
        t = ss + y
        comp = (t - ss) - y
        ss = t
    return math.sqrt(ss / (len(values) - 1) / len(values))


def _make_report(values, theory, n_used, wall, extras=None):
    mean = _kahan_mean(values)
    return ExperimentReport(
        values=values,
        mean=mean,
        std_error=_std_error(values, mean),
        theory_value=theory,
        abs_error=abs(mean - theory),
        n_used=n_used,
        wall_time=wall,
        extras=extras or {},
    )


def run_free_energy(config, threads=1, tol=1e-9):
    """Replicated (1/m) log of the normalized partition sum against its limit."""
    if config.beta <= 0:
        raise PreconditionError("free-energy runs require beta > 0")
    t0 = time.perf_counter()
    m = config.m
    vals = _replica_values(config, lambda rng: _log_mean_exp(config, rng, 1.0) / m, threads)
    theory = growth_rate(config.rate(), config.beta, config.q, tol).growth_rate
    return _make_report(vals, theory, config.n_terms, time.perf_counter() - t0)


def run_er_max(config, threads=1, tol=1e-9):
    """Replicated max_i R_i / m against the level-set limit of the rate."""
    t0 = time.perf_counter()
    m = config.m
    n_total = config.n_terms

    def one(rng):
        best = -math.inf
        for _lengths, sums in _chunk_draws(config, rng, n_total):
            best = max(best, float(sums.max()))
        return best / m

    vals = _replica_values(config, one, threads)
    theory = er_gamma(config.rate(), config.q, tol)
    return _make_report(vals, theory, n_total, time.perf_counter() - t0)


def run_interpolation(config, threads=1, tol=1e-9):
    """Replicated (1/k) log[(1/N) sum_i exp((k/m) beta R_i)]; at k = m this
    reproduces the free-energy run bit for bit on the same seed."""
    if config.k is None:
        raise PreconditionError("run_interpolation requires config.k")
    t0 = time.perf_counter()
    k = config.k
    scale = k / config.m
    vals = _replica_values(config, lambda rng: _log_mean_exp(config, rng, scale) / k, threads)
    theory = interpolation_rate(config.rate(), config.beta, config.q, scale, tol)
    return _make_report(vals, theory, config.n_terms, time.perf_counter() - t0)


def run_tail_estimator(config, threads=1):
    """Replicated exceedance fraction mu = (1/N) #{i : lambda_i >= 1 and
    R_i >= m x}; reports the exact mean and variance targets when the energy
    law is enumerable, else the leading-order decay estimate."""
    if config.x_probe is None:
        raise PreconditionError("run_tail_estimator requires config.x_probe")
    t0 = time.perf_counter()
    x = config.x_probe
    n_total = config.n_terms
    threshold = config.m * x

    def one(rng):
        hits = 0
        for lengths, sums in _chunk_draws(config, rng, n_total):
            hits += int(((lengths >= 1) & (sums >= threshold)).sum())
        return hits / n_total

    vals = _replica_values(config, one, threads)
    phi = EnergyConjugate(config.energy_law)
    rate_theory = tail_rate(config.length_law, phi, x, config.m)
    s_exact = exact_tail_probability(config.energy_law, config.length_law, config.m, x)
    theory = s_exact if s_exact is not None else math.exp(-config.m * rate_theory)

    mean = _kahan_mean(vals)
    extras = {"rate_theory": rate_theory}
    extras["rate_empirical"] = -math.log(mean) / config.m if mean > 0 else math.inf
    if len(vals) > 1:
        extras["variance_empirical"] = float(np.var(np.asarray(vals), ddof=1))
    if s_exact is not None:
        extras["exact_tail_probability"] = s_exact
        extras["variance_theory"] = (s_exact - s_exact ** 2) / n_total
    report = _make_report(vals, theory, n_total, time.perf_counter() - t0, extras)
    return report


def exact_tail_probability(energy_law, length_law, m, x, max_len=4096):
    """P(R >= m x) by exact enumeration, or None when not enumerable.

    Only Rademacher energies are enumerable: the chain sum at length l is
    2 K - l with K ~ Binomial(l, 1/2), so the tail is an exact binomial sum
    mixed over the length distribution (l >= 1).
    """
    if energy_law.kind != "rademacher":
        return None
    s = m * x
    if length_law.kind == "deterministic":
        support = [(int(m), 1.0)]
    elif length_law.kind == "poisson":
        from .rates import _poisson_support

        l_lo, l_hi = _poisson_support(m)
        if l_hi > max_len:
            return None
        support = [(l, math.exp(l * math.log(m) - m - math.lgamma(l + 1.0)))
                   for l in range(max(1, l_lo), l_hi + 1)]
    else:
        n = 2 * int(m)
        if n > max_len:
            return None
        log_norm = -n * math.log(2.0)
        support = [(l, math.exp(math.lgamma(n + 1.0) - math.lgamma(l + 1.0)
                                - math.lgamma(n - l + 1.0) + log_norm))
                   for l in range(1, n + 1)]
    total = 0.0
    for l, weight in support:
        if l > max_len:
            return None
        # 2K - l >= s  <=>  K >= (s + l)/2; the 1e-9 slack pins exact-integer
        # thresholds to the >= side.
        k_min = math.ceil((s + l) / 2.0 - 1e-9)
        if k_min > l:
            continue
        if k_min <= 0:
            total += weight
            continue
        count = sum(math.comb(l, kk) for kk in range(k_min, l + 1))
        total += weight * (count / (1 << l))
    return total
