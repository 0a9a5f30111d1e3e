"""Energy and length laws: exact cumulant generating functions and samplers.

The energy laws are centred and cover the qualitatively different cgf
domains: Gaussian (cgf finite everywhere, unbounded support), Rademacher
(finite everywhere, bounded support), and a centred unit-rate exponential
whose cgf blows up at t = 1.  The length laws are integer-valued families
with mean m whose cgf scales as m * chi(t): a deterministic length,
Poisson, and Binomial(2m, 1/2).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_LOG2 = math.log(2.0)

ENERGY_KINDS = ("gaussian", "rademacher", "shifted_exponential")
LENGTH_KINDS = ("deterministic", "poisson", "symmetric_binomial")


@dataclass(frozen=True)
class EnergyLaw:
    """A centred i.i.d. energy term with a closed-form cgf.

    Closed forms: gaussian t^2/2; rademacher log cosh t;
    shifted_exponential -t - log(1 - t) on [0, 1).
    """

    kind: str

    def __post_init__(self):
        if self.kind not in ENERGY_KINDS:
            raise DomainError(
                f"unknown energy law {self.kind!r}; expected one of {ENERGY_KINDS}")

    @property
    def cgf_domain_sup(self):
        """Supremum of t with log E exp(t * eta) finite."""
        return 1.0 if self.kind == "shifted_exponential" else math.inf

    @property
    def ess_sup(self):
        """Essential supremum of the law (domain edge of its conjugate)."""
        return 1.0 if self.kind == "rademacher" else math.inf

    def _cgf(self, t):
        # No domain checks; internal optimizers stay inside [0, cgf_domain_sup).
        # Accepts scalars or arrays.
        if self.kind == "gaussian":
            return 0.5 * t * t
        if self.kind == "rademacher":
            # log cosh t, stable for large t
            return t + np.log1p(np.exp(-2.0 * t)) - _LOG2
        return -t - np.log1p(-t)

    def cgf(self, t):
        return energy_cgf(self, t)

    def sample(self, rng, size=None):
        """Exact draw(s): a float for size=None, else a float ndarray."""
        if self.kind == "gaussian":
            out = rng.standard_normal(size)
        elif self.kind == "rademacher":
            out = 2.0 * rng.integers(0, 2, size=size) - 1.0
        else:
            out = rng.standard_exponential(size) - 1.0
        return float(out) if size is None else out


@dataclass(frozen=True)
class LengthLaw:
    """An integer length family with mean m and scaling cgf m * chi(t).

    Closed forms: deterministic chi(t) = t; poisson chi(t) = e^t - 1;
    symmetric_binomial chi(t) = 2 log((1 + e^t)/2).  For the first two
    the scaling is exact for every m; for symmetric_binomial it is exact
    as well since E exp(t * lambda) = ((1 + e^t)/2)^(2m).
    """

    kind: str

    def __post_init__(self):
        if self.kind not in LENGTH_KINDS:
            raise DomainError(
                f"unknown length law {self.kind!r}; expected one of {LENGTH_KINDS}")

    @property
    def scaled_sup(self):
        """Supremum of lambda/m over the support (domain edge of psi)."""
        if self.kind == "deterministic":
            return 1.0
        if self.kind == "poisson":
            return math.inf
        return 2.0

    def _chi(self, t):
        # Stable for large t; accepts scalars or arrays.
        if self.kind == "deterministic":
            return np.asarray(t, dtype=float) if np.ndim(t) else float(t)
        if self.kind == "poisson":
            return np.expm1(t)
        return 2.0 * (t + np.log1p(np.exp(-t)) - _LOG2)

    def chi(self, t):
        return length_chi(self, t)

    def validate_mean(self, m):
        if m < 1:
            raise DomainError(f"mean length m must be >= 1, got {m}")
        if self.kind in ("deterministic", "symmetric_binomial") and not float(m).is_integer():
            raise DomainError(f"{self.kind} requires integer m, got {m}")

    def sample(self, m, rng, size=None):
        """Exact draw(s) of the length at mean m; int for size=None."""
        self.validate_mean(m)
        if self.kind == "deterministic":
            out = int(m) if size is None else np.full(size, int(m), dtype=np.int64)
        elif self.kind == "poisson":
            out = rng.poisson(m, size)
        else:
            out = rng.binomial(2 * int(m), 0.5, size)
        return int(out) if size is None else out


def energy_cgf(law, t):
    """log E exp(t * eta), exact closed form, for 0 <= t < law.cgf_domain_sup."""
    if t < 0:
        raise DomainError(f"energy cgf requires t >= 0, got {t}")
    if t >= law.cgf_domain_sup:
        raise DomainError(
            f"t={t} outside the cgf domain [0, {law.cgf_domain_sup}) of {law.kind}")
    return float(law._cgf(t))


def length_chi(law, t):
    """The scaling cgf chi(t), exact closed form, for t >= 0."""
    if t < 0:
        raise DomainError(f"length chi requires t >= 0, got {t}")
    return float(law._chi(t))


def sample_energy(law, rng):
    """One exact energy draw from the given stream."""
    return law.sample(rng)


def sample_length(law, m, rng):
    """One exact length draw at mean m from the given stream."""
    return law.sample(m, rng)


def energy_law(tag):
    """Look up an energy law by its config-file tag."""
    return EnergyLaw(tag)


def length_law(tag):
    """Look up a length law by its config-file tag."""
    return LengthLaw(tag)
