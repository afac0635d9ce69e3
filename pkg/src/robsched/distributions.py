"""Processing-time laws and the two-moment Gaussian calculus.

Four duration families are supported: ``normal``, ``lognormal``,
``exponential`` and ``deterministic``.  Each is parameterized by its mean
and coefficient of variation so that swapping the family never changes the
first two moments of a job's duration.  ``gaussian_max`` implements the
classic two-moment approximation of max(A, B) for independent Gaussians,
which is the workhorse behind the probabilistic robustness measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

KINDS = ("normal", "lognormal", "exponential", "deterministic")

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# resampling cap for the truncated normal; after that the draw degrades to 0
_TRUNC_ATTEMPTS = 100


@dataclass(frozen=True)
class DistributionSpec:
    """Duration law of a single job.

    ``cv`` is ignored for the exponential kind (always 1) and the
    deterministic kind (always 0); the stored value is normalized so two
    specs describing the same law compare equal.
    """

    kind: str
    mean: float
    cv: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distribution kind: {self.kind!r}")
        if not self.mean > 0.0:
            raise ValueError("distribution mean must be positive")
        if self.cv < 0.0:
            raise ValueError("coefficient of variation must be nonnegative")
        if self.kind == "exponential":
            object.__setattr__(self, "cv", 1.0)
        elif self.kind == "deterministic":
            object.__setattr__(self, "cv", 0.0)

    @property
    def std(self) -> float:
        return self.mean * self.cv

    @property
    def var(self) -> float:
        return self.std ** 2

    def with_mean(self, mean: float) -> "DistributionSpec":
        return DistributionSpec(self.kind, float(mean), self.cv)

    def to_json(self) -> dict:
        return {"kind": self.kind, "mean": self.mean, "cv": self.cv}

    @staticmethod
    def from_json(obj: dict) -> "DistributionSpec":
        return DistributionSpec(str(obj["kind"]), float(obj["mean"]), float(obj.get("cv", 0.0)))


def _lognormal_params(dist: DistributionSpec) -> tuple[float, float]:
    # moment matching: the returned variate has mean `mean` and cv `cv`
    var_log = math.log1p(dist.cv ** 2)
    mu_log = math.log(dist.mean) - 0.5 * var_log
    return mu_log, math.sqrt(var_log)


def sample(dist: DistributionSpec, rng: np.random.Generator, size: int | None = None):
    """Draw durations from ``dist`` using the given generator.

    Normal draws are truncated at zero by rejection; after 100 failed
    attempts for an entry the draw degrades to 0.  Scalar when ``size`` is
    None, else an array of the given length.
    """
    scalar = size is None
    n = 1 if scalar else int(size)
    if dist.kind == "deterministic":
        out = np.full(n, dist.mean)
    elif dist.kind == "exponential":
        out = rng.exponential(dist.mean, size=n)
    elif dist.kind == "lognormal":
        mu_log, sd_log = _lognormal_params(dist)
        out = rng.lognormal(mu_log, sd_log, size=n)
    else:
        out = rng.normal(dist.mean, dist.std, size=n)
        bad = out <= 0.0
        attempts = 1
        while bad.any() and attempts < _TRUNC_ATTEMPTS:
            out[bad] = rng.normal(dist.mean, dist.std, size=int(bad.sum()))
            bad = out <= 0.0
            attempts += 1
        out[bad] = 0.0
    return float(out[0]) if scalar else out


def quantile(dist: DistributionSpec, q: float) -> float:
    """Inverse CDF of the nominal (untruncated) law at ``q`` in (0, 1)."""
    if not 0.0 < q < 1.0:
        raise ValueError("quantile level must lie strictly between 0 and 1")
    if dist.kind == "deterministic":
        return dist.mean
    if dist.kind == "exponential":
        return -dist.mean * math.log1p(-q)
    if dist.kind == "lognormal":
        mu_log, sd_log = _lognormal_params(dist)
        return math.exp(mu_log + sd_log * float(ndtri(q)))
    return dist.mean + dist.std * float(ndtri(q))


def lambda_factor(dist: DistributionSpec, q: float = 0.7) -> float:
    """Relative overrun budget: (q-quantile - mean) / mean, floored at 0."""
    return max((quantile(dist, q) - dist.mean) / dist.mean, 0.0)


def mad_factor(dist: DistributionSpec) -> float:
    """Mean absolute deviation around the mean, divided by the mean."""
    if dist.kind == "deterministic":
        return 0.0
    if dist.kind == "exponential":
        return 2.0 / math.e
    if dist.kind == "normal":
        return dist.cv * math.sqrt(2.0 / math.pi)
    # lognormal: E|X - m| = 2 m (2 Phi(sd_log / 2) - 1)
    _, sd_log = _lognormal_params(dist)
    return 2.0 * (2.0 * _std_normal_cdf(0.5 * sd_log) - 1.0)


def _std_normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / _SQRT2))


def _std_normal_pdf(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


@dataclass(frozen=True)
class GaussianMoment:
    """First two moments (mean, variance) of a scalar random quantity."""

    mu: float
    var: float

    def __post_init__(self):
        if self.var < 0.0:
            raise ValueError("variance must be nonnegative")


def gaussian_max(a: GaussianMoment, b: GaussianMoment) -> GaussianMoment:
    """Two-moment approximation of max(A, B) for independent Gaussians.

    When both inputs are degenerate the exact maximum is returned with
    variance 0.
    """
    theta2 = a.var + b.var
    if theta2 <= 0.0:
        return GaussianMoment(max(a.mu, b.mu), 0.0)
    theta = math.sqrt(theta2)
    alpha = (a.mu - b.mu) / theta
    cdf = _std_normal_cdf(alpha)
    pdf = _std_normal_pdf(alpha)
    mean = a.mu * cdf + b.mu * (1.0 - cdf) + theta * pdf
    second = (
        (a.mu * a.mu + a.var) * cdf
        + (b.mu * b.mu + b.var) * (1.0 - cdf)
        + (a.mu + b.mu) * theta * pdf
    )
    return GaussianMoment(mean, max(second - mean * mean, 0.0))


def gaussian_cdf_at(g: GaussianMoment, t: float) -> float:
    """P(G <= t) treating ``g`` as Gaussian; a step function when var = 0."""
    if g.var <= 0.0:
        return 1.0 if g.mu <= t else 0.0
    return float(ndtr((t - g.mu) / math.sqrt(g.var)))
