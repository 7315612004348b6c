"""Input sequences, structured regressor assembly, and noise/outlier sampling.

All sampling goes through numpy's PCG64 ``Generator`` seeded from a
``SeedSequence``.  Sub-streams are derived by mixing integer tags into the
seed material (``SeedSequence([seed, *tags])``), so the input, noise and
outlier draws of one trial are statistically independent streams: changing
the noise spec never perturbs the input sequence or the outlier support.
Gaussian variates use numpy's ziggurat rejection sampler
(``Generator.standard_normal``), gamma variates the Marsaglia-Tsang
rejection scheme (``Generator.standard_gamma``), exponential variates the
ziggurat sampler (``Generator.standard_exponential``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, SpecError

__all__ = [
    "InputDist",
    "InputSequence",
    "RegressorMatrix",
    "NoiseSpec",
    "Magnitude",
    "OutlierSpec",
    "derive_seed",
    "rng_from_seed",
    "sample_input",
    "build_regressor",
    "sample_noise",
    "sample_outliers",
]


def derive_seed(seed: int, *tags: int) -> int:
    """Mix integer tags into ``seed`` and return a fresh 64-bit sub-seed."""
    ss = np.random.SeedSequence([int(seed), *[int(t) for t in tags]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def rng_from_seed(seed: int) -> np.random.Generator:
    """PCG64 generator initialized from one integer seed."""
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


_rng = rng_from_seed


# ---------------------------------------------------------------------------
# input sequences and the regressor matrix
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InputDist:
    """Input sample distribution: ``gaussian`` (scale sigma) or ``bernoulli_pm1``."""

    kind: str
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "bernoulli_pm1"):
            raise SpecError(f"unknown input distribution {self.kind!r}")
        if self.kind == "gaussian" and not self.sigma > 0:
            raise SpecError("gaussian input requires sigma > 0")

    @classmethod
    def gaussian(cls, sigma: float = 1.0) -> "InputDist":
        return cls("gaussian", float(sigma))

    @classmethod
    def bernoulli_pm1(cls) -> "InputDist":
        return cls("bernoulli_pm1")


@dataclass(frozen=True)
class InputSequence:
    """The n+m-1 scalar input samples backing one regressor matrix.

    ``values[p]`` holds the sample with logical index ``p - m + 2`` for
    ``p = 0 .. n+m-2``; i.e. ``values[0]`` is the earliest sample and
    ``values[-1]`` the latest.
    """

    values: np.ndarray
    dist: InputDist
    seed: int
    n: int
    m: int

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class RegressorMatrix:
    """n-by-m regressor built from one input sequence.

    Entry (i, j) equals the input sample with logical index i+j-m
    (1-based i, j), so the matrix is constant along anti-diagonals and
    depends on exactly n+m-1 distinct scalars.
    """

    entries: np.ndarray
    n: int
    m: int

    @property
    def shape(self) -> tuple:
        return (self.n, self.m)


def sample_input(dist: InputDist, n: int, m: int, seed: int) -> InputSequence:
    """Draw the n+m-1 i.i.d. input samples for an n-by-m regressor."""
    if m < 1 or n < m:
        raise DimensionError(f"need n >= m >= 1, got n={n}, m={m}")
    rng = _rng(seed)
    size = n + m - 1
    if dist.kind == "gaussian":
        values = dist.sigma * rng.standard_normal(size)
    else:
        values = rng.integers(0, 2, size=size).astype(float) * 2.0 - 1.0
    values.flags.writeable = False
    return InputSequence(values=values, dist=dist, seed=int(seed), n=int(n), m=int(m))


def build_regressor(h, n: int, m: int) -> RegressorMatrix:
    """Assemble the regressor matrix from an input sequence.

    Accepts an :class:`InputSequence` or a plain length n+m-1 vector.  Row 1
    reads the m earliest samples, row n the m latest; consecutive rows shift
    the window by one.  Degenerate shapes with n < m are permitted here (a
    single-row matrix is still well formed); the estimators enforce n >= m.
    """
    if m < 1 or n < 1:
        raise DimensionError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
    values = h.values if isinstance(h, InputSequence) else np.asarray(h, dtype=float)
    if values.ndim != 1 or len(values) != n + m - 1:
        raise DimensionError(
            f"input sequence has length {values.shape}, expected {n + m - 1}"
        )
    entries = scipy.linalg.hankel(values[:n], values[n - 1:])
    entries.flags.writeable = False
    return RegressorMatrix(entries=entries, n=int(n), m=int(m))


# ---------------------------------------------------------------------------
# noise
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseSpec:
    """Additive observation-noise model.

    The three unit-energy presets used by the built-in experiments are
    ``gaussian(1)``, ``gamma(2, 1/sqrt(6))`` and ``exponential(sqrt(2)/2)``;
    each has E[w^2] = 1.  Gamma and exponential draws are taken raw (not
    re-centered), so those noises are nonnegative.
    """

    kind: str
    sigma: float = 0.0
    shape: float = 0.0
    scale: float = 0.0
    mean: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian", "gamma", "exponential"):
            raise SpecError(f"unknown noise kind {self.kind!r}")
        if self.kind == "gaussian" and not self.sigma > 0:
            raise SpecError("gaussian noise requires sigma > 0")
        if self.kind == "gamma" and not (self.shape > 0 and self.scale > 0):
            raise SpecError("gamma noise requires shape > 0 and scale > 0")
        if self.kind == "exponential" and not self.mean > 0:
            raise SpecError("exponential noise requires mean > 0")

    @classmethod
    def none(cls) -> "NoiseSpec":
        return cls("none")

    @classmethod
    def gaussian(cls, sigma: float, seed: int = 0) -> "NoiseSpec":
        return cls("gaussian", sigma=float(sigma), seed=int(seed))

    @classmethod
    def gamma(cls, shape: float, scale: float, seed: int = 0) -> "NoiseSpec":
        return cls("gamma", shape=float(shape), scale=float(scale), seed=int(seed))

    @classmethod
    def exponential(cls, mean: float, seed: int = 0) -> "NoiseSpec":
        return cls("exponential", mean=float(mean), seed=int(seed))


def sample_noise(spec: NoiseSpec, n: int) -> np.ndarray:
    """Draw n i.i.d. noise samples according to ``spec``."""
    if n < 0:
        raise DimensionError(f"need n >= 0, got {n}")
    if spec.kind == "none":
        return np.zeros(n)
    rng = _rng(spec.seed)
    if spec.kind == "gaussian":
        return spec.sigma * rng.standard_normal(n)
    if spec.kind == "gamma":
        return spec.scale * rng.standard_gamma(spec.shape, size=n)
    return spec.mean * rng.standard_exponential(n)


# ---------------------------------------------------------------------------
# outliers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Magnitude:
    """Gaussian magnitude model for nonzero outlier entries."""

    mean: float
    sd: float

    def __post_init__(self):
        if not self.sd > 0:
            raise SpecError("outlier magnitude requires sd > 0")


@dataclass(frozen=True)
class OutlierSpec:
    """Sparse gross-error model: a count model plus a magnitude model.

    ``fixed(k)`` puts exactly k outliers; ``uniform_fraction(f)`` draws the
    count as round(U * f * n) with U uniform on [0, 1] (round half up), so
    the average corrupted fraction is f/2.  The support is a uniform random
    k-subset of the rows.
    """

    count_model: str
    k: int = 0
    max_fraction: float = 0.0
    magnitude: Magnitude = Magnitude(100.0, 50.0)
    seed: int = 0

    def __post_init__(self):
        if self.count_model not in ("fixed", "uniform_fraction"):
            raise SpecError(f"unknown count model {self.count_model!r}")
        if self.count_model == "fixed" and self.k < 0:
            raise SpecError("fixed outlier count must be >= 0")
        if self.count_model == "uniform_fraction" and not 0 <= self.max_fraction <= 1:
            raise SpecError("max_fraction must lie in [0, 1]")

    @classmethod
    def fixed(cls, k: int, magnitude: Magnitude = Magnitude(100.0, 50.0),
              seed: int = 0) -> "OutlierSpec":
        return cls("fixed", k=int(k), magnitude=magnitude, seed=int(seed))

    @classmethod
    def uniform_fraction(cls, max_fraction: float,
                         magnitude: Magnitude = Magnitude(100.0, 50.0),
                         seed: int = 0) -> "OutlierSpec":
        return cls("uniform_fraction", max_fraction=float(max_fraction),
                   magnitude=magnitude, seed=int(seed))


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def sample_outliers(spec: OutlierSpec, n: int) -> np.ndarray:
    """Draw a length-n outlier vector: k nonzeros at distinct random rows.

    Draw order is count, support, magnitudes, so the realized support does
    not depend on the magnitude parameters.
    """
    if n < 0:
        raise DimensionError(f"need n >= 0, got {n}")
    rng = _rng(spec.seed)
    if spec.count_model == "fixed":
        k = spec.k
    else:
        k = _round_half_up(rng.uniform() * spec.max_fraction * n)
    if k > n:
        raise SpecError(f"outlier count {k} exceeds n={n}")
    e = np.zeros(n)
    if k > 0:
        support = rng.choice(n, size=k, replace=False)
        e[support] = rng.normal(spec.magnitude.mean, spec.magnitude.sd, size=k)
    return e
