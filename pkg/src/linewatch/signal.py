"""Segmented linear signals and synthetic stream generation.

A signal is two line pieces meeting (or jumping) at a change location
``tau`` given as a fraction of the horizon.  Observation ``i`` of ``n``
samples the signal at abscissa ``i/n`` plus noise.  The change is a
*jump* when the intercepts differ, a *kink* when only the slopes do.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

__all__ = [
    "ChangeKind",
    "ChangeSpace",
    "NoiseSpec",
    "SignalParams",
    "SyntheticSeries",
    "change_index",
    "classify_change",
    "eval_signal",
    "eval_signal_array",
    "generate_series",
    "replication_seed",
]


class ChangeKind(enum.Enum):
    JUMP = "jump"
    KINK = "kink"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SignalParams:
    """Parameters of a two-piece linear signal.

    tau is the change location as a fraction of the horizon, in (0, 1).
    ``alpha_minus``/``alpha_plus`` are the intercepts of the two pieces
    *at tau*; ``beta_minus``/``beta_plus`` the slopes per unit of
    fractional time.  A slope of ``s`` per observation on a horizon of
    ``n`` corresponds to ``beta = s * n`` here.
    """

    tau: float
    alpha_minus: float
    alpha_plus: float
    beta_minus: float
    beta_plus: float

    def __post_init__(self) -> None:
        if not (0.0 < self.tau < 1.0):
            raise ValueError(f"tau must lie in (0, 1), got {self.tau}")
        for name in ("alpha_minus", "alpha_plus", "beta_minus", "beta_plus"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")

    @property
    def jump_size(self) -> float:
        return abs(self.alpha_plus - self.alpha_minus)

    @property
    def kink_size(self) -> float:
        return abs(self.beta_plus - self.beta_minus)

    def in_space(self, space: "ChangeSpace") -> bool:
        """Membership in the detectable-change parameter space."""
        d0 = space.delta0
        if not (d0 <= self.tau <= 1.0 - d0):
            return False
        return max(self.jump_size, self.kink_size) >= d0


@dataclass(frozen=True)
class ChangeSpace:
    """Minimum detectable change magnitude delta0, in (0, 1/2)."""

    delta0: float

    def __post_init__(self) -> None:
        if not (0.0 < self.delta0 < 0.5):
            raise ValueError(f"delta0 must lie in (0, 1/2), got {self.delta0}")


@dataclass(frozen=True)
class NoiseSpec:
    """Observation noise: 'gaussian' with scale sigma, or 'student_t' with df.

    Student-t draws are raw (not rescaled to unit variance); the
    standardization workflow downstream divides by the historical
    standard deviation instead.  sigma = 0 is allowed and yields a
    noiseless stream.
    """

    kind: str = "gaussian"
    sigma: float = 1.0
    df: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in ("gaussian", "student_t"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "gaussian":
            if not (math.isfinite(self.sigma) and self.sigma >= 0.0):
                raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")
        else:
            if self.df is None or not math.isfinite(self.df) or self.df <= 0.0:
                raise ValueError(
                    f"student_t noise needs finite df > 0, got {self.df}"
                )

    def draw(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "gaussian":
            if self.sigma == 0.0:
                return np.zeros(size)
            return self.sigma * rng.standard_normal(size)
        return rng.standard_t(self.df, size)


@dataclass(frozen=True)
class SyntheticSeries:
    """A generated stream together with the truth that produced it."""

    values: np.ndarray
    n: int
    truth: SignalParams
    seed: int

    def __post_init__(self) -> None:
        if len(self.values) != self.n:
            raise ValueError("values length must equal n")


def eval_signal(theta: SignalParams, i: int, n: int) -> float:
    """Signal value at observation ``i`` of horizon ``n`` (1-based).

    The boundary point i/n == tau takes the pre-change branch.
    """
    if n < 1:
        raise ValueError(f"horizon n must be >= 1, got {n}")
    if not (1 <= i <= n):
        raise ValueError(f"index i must lie in [1, {n}], got {i}")
    t = i / n
    if t <= theta.tau:
        return theta.beta_minus * (t - theta.tau) + theta.alpha_minus
    return theta.beta_plus * (t - theta.tau) + theta.alpha_plus


def eval_signal_array(theta: SignalParams, n: int) -> np.ndarray:
    """Vector of signal values at i = 1..n."""
    if n < 1:
        raise ValueError(f"horizon n must be >= 1, got {n}")
    t = np.arange(1, n + 1) / n
    pre = theta.beta_minus * (t - theta.tau) + theta.alpha_minus
    post = theta.beta_plus * (t - theta.tau) + theta.alpha_plus
    return np.where(t <= theta.tau, pre, post)


def classify_change(
    theta: SignalParams, space: ChangeSpace
) -> Optional[ChangeKind]:
    """Jump if the intercepts differ by >= delta0, else kink if the
    slopes do, else None."""
    if theta.jump_size >= space.delta0:
        return ChangeKind.JUMP
    if theta.kink_size >= space.delta0:
        return ChangeKind.KINK
    return None


def change_index(theta: SignalParams, n: int) -> int:
    """Last pre-change observation index, ceil(n * tau).

    A small slack guards against n * tau landing one ulp above an
    intended integer (tau is typically constructed as c / n).
    """
    return int(math.ceil(n * theta.tau - 1e-9))


def replication_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    """Deterministic per-replication seed derivation.

    Replication ``index`` under ``master_seed`` always draws from
    ``default_rng(SeedSequence([master_seed, index]))``; experiment
    reports record the master seed so runs are repeatable.
    """
    return np.random.SeedSequence([master_seed, index])


def generate_series(
    theta: SignalParams,
    n: int,
    noise: NoiseSpec,
    seed: Union[int, np.random.SeedSequence],
) -> SyntheticSeries:
    """Sample X_i = signal(i/n) + noise, i = 1..n, deterministically."""
    if n < 1:
        raise ValueError(f"horizon n must be >= 1, got {n}")
    if isinstance(seed, np.random.SeedSequence):
        seq = seed
        seed_label = int(seq.entropy[0]) if isinstance(seq.entropy, list) else -1
    else:
        seq = np.random.SeedSequence(seed)
        seed_label = int(seed)
    rng = np.random.default_rng(seq)
    values = eval_signal_array(theta, n) + noise.draw(rng, n)
    return SyntheticSeries(values=values, n=n, truth=theta, seed=seed_label)
