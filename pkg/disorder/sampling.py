"""
Glassy coupling disorder: G_j -> G_j (1 + delta_j) with delta_j drawn once per realization.

Realization i draws from its own stream derived from (seed, i), so the drawn
values do not depend on scheduling or worker count.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from config import DEFAULT_SEED

MAX_SEED = 2 ** 64


class DisorderError(ValueError):
    """Raised for inadmissible disorder settings or sampling without a distribution."""
    pass


class DisorderKind(str, Enum):
    NONE = "none"
    GAUSSIAN = "gaussian"   # zero mean, standard deviation s
    UNIFORM = "uniform"     # uniform on [-s/2, s/2]


@dataclass(frozen=True)
class DisorderSpec:
    """Distribution, width and sampling plan of the coupling disorder."""

    kind: DisorderKind = DisorderKind.NONE
    s: float = 0.0
    n_realizations: int = 1
    seed: int = DEFAULT_SEED
    per_cavity_independent: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", DisorderKind(self.kind))
        if self.s < 0:
            raise DisorderError(f"Disorder width s must be >= 0, got {self.s}")
        if int(self.n_realizations) != self.n_realizations or self.n_realizations < 1:
            raise DisorderError(f"n_realizations must be an integer >= 1, got {self.n_realizations}")
        if not 0 <= int(self.seed) < MAX_SEED:
            raise DisorderError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def is_active(self) -> bool:
        return self.kind is not DisorderKind.NONE


def realization_rng(seed: int, index: int) -> np.random.Generator:
    """Independent random stream of realization ``index``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


def sample_delta(spec: DisorderSpec, stream: np.random.Generator) -> float:
    """
    Draw one relative coupling deviation.

    Raises:
        DisorderError: If the disorder kind is none
    """
    if spec.kind is DisorderKind.NONE:
        raise DisorderError("Cannot sample disorder of kind 'none'")
    if spec.s == 0:
        return 0.0
    if spec.kind is DisorderKind.GAUSSIAN:
        return float(stream.normal(0.0, spec.s))
    return float(stream.uniform(-0.5 * spec.s, 0.5 * spec.s))


def draw_deltas(spec: DisorderSpec, index: int) -> Tuple[float, float]:
    """(delta_A, delta_B) of realization ``index``; equal when draws are correlated."""
    stream = realization_rng(spec.seed, index)
    delta_a = sample_delta(spec, stream)
    delta_b = sample_delta(spec, stream) if spec.per_cavity_independent else delta_a
    return delta_a, delta_b


def draw_all(spec: DisorderSpec) -> np.ndarray:
    """Deltas of every realization, shape (n_realizations, 2)."""
    return np.array([draw_deltas(spec, i) for i in range(spec.n_realizations)])
