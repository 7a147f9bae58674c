"""
Markovian noise channels: cavity leakage, thermal pumping, atomic decay and dephasing.
"""

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from operators.hilbert import (
    ATOM_A,
    ATOM_B,
    CAV_A,
    CAV_B,
    HilbertSpace,
    Operator,
    embed,
    fock_destroy,
    qubit_ops,
)


@dataclass(frozen=True)
class NoiseRates:
    """
    Decay and dephasing rates of both pairs plus the shared thermal photon number.
    """

    kappa_a: float = 0.0
    kappa_b: float = 0.0
    gamma_a: float = 0.0
    gamma_b: float = 0.0
    gamma_phi_a: float = 0.0
    gamma_phi_b: float = 0.0
    n_th: float = 0.0

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if value < 0:
                raise ValueError(f"Noise rate {name} must be >= 0, got {value}")

    @classmethod
    def symmetric(cls, kappa: float = 0.0, gamma: float = 0.0, gamma_phi: float = 0.0,
                  n_th: float = 0.0) -> "NoiseRates":
        """Same rates for both pairs (kappa_A = kappa_B etc.)."""
        return cls(kappa, kappa, gamma, gamma, gamma_phi, gamma_phi, n_th)

    def for_side(self, side: str) -> Tuple[float, float, float]:
        """(kappa, gamma, gamma_phi) of pair ``side``."""
        if side.lower() == "a":
            return self.kappa_a, self.gamma_a, self.gamma_phi_a
        return self.kappa_b, self.gamma_b, self.gamma_phi_b

    @property
    def is_clean(self) -> bool:
        return all(value == 0 for value in self.__dict__.values())

    @property
    def is_thermal(self) -> bool:
        return self.n_th > 0 and (self.kappa_a > 0 or self.kappa_b > 0)


@dataclass(frozen=True, eq=False)
class CollapseTerm:
    """One dissipation channel C = sqrt(rate) A, with A acting on a single factor."""

    operator: Operator
    rate: float
    site: str
    label: str = ""
    collapse: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"Collapse rate must be >= 0, got {self.rate}")
        c = np.sqrt(self.rate) * self.operator.data
        c.flags.writeable = False
        object.__setattr__(self, "collapse", c)


_PAIR_SITES = (("a", ATOM_A, CAV_A), ("b", ATOM_B, CAV_B))


def collapse_catalog(rates: NoiseRates, space: HilbertSpace) -> List[CollapseTerm]:
    """
    Collapse operators for every pair present in ``space``.

    Per cavity: (a, kappa (1 + n_th)) and (a^dag, kappa n_th).
    Per atom:   (s-, gamma) and (s3, gamma_phi).
    Zero-rate channels are omitted.
    """
    _, sigma_minus, sigma_3 = qubit_ops()
    terms = []

    for side, atom, cavity in _PAIR_SITES:
        if atom not in space.labels or cavity not in space.labels:
            continue
        kappa, gamma, gamma_phi = rates.for_side(side)
        a = embed(fock_destroy(space.dim_of(cavity)), cavity, space)

        channels = [
            (a, kappa * (1.0 + rates.n_th), cavity, f"leak_{side}"),
            (a.dag(), kappa * rates.n_th, cavity, f"thermal_{side}"),
            (embed(sigma_minus, atom, space), gamma, atom, f"decay_{side}"),
            (embed(sigma_3, atom, space), gamma_phi, atom, f"dephase_{side}"),
        ]
        terms.extend(
            CollapseTerm(op, rate, site, label)
            for op, rate, site, label in channels
            if rate > 0
        )

    return terms
