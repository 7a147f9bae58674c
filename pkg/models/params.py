"""
Physical parameter sets of the double JC family.

All frequencies, couplings and rates are in units of the reference coupling G_B (ħ = 1).
"""

import math
from dataclasses import dataclass, replace
from enum import Enum

FRAMES = ("lab", "rotating")


class ParameterError(ValueError):
    """Raised for physically inadmissible parameter values."""
    pass


class StateCase(str, Enum):
    """Initial two-atom superposition families."""
    NO_SUDDEN_DEATH = "no_sudden_death"   # sin a |l_A e_B> + cos a |e_A l_B>
    SUDDEN_DEATH = "sudden_death"         # sin a |l_A l_B> + cos a |e_A e_B>


@dataclass(frozen=True)
class ModelParams:
    """
    Atomic/cavity frequencies, couplings and multiphoton order.

    Couplings are not sign-checked here: disorder realizations may push (1 + delta)
    below zero. Scenario-level bounds live in ``validate``.
    """

    omega0: float = 1.0
    omega: float = 1.0
    g_a: float = 1.0
    g_b: float = 1.0
    n_photon: int = 1
    frame: str = "lab"

    def __post_init__(self):
        if int(self.n_photon) != self.n_photon or self.n_photon < 1:
            raise ParameterError(f"n_photon must be an integer >= 1, got {self.n_photon}")
        if self.frame not in FRAMES:
            raise ParameterError(f"frame must be one of {FRAMES}, got {self.frame!r}")

    def validate(self) -> bool:
        """Reference-scale rules for clean scenarios: G_B > 0, G_A >= 0."""
        if not self.g_b > 0:
            raise ParameterError(f"g_b is the reference scale and must be > 0, got {self.g_b}")
        if self.g_a < 0:
            raise ParameterError(f"g_a must be >= 0, got {self.g_a}")
        return True

    @property
    def detuning(self) -> float:
        """omega0 - N omega; zero at the (multiphoton) resonance."""
        return self.omega0 - self.n_photon * self.omega

    @property
    def is_linear_resonant(self) -> bool:
        return math.isclose(self.omega0, self.omega, rel_tol=1e-12, abs_tol=1e-12)

    @property
    def is_multiphoton_resonant(self) -> bool:
        return math.isclose(self.detuning, 0.0, abs_tol=1e-12)

    def coupling(self, side: str) -> float:
        return self.g_a if side.lower() == "a" else self.g_b


@dataclass(frozen=True)
class DriveParams:
    """
    Constant-amplitude nonlinear pump acting on both cavities.

    ``delta_p`` is the pump detuning omega - omega_P. With ``resonant`` set the
    detuning is derived from the resonance rule by ``resolve_drive``.
    """

    epsilon: float = 0.0
    chi: float = 0.0
    m_order: int = 1
    delta_p: float = 0.0
    resonant: bool = False
    resonance_sign: int = 1

    def __post_init__(self):
        if self.epsilon < 0:
            raise ParameterError(f"drive epsilon must be >= 0, got {self.epsilon}")
        if int(self.m_order) != self.m_order or self.m_order < 1:
            raise ParameterError(f"m_order must be an integer >= 1, got {self.m_order}")
        if self.resonance_sign not in (1, -1):
            raise ParameterError(f"resonance_sign must be +1 or -1, got {self.resonance_sign}")


@dataclass(frozen=True)
class InitialStateSpec:
    """Superposition angle and family of the initial two-atom state (cavities in vacuum)."""

    alpha: float = math.pi / 6
    case: StateCase = StateCase.NO_SUDDEN_DEATH

    def __post_init__(self):
        object.__setattr__(self, "case", StateCase(self.case))


def resonant_pump_detuning(model: ModelParams, drive: DriveParams) -> float:
    """
    Pump detuning that puts the driven model on resonance.

    For M < N the pump sits on the cavity frequency (Delta_P = 0). For M = N the
    pump frequency obeys N omega_P = N omega +/- g sqrt(N!), with g the nominal G_B.

    Raises:
        ParameterError: For M > N, where no resonance rule exists
    """
    n, m = model.n_photon, drive.m_order
    if m < n:
        return 0.0
    if m == n:
        return -drive.resonance_sign * model.g_b * math.sqrt(math.factorial(n)) / n
    raise ParameterError(f"No resonance rule for pump order M={m} > multiphoton order N={n}")


def resolve_drive(model: ModelParams, drive: DriveParams) -> DriveParams:
    """Fill in ``delta_p`` from the resonance rule when the drive is marked resonant."""
    if not drive.resonant:
        return drive
    return replace(drive, delta_p=resonant_pump_detuning(model, drive))
