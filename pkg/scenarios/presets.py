"""
Named scenario presets reproducing the published figure families.

Each preset is a base document plus named variants. Noise-menu variants
(clean, kappa, gamma, dephasing, thermal) use documented default rates because
the legend values of the source figures are not recoverable.
"""

import copy
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional

import pandas as pd

from config import (
    DEFAULT_GAUSSIAN_WIDTH,
    DEFAULT_NOISE_RATE,
    DEFAULT_REALIZATIONS,
    DEFAULT_SAMPLES,
    DRIVEN_SAMPLES,
    DEFAULT_T_END,
    DEFAULT_THERMAL_NTH,
    DEFAULT_UNIFORM_WIDTH,
)
from scenarios.config import ConfigError, ScenarioConfig, apply_overrides, config_from_dict

PLACEHOLDER_NOTE = "paper value unreadable — default supplied"

NOISE_MENU: Dict[str, Dict[str, Any]] = {
    "clean": {},
    "kappa": {"noise.kappa": DEFAULT_NOISE_RATE},
    "gamma": {"noise.gamma": DEFAULT_NOISE_RATE},
    "dephasing": {"noise.gamma_phi": DEFAULT_NOISE_RATE},
    "thermal": {"noise.kappa": DEFAULT_NOISE_RATE, "noise.n_th": DEFAULT_THERMAL_NTH},
}

NSD = "no_sudden_death"
SD = "sudden_death"


@dataclass(frozen=True)
class Preset:
    """A named scenario with its variants."""

    name: str
    description: str
    settings: Mapping[str, Mapping[str, Any]]
    variants: Mapping[str, Mapping[str, Any]] = field(default_factory=lambda: {"clean": {}})
    default_variant: str = "clean"
    placeholder_noise: bool = True

    @property
    def note(self) -> str:
        return PLACEHOLDER_NOTE if self.placeholder_noise else ""

    def document(self, variant: Optional[str] = None) -> Dict[str, Dict[str, Any]]:
        """
        Scenario document of a variant.

        Raises:
            ConfigError: For an unknown variant
        """
        variant = variant or self.default_variant
        if variant not in self.variants:
            raise ConfigError(
                f"unknown variant {variant!r} of preset {self.name}; "
                f"expected one of {', '.join(self.variants)}"
            )
        doc = copy.deepcopy({k: dict(v) for k, v in self.settings.items()})
        doc["scenario"]["name"] = self.name if variant == self.default_variant else f"{self.name}_{variant}"
        for path, value in self.variants[variant].items():
            section, key = path.split(".")
            doc.setdefault(section, {})[key] = value
        return doc

    def config(self, variant: Optional[str] = None, overrides: Iterable[str] = ()) -> ScenarioConfig:
        config = config_from_dict(self.document(variant))
        overrides = list(overrides)
        return apply_overrides(config, overrides) if overrides else config


def _base(name: str, n_photon: int = 1, g_a: float = 1.0, case: str = NSD,
          n_samples: int = DEFAULT_SAMPLES) -> Dict[str, Dict[str, Any]]:
    return {
        "scenario": {"name": name},
        "model": {"omega0": float(n_photon), "omega": 1.0, "g_a": g_a, "g_b": 1.0, "n_photon": n_photon},
        "initial": {"alpha": "pi/6", "case": case},
        "grid": {"t_end": DEFAULT_T_END, "n_samples": n_samples},
    }


def _driven(name: str, n_photon: int, m_order: int, epsilon: float) -> Dict[str, Dict[str, Any]]:
    doc = _base(name, n_photon=n_photon, n_samples=DRIVEN_SAMPLES)
    doc["model"]["frame"] = "rotating"
    doc["drive"] = {"epsilon": epsilon, "m_order": m_order, "resonant": True}
    return doc


def _pump_orders(pairs) -> Dict[str, Dict[str, Any]]:
    return {
        f"n{n}m{m}": {"model.n_photon": n, "model.omega0": float(n), "drive.m_order": m}
        for n, m in pairs
    }


def _disordered(name: str, kind: str, width: float) -> Dict[str, Dict[str, Any]]:
    doc = _base(name)
    doc["disorder"] = {"kind": kind, "s": width, "n_realizations": DEFAULT_REALIZATIONS}
    return doc


def _nonlinearity(orders) -> Dict[str, Dict[str, Any]]:
    return {f"n{n}": {"model.n_photon": n, "model.omega0": float(n)} for n in orders}


def _build_catalog() -> Dict[str, Preset]:
    presets = []

    for suffix, case, g_a, label in (
        ("a", NSD, 1.0, "no-sudden-death state, G_A = G_B"),
        ("b", NSD, 0.9, "no-sudden-death state, G_A = 0.9 G_B"),
        ("c", SD, 1.0, "sudden-death state, G_A = G_B"),
        ("d", SD, 0.9, "sudden-death state, G_A = 0.9 G_B"),
    ):
        presets.append(Preset(
            f"fig1{suffix}", f"Linear double JC, {label}",
            _base(f"fig1{suffix}", g_a=g_a, case=case), NOISE_MENU,
        ))
        presets.append(Preset(
            f"fig2{suffix}", f"Two-photon double JC, {label}",
            _base(f"fig2{suffix}", n_photon=2, g_a=g_a, case=case), NOISE_MENU,
        ))

    for suffix, n in (("e", 2), ("f", 3)):
        variants = dict(NOISE_MENU)
        variants["kappa_scaled"] = {"noise.kappa": DEFAULT_NOISE_RATE / n}
        variants["gamma_scaled"] = {"noise.gamma": DEFAULT_NOISE_RATE * n}
        presets.append(Preset(
            f"fig2{suffix}", f"{n}-photon double JC with noise, G_A = G_B",
            _base(f"fig2{suffix}", n_photon=n), variants, default_variant="thermal",
        ))

    for figure, epsilon in (("fig3", 0.01), ("fig4", 0.04)):
        presets.append(Preset(
            f"{figure}a", f"Pumped multiphoton double JC, epsilon = {epsilon}, (n, m) = (2, 1)",
            _driven(f"{figure}a", 2, 1, epsilon),
            _pump_orders([(2, 1), (2, 2), (3, 1)]), default_variant="n2m1", placeholder_noise=False,
        ))
        presets.append(Preset(
            f"{figure}b", f"Pumped multiphoton double JC, epsilon = {epsilon}, (n, m) = (3, 3)",
            _driven(f"{figure}b", 3, 3, epsilon),
            _pump_orders([(3, 3)]), default_variant="n3m3", placeholder_noise=False,
        ))

    presets.append(Preset(
        "fig5a", f"Clean double JC, uniform disorder s = {DEFAULT_UNIFORM_WIDTH}",
        _disordered("fig5a", "uniform", DEFAULT_UNIFORM_WIDTH),
        _nonlinearity((1, 2, 3)), default_variant="n1", placeholder_noise=False,
    ))
    presets.append(Preset(
        "fig5b", f"Clean double JC, Gaussian disorder s = {DEFAULT_GAUSSIAN_WIDTH}",
        _disordered("fig5b", "gaussian", DEFAULT_GAUSSIAN_WIDTH),
        _nonlinearity((1, 2, 3)), default_variant="n1", placeholder_noise=False,
    ))
    presets.append(Preset(
        "fig6a", f"Linear double JC, uniform disorder s = {DEFAULT_UNIFORM_WIDTH} with noise",
        _disordered("fig6a", "uniform", DEFAULT_UNIFORM_WIDTH), NOISE_MENU, default_variant="kappa",
    ))
    presets.append(Preset(
        "fig6b", f"Linear double JC, Gaussian disorder s = {DEFAULT_GAUSSIAN_WIDTH} with noise",
        _disordered("fig6b", "gaussian", DEFAULT_GAUSSIAN_WIDTH), NOISE_MENU, default_variant="kappa",
    ))

    return {preset.name: preset for preset in sorted(presets, key=lambda p: p.name)}


CATALOG = _build_catalog()


def list_presets() -> List[Preset]:
    return list(CATALOG.values())


def get_preset(name: str) -> Preset:
    """
    Raises:
        ConfigError: For an unknown preset name
    """
    try:
        return CATALOG[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; run list-presets for the catalog")


def preset_config(name: str, variant: Optional[str] = None, overrides: Iterable[str] = ()) -> ScenarioConfig:
    return get_preset(name).config(variant, overrides)


def catalog_frame() -> pd.DataFrame:
    """One row per preset with its main parameters."""
    rows = []
    for preset in list_presets():
        config = preset.config()
        rows.append({
            "name": preset.name,
            "description": preset.description,
            "n_photon": config.model.n_photon,
            "g_a": config.model.g_a,
            "epsilon": config.drive.epsilon if config.drive else 0.0,
            "m_order": config.drive.m_order if config.drive else None,
            "disorder": config.disorder.kind.value,
            "n_realizations": config.disorder.n_realizations,
            "default_variant": preset.default_variant,
            "variants": ", ".join(preset.variants),
            "note": preset.note,
        })
    return pd.DataFrame(rows)
