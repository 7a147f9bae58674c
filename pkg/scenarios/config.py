"""
Scenario configuration: TOML schema, parsing, printing and dotted overrides.

Document layout:

    [scenario]  name, seed
    [model]     omega0, omega, g_a, g_b, n_photon, frame, cutoff, units
    [drive]     epsilon, chi, m_order, delta_p, resonant, resonance_sign   (optional)
    [noise]     kappa, gamma, gamma_phi (both pairs) or *_a / *_b, n_th
    [disorder]  kind, s, n_realizations, per_cavity_independent
    [initial]   alpha ("pi/6" style literals accepted), case
    [grid]      t_end (scaled time), n_samples, rtol, atol, engine
    [output]    directory, prefix, formats

All frequencies and rates are normalized to G_B = 1 on parsing.
"""

import hashlib
import json
import logging
import math
import re

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple

from config import DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_T_END, OUTPUT_DIR, RTOL, ATOL
from disorder.sampling import DisorderError, DisorderKind, DisorderSpec
from dynamics.engine import TimeGrid
from dynamics.noise import NoiseRates
from models.params import (
    FRAMES,
    DriveParams,
    InitialStateSpec,
    ModelParams,
    ParameterError,
    StateCase,
)
from operators.validators import ValidationError

logger = logging.getLogger(__name__)

ENGINES = ("factorized", "full")
OUTPUT_FORMATS = ("csv", "json")
UNITS = ("g_b",)

SCHEMA = {
    "scenario": ("name", "seed"),
    "model": ("omega0", "omega", "g_a", "g_b", "n_photon", "frame", "cutoff", "units"),
    "drive": ("epsilon", "chi", "m_order", "delta_p", "resonant", "resonance_sign"),
    "noise": ("kappa", "gamma", "gamma_phi", "kappa_a", "kappa_b", "gamma_a", "gamma_b",
              "gamma_phi_a", "gamma_phi_b", "n_th"),
    "disorder": ("kind", "s", "n_realizations", "per_cavity_independent"),
    "initial": ("alpha", "case"),
    "grid": ("t_end", "n_samples", "rtol", "atol", "engine"),
    "output": ("directory", "prefix", "formats"),
}

_ANGLE = re.compile(
    r"^\s*(?P<sign>-)?\s*(?P<coef>\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*pi\s*(?:/\s*(?P<den>\d+(?:\.\d*)?))?\s*$"
)


class ConfigError(ValueError):
    """Raised for schema violations; carries the field path and source line."""

    def __init__(self, message: str, field_path: str = "", line: Optional[int] = None):
        where = field_path
        if line is not None:
            where = f"{field_path} (line {line})" if field_path else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)
        self.field_path = field_path
        self.line = line


@dataclass(frozen=True)
class OutputSpec:
    """Destination and formats of the run artifacts."""

    directory: str = str(OUTPUT_DIR)
    prefix: str = ""
    formats: Tuple[str, ...] = ("csv",)


@dataclass(frozen=True)
class ScenarioConfig:
    """
    Fully resolved scenario.

    ``cutoff`` None means automatic selection by the runner.
    """

    name: str = "scenario"
    seed: int = DEFAULT_SEED
    model: ModelParams = field(default_factory=ModelParams)
    drive: Optional[DriveParams] = None
    noise: NoiseRates = field(default_factory=NoiseRates)
    disorder: DisorderSpec = field(default_factory=DisorderSpec)
    initial: InitialStateSpec = field(default_factory=InitialStateSpec)
    grid: TimeGrid = field(default_factory=lambda: TimeGrid(DEFAULT_T_END, DEFAULT_SAMPLES))
    cutoff: Optional[int] = None
    engine: str = "factorized"
    output: OutputSpec = field(default_factory=OutputSpec)

    @property
    def is_driven(self) -> bool:
        return self.drive is not None

    @property
    def conserves_excitation(self) -> bool:
        """Undriven and zero temperature: excitation number can only decrease."""
        return not self.is_driven and not self.noise.is_thermal

    @property
    def prefix(self) -> str:
        return self.output.prefix or self.name

    def scenario_hash(self) -> str:
        """Short digest of the printed configuration."""
        return hashlib.sha256(format_config(self).encode()).hexdigest()[:16]


def _line_of(text: Optional[str], section: str, key: Optional[str] = None) -> Optional[int]:
    """Best-effort source line of ``[section]`` or of ``key`` inside it."""
    if not text:
        return None
    current = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        header = re.match(r"^\[\s*([A-Za-z_]+)\s*\]$", line)
        if header:
            current = header.group(1)
            if key is None and current == section:
                return number
            continue
        if current == section and key is not None and re.match(rf"^{re.escape(key)}\s*=", line):
            return number
    return None


def parse_angle(value: Any) -> float:
    """
    Angle in radians from a number or a literal such as "pi/6", "2*pi/3", "-pi".

    Raises:
        ValueError: For unrecognized literals
    """
    if isinstance(value, bool):
        raise ValueError(f"Not an angle: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)

    text = str(value).strip()
    match = _ANGLE.match(text)
    if match:
        coef = float(match.group("coef")) if match.group("coef") else 1.0
        den = float(match.group("den")) if match.group("den") else 1.0
        if den == 0:
            raise ValueError(f"Zero denominator in angle {value!r}")
        sign = -1.0 if match.group("sign") else 1.0
        return sign * coef * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"Not an angle literal: {value!r}")


class _Section:
    """Typed access to one document section with field-path error reporting."""

    def __init__(self, doc: Mapping[str, Any], name: str, text: Optional[str]):
        self.name = name
        self.text = text
        raw = doc.get(name, {})
        if not isinstance(raw, Mapping):
            raise ConfigError("expected a table", name, _line_of(text, name))
        self.values = dict(raw)
        self.present = name in doc

        for key in self.values:
            if key not in SCHEMA[name]:
                raise ConfigError(
                    f"unknown key; expected one of {', '.join(SCHEMA[name])}",
                    f"{name}.{key}", _line_of(text, name, key),
                )

    def error(self, key: str, message: str) -> ConfigError:
        return ConfigError(message, f"{self.name}.{key}", _line_of(self.text, self.name, key))

    def has(self, key: str) -> bool:
        return key in self.values

    def number(self, key: str, default: Optional[float] = None, minimum: Optional[float] = None,
               strictly: bool = False) -> Optional[float]:
        value = self.values.get(key, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.error(key, f"expected a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise self.error(key, f"must be finite, got {value}")
        if minimum is not None and (value <= minimum if strictly else value < minimum):
            relation = ">" if strictly else ">="
            raise self.error(key, f"must be {relation} {minimum}, got {value}")
        return value

    def integer(self, key: str, default: Optional[int] = None, minimum: Optional[int] = None) -> Optional[int]:
        value = self.values.get(key, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.error(key, f"expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            raise self.error(key, f"must be >= {minimum}, got {value}")
        return value

    def boolean(self, key: str, default: bool) -> bool:
        value = self.values.get(key, default)
        if not isinstance(value, bool):
            raise self.error(key, f"expected true or false, got {value!r}")
        return value

    def choice(self, key: str, default: str, options: Iterable[str]) -> str:
        options = tuple(options)
        value = self.values.get(key, default)
        if not isinstance(value, str) or value.lower() not in options:
            raise self.error(key, f"expected one of {', '.join(options)}, got {value!r}")
        return value.lower()

    def string(self, key: str, default: str) -> str:
        value = self.values.get(key, default)
        if not isinstance(value, str):
            raise self.error(key, f"expected a string, got {value!r}")
        return value


def _parse_model(doc, text) -> Tuple[ModelParams, Optional[int], float]:
    section = _Section(doc, "model", text)
    section.choice("units", "g_b", UNITS)

    g_b = section.number("g_b", 1.0, minimum=0.0, strictly=True)
    g_a = section.number("g_a", g_b, minimum=0.0)
    omega0 = section.number("omega0", g_b)
    omega = section.number("omega", g_b)
    n_photon = section.integer("n_photon", 1, minimum=1)
    frame = section.choice("frame", "rotating" if "drive" in doc else "lab", FRAMES)

    if "drive" in doc and frame == "lab":
        raise section.error("frame", "a driven scenario is defined in the pump rotating frame; "
                                     "use frame = \"rotating\"")

    cutoff_value = section.values.get("cutoff", "auto")
    if cutoff_value == "auto":
        cutoff = None
    else:
        cutoff = section.integer("cutoff", minimum=2)

    model = ModelParams(
        omega0=omega0 / g_b, omega=omega / g_b, g_a=g_a / g_b, g_b=1.0,
        n_photon=n_photon, frame=frame,
    )
    if cutoff is not None and cutoff < n_photon + 1:
        raise section.error("cutoff", f"must be >= n_photon + 1 = {n_photon + 1}, got {cutoff}")
    if not model.is_multiphoton_resonant:
        logger.warning(
            f"Model off multiphoton resonance: omega0 - N omega = {model.detuning:.6g} (units of G_B)"
        )
    return model, cutoff, g_b


def _parse_drive(doc, text, model: ModelParams, scale: float) -> Optional[DriveParams]:
    if "drive" not in doc:
        return None
    section = _Section(doc, "drive", text)
    resonant = section.boolean("resonant", False)
    m_order = section.integer("m_order", 1, minimum=1)
    if resonant and m_order > model.n_photon:
        raise section.error("m_order", f"no resonance rule for m_order {m_order} > n_photon "
                                       f"{model.n_photon}; set resonant = false and give delta_p")
    if resonant and section.has("delta_p"):
        raise section.error("delta_p", "delta_p is derived when resonant = true")

    sign = section.integer("resonance_sign", 1)
    if sign not in (1, -1):
        raise section.error("resonance_sign", f"must be 1 or -1, got {sign}")

    return DriveParams(
        epsilon=section.number("epsilon", 0.0, minimum=0.0) / scale,
        chi=parse_angle(section.values.get("chi", 0.0)),
        m_order=m_order,
        delta_p=section.number("delta_p", 0.0) / scale,
        resonant=resonant,
        resonance_sign=sign,
    )


def _parse_noise(doc, text, scale: float) -> NoiseRates:
    section = _Section(doc, "noise", text)
    rates = {}
    for base in ("kappa", "gamma", "gamma_phi"):
        shared = section.number(base, 0.0, minimum=0.0)
        for side in ("a", "b"):
            rates[f"{base}_{side}"] = section.number(f"{base}_{side}", shared, minimum=0.0) / scale
    return NoiseRates(n_th=section.number("n_th", 0.0, minimum=0.0), **rates)


def _parse_disorder(doc, text, seed: int) -> DisorderSpec:
    section = _Section(doc, "disorder", text)
    kind = section.choice("kind", "none", [k.value for k in DisorderKind])
    if kind != "none" and not section.has("s"):
        raise section.error("s", f"required for disorder kind {kind!r}")
    try:
        return DisorderSpec(
            kind=DisorderKind(kind),
            s=section.number("s", 0.0, minimum=0.0),
            n_realizations=section.integer("n_realizations", 1, minimum=1),
            seed=seed,
            per_cavity_independent=section.boolean("per_cavity_independent", True),
        )
    except DisorderError as e:
        raise ConfigError(str(e), "disorder", _line_of(text, "disorder"))


def _parse_initial(doc, text) -> InitialStateSpec:
    section = _Section(doc, "initial", text)
    try:
        alpha = parse_angle(section.values.get("alpha", "pi/6"))
    except ValueError as e:
        raise section.error("alpha", str(e))
    case = section.choice("case", StateCase.NO_SUDDEN_DEATH.value, [c.value for c in StateCase])
    return InitialStateSpec(alpha=alpha, case=StateCase(case))


def _parse_grid(doc, text) -> Tuple[TimeGrid, str]:
    section = _Section(doc, "grid", text)
    grid = TimeGrid(
        t_end=section.number("t_end", DEFAULT_T_END, minimum=0.0, strictly=True),
        n_samples=section.integer("n_samples", DEFAULT_SAMPLES, minimum=2),
        rtol=section.number("rtol", RTOL, minimum=0.0, strictly=True),
        atol=section.number("atol", ATOL, minimum=0.0, strictly=True),
    )
    return grid, section.choice("engine", "factorized", ENGINES)


def _parse_output(doc, text) -> OutputSpec:
    section = _Section(doc, "output", text)
    formats = section.values.get("formats", ["csv"])
    if isinstance(formats, str):
        formats = [formats]
    if not isinstance(formats, list) or any(f not in OUTPUT_FORMATS for f in formats):
        raise section.error("formats", f"expected a list drawn from {OUTPUT_FORMATS}, got {formats!r}")
    if "csv" not in formats:
        formats = ["csv"] + list(formats)
    return OutputSpec(
        directory=section.string("directory", str(OUTPUT_DIR)),
        prefix=section.string("prefix", ""),
        formats=tuple(dict.fromkeys(formats)),
    )


def config_from_dict(doc: Mapping[str, Any], text: Optional[str] = None) -> ScenarioConfig:
    """
    Build a resolved config from a parsed document.

    Raises:
        ConfigError: For any schema, range or cross-field violation
    """
    for name in doc:
        if name not in SCHEMA:
            raise ConfigError(f"unknown section; expected one of {', '.join(SCHEMA)}",
                              name, _line_of(text, name))

    scenario = _Section(doc, "scenario", text)
    name = scenario.string("name", "scenario")
    seed = scenario.integer("seed", DEFAULT_SEED, minimum=0)

    try:
        model, cutoff, scale = _parse_model(doc, text)
        drive = _parse_drive(doc, text, model, scale)
        noise = _parse_noise(doc, text, scale)
        grid, engine = _parse_grid(doc, text)
    except (ParameterError, ValidationError) as e:
        raise ConfigError(str(e))

    return ScenarioConfig(
        name=name,
        seed=seed,
        model=model,
        drive=drive,
        noise=noise,
        disorder=_parse_disorder(doc, text, seed),
        initial=_parse_initial(doc, text),
        grid=grid,
        cutoff=cutoff,
        engine=engine,
        output=_parse_output(doc, text),
    )


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    """
    Parse a TOML scenario document.

    Raises:
        ConfigError: For malformed TOML or schema violations
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{source}: {e}")
    return config_from_dict(doc, text)


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config(handle.read(), source=str(path))


def config_to_dict(config: ScenarioConfig) -> Dict[str, Dict[str, Any]]:
    """Document form of a config; ``config_from_dict`` inverts it."""
    m, n, d, g, o = config.model, config.noise, config.disorder, config.grid, config.output
    doc = {
        "scenario": {"name": config.name, "seed": config.seed},
        "model": {
            "omega0": m.omega0, "omega": m.omega, "g_a": m.g_a, "g_b": m.g_b,
            "n_photon": m.n_photon, "frame": m.frame,
            "cutoff": "auto" if config.cutoff is None else config.cutoff,
            "units": "g_b",
        },
        "noise": {
            "kappa_a": n.kappa_a, "kappa_b": n.kappa_b,
            "gamma_a": n.gamma_a, "gamma_b": n.gamma_b,
            "gamma_phi_a": n.gamma_phi_a, "gamma_phi_b": n.gamma_phi_b,
            "n_th": n.n_th,
        },
        "disorder": {
            "kind": d.kind.value, "s": d.s, "n_realizations": d.n_realizations,
            "per_cavity_independent": d.per_cavity_independent,
        },
        "initial": {"alpha": config.initial.alpha, "case": config.initial.case.value},
        "grid": {
            "t_end": g.t_end, "n_samples": g.n_samples, "rtol": g.rtol, "atol": g.atol,
            "engine": config.engine,
        },
        "output": {"directory": o.directory, "prefix": o.prefix, "formats": list(o.formats)},
    }
    if config.drive is not None:
        dr = config.drive
        doc["drive"] = {
            "epsilon": dr.epsilon, "chi": dr.chi, "m_order": dr.m_order,
            "resonant": dr.resonant, "resonance_sign": dr.resonance_sign,
        }
        if not dr.resonant:
            doc["drive"]["delta_p"] = dr.delta_p
    return doc


def _toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    return json.dumps(str(value))


def format_config(config: ScenarioConfig) -> str:
    """Print a config as TOML; ``parse_config(format_config(c)) == c``."""
    doc = config_to_dict(config)
    order = ["scenario", "model", "drive", "noise", "disorder", "initial", "grid", "output"]
    blocks = []
    for name in order:
        if name not in doc:
            continue
        lines = [f"[{name}]"] + [f"{key} = {_toml_value(value)}" for key, value in doc[name].items()]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def parse_value(raw: str) -> Any:
    try:
        return tomllib.loads(f"value = {raw}")["value"]
    except tomllib.TOMLDecodeError:
        return raw


def apply_overrides(config: ScenarioConfig, overrides: Iterable[str]) -> ScenarioConfig:
    """
    Apply ``section.key=value`` overrides through the regular validation path.

    Values are read as TOML scalars; anything else is taken as a bare string.

    Raises:
        ConfigError: For malformed overrides or resulting schema violations
    """
    doc = config_to_dict(config)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        path, raw = (part.strip() for part in item.split("=", 1))
        if path.count(".") != 1:
            raise ConfigError(f"override key {path!r} must be section.key", path)
        section, key = path.split(".")
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError("unknown override key", path)

        table = doc.setdefault(section, {})
        if section == "drive" and key == "delta_p":
            table["resonant"] = False
        if section == "drive" and key == "resonant" and parse_value(raw) is True:
            table.pop("delta_p", None)
        if section == "noise" and key in ("kappa", "gamma", "gamma_phi"):
            table.pop(f"{key}_a", None)
            table.pop(f"{key}_b", None)
        table[key] = parse_value(raw)

    return config_from_dict(doc)


def with_output(config: ScenarioConfig, directory: Optional[str] = None, prefix: Optional[str] = None) -> ScenarioConfig:
    output = config.output
    if directory is not None:
        output = replace(output, directory=str(directory))
    if prefix is not None:
        output = replace(output, prefix=prefix)
    return replace(config, output=output)
