"""Flat key=value scenario configuration and numeric file formats.

Config files are one ``key=value`` per line with ``#`` comments; unknown keys
are hard errors.  Complex numbers are written ``re+imi`` (e.g. ``0.7071+0i``,
``1-0.5i``), vectors comma-separated.  Unitary files carry a ``dim=N`` header
followed by row-major whitespace-separated ``re im`` pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from .channels import DensityMatrix, PureState
from .schemes import SchemeKind


class ConfigError(ValueError):
    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        prefix = f"line {line_no}: " if line_no is not None else ""
        super().__init__(prefix + message)


def format_complex(z: complex) -> str:
    re, im = float(np.real(z)), float(np.imag(z))
    sign = "+" if im >= 0 or math.isnan(im) else "-"
    return f"{re!r}{sign}{abs(im)!r}i"


def parse_complex(tok: str) -> complex:
    t = tok.strip()
    if not t.endswith("i"):
        return complex(float(t), 0.0)
    body = t[:-1]
    # split at the sign separating real and imaginary parts (skip exponents
    # and a leading sign)
    for pos in range(len(body) - 1, 0, -1):
        ch = body[pos]
        if ch in "+-" and body[pos - 1] not in "eE":
            re_part, im_part = body[:pos], body[pos:]
            if im_part in ("+", "-"):
                im_part += "1"
            return complex(float(re_part), float(im_part))
    return complex(0.0, float(body if body not in ("", "+", "-") else body + "1"))


def format_vector(v) -> str:
    return ",".join(format_complex(z) for z in np.asarray(v).reshape(-1))


def parse_vector(text: str) -> np.ndarray:
    return np.array([parse_complex(tok) for tok in text.split(",")], dtype=complex)


_RESETS = ("none", "filter", "timebin", "oam")
_PLATFORMS = ("path_pol", "pol_oam")
_FORMATS = ("csv", "json")


@dataclass
class ScenarioConfig:
    """Typed view of a scenario config file.

    All physical validation is deferred to the owning modules; this layer only
    parses, type-checks, and rejects unknown keys.
    """

    scheme: str | None = None
    coupling: float | None = None          # key: lambda
    ell: int = 1
    alpha: float | None = None
    target: np.ndarray | None = None
    initial: np.ndarray | str | None = None
    iterations: int = 10                   # key: n
    reset: str = "none"
    tau: float = 1.0
    efficiency_table: str | None = None
    extend_efficiencies: bool = False
    platform: str = "pol_oam"
    seed: int = 0
    out: str | None = None
    fmt: str = "csv"                       # key: format
    netlist: str | None = None
    unitary: str | None = None
    input: np.ndarray | None = None
    tol: float = 1e-9
    # parametric-gain parameters
    gamma: float | None = None
    d_eff: float = 0.0
    omega1: float = 0.0
    omega2: float = 0.0
    k1: float = 0.0
    k2: float = 0.0
    pump_amplitude: float = 0.0
    delta_k: float = 0.0
    length: float | None = None

    def scheme_kind(self) -> SchemeKind:
        if self.scheme is None:
            raise ConfigError("missing 'scheme' key")
        try:
            return SchemeKind(self.scheme)
        except ValueError:
            names = ", ".join(k.value for k in SchemeKind)
            raise ConfigError(f"unknown scheme {self.scheme!r} (expected one of {names})")

    def target_state(self) -> PureState:
        if self.target is None:
            raise ConfigError("missing 'target' key")
        v = self.target
        return PureState(v / np.linalg.norm(v))

    def initial_density(self) -> DensityMatrix:
        if self.initial is None:
            raise ConfigError("missing 'initial' key")
        if isinstance(self.initial, str):
            return DensityMatrix.maximally_mixed(2)
        v = self.initial / np.linalg.norm(self.initial)
        return PureState(v).density()

    def initial_pure(self) -> PureState:
        if self.initial is None:
            raise ConfigError("missing 'initial' key")
        if isinstance(self.initial, str):
            raise ConfigError("this command needs a pure 'initial' state vector")
        return PureState(self.initial / np.linalg.norm(self.initial))


_KEY_TO_FIELD = {
    "scheme": "scheme",
    "lambda": "coupling",
    "ell": "ell",
    "alpha": "alpha",
    "target": "target",
    "initial": "initial",
    "n": "iterations",
    "reset": "reset",
    "tau": "tau",
    "efficiency_table": "efficiency_table",
    "extend_efficiencies": "extend_efficiencies",
    "platform": "platform",
    "seed": "seed",
    "out": "out",
    "format": "fmt",
    "netlist": "netlist",
    "unitary": "unitary",
    "input": "input",
    "tol": "tol",
    "gamma": "gamma",
    "d_eff": "d_eff",
    "omega1": "omega1",
    "omega2": "omega2",
    "k1": "k1",
    "k2": "k2",
    "pump_amplitude": "pump_amplitude",
    "delta_k": "delta_k",
    "length": "length",
}
_FIELD_TO_KEY = {v: k for k, v in _KEY_TO_FIELD.items()}

_VECTOR_FIELDS = {"target", "initial", "input"}
_INT_FIELDS = {"ell", "iterations", "seed"}
_FLOAT_FIELDS = {
    "coupling", "alpha", "tau", "tol", "gamma", "d_eff", "omega1", "omega2",
    "k1", "k2", "pump_amplitude", "delta_k", "length",
}
_BOOL_FIELDS = {"extend_efficiencies"}


def parse_config(text: str) -> ScenarioConfig:
    cfg = ScenarioConfig()
    seen = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {line!r}", line_no)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEY_TO_FIELD:
            raise ConfigError(f"unknown key {key!r}", line_no)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r}", line_no)
        seen.add(key)
        name = _KEY_TO_FIELD[key]
        try:
            if name in _VECTOR_FIELDS:
                if name == "initial" and value.startswith("mixed:"):
                    if value != "mixed:maximally":
                        raise ValueError(f"unknown mixed-state spec {value!r}")
                    parsed: object = value
                else:
                    parsed = parse_vector(value)
            elif name in _INT_FIELDS:
                parsed = int(value)
            elif name in _FLOAT_FIELDS:
                parsed = float(value)
            elif name in _BOOL_FIELDS:
                if value not in ("true", "false"):
                    raise ValueError(f"expected true/false, got {value!r}")
                parsed = value == "true"
            else:
                parsed = value
        except ValueError as exc:
            raise ConfigError(str(exc), line_no) from None
        setattr(cfg, name, parsed)
    if cfg.reset not in _RESETS:
        raise ConfigError(f"reset must be one of {_RESETS}, got {cfg.reset!r}")
    if cfg.platform not in _PLATFORMS:
        raise ConfigError(f"platform must be one of {_PLATFORMS}, got {cfg.platform!r}")
    if cfg.fmt not in _FORMATS:
        raise ConfigError(f"format must be one of {_FORMATS}, got {cfg.fmt!r}")
    return cfg


def format_config(cfg: ScenarioConfig) -> str:
    """Canonical text form; parse(format(cfg)) == cfg and format is idempotent."""
    default = ScenarioConfig()
    lines = []
    for f in fields(ScenarioConfig):
        val = getattr(cfg, f.name)
        base = getattr(default, f.name)
        if val is None:
            continue
        if f.name in _VECTOR_FIELDS and not isinstance(val, str):
            if base is None or not np.array_equal(val, base):
                lines.append(f"{_FIELD_TO_KEY[f.name]}={format_vector(val)}")
            continue
        if isinstance(val, bool):
            if val != base:
                lines.append(f"{_FIELD_TO_KEY[f.name]}={'true' if val else 'false'}")
            continue
        if isinstance(val, float):
            if base is None or val != base:
                lines.append(f"{_FIELD_TO_KEY[f.name]}={val!r}")
            continue
        if val != base:
            lines.append(f"{_FIELD_TO_KEY[f.name]}={val}")
    return "\n".join(lines) + "\n" if lines else ""


def write_unitary(path, U: np.ndarray) -> None:
    U = np.asarray(U, dtype=complex)
    lines = [f"dim={U.shape[0]}"]
    for row in U:
        lines.append(" ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_unitary(path) -> np.ndarray:
    with open(path) as fh:
        text = fh.read()
    tokens: list[str] = []
    dim = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if dim is None:
            if not line.startswith("dim="):
                raise ConfigError("unitary file must start with 'dim=N'", line_no)
            try:
                dim = int(line[4:])
            except ValueError:
                raise ConfigError(f"bad dimension {line[4:]!r}", line_no) from None
            if dim <= 0:
                raise ConfigError("dimension must be positive", line_no)
            continue
        tokens.extend(line.split())
    if dim is None:
        raise ConfigError("empty unitary file")
    if len(tokens) != 2 * dim * dim:
        raise ConfigError(
            f"expected {2 * dim * dim} numbers for dim={dim}, got {len(tokens)}"
        )
    try:
        vals = [float(t) for t in tokens]
    except ValueError as exc:
        raise ConfigError(f"bad number in unitary file: {exc}") from None
    flat = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
    return flat.reshape(dim, dim)


def read_efficiency_table(path) -> dict:
    table = {}
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"expected index=efficiency, got {line!r}", line_no)
            k, v = line.split("=", 1)
            try:
                table[int(k.strip())] = float(v.strip())
            except ValueError as exc:
                raise ConfigError(str(exc), line_no) from None
    if not table:
        raise ConfigError("empty efficiency table")
    return table
