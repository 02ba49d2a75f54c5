"""Run configuration: flat dotted keys in a TOML file."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import tomli
import tomli_w

from ..cell_static import PhysicalParams, derive_coefficients
from ..geometry import GeometryError, InclusionSpec, UnitCellGeometry, build_unit_cell
from ..macro_solver import DIFFUSION_SCALINGS, IC_SCALINGS
from ..micro_solver import RECONSTRUCTIONS
from ..numerics import TimeGrid
from ..profiles import KINDS, DataProfiles, Profile


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


RAW_KEYS = ("rho", "c", "kappa", "rho_b", "c_b", "kappa_b", "omega_b")
PROFILE_KEYS = ("kind", "value", "amplitude", "center", "width", "mode")
DATA_NAMES = ("f", "f_b", "h", "h_b")


@dataclass
class RunConfig:
    cell_dim: int = 2
    cell_n: int = 32
    inclusion_enabled: bool = True
    inclusion_center: list = field(default_factory=lambda: [0.5, 0.5])
    inclusion_halfwidth: list = field(default_factory=lambda: [0.25, 0.25])
    alpha: float = 1.0
    alpha_b: float = 1.0
    gamma: float = 1.0
    raw: dict | None = None
    alpha_b_uses: str = "kappa_b"
    gamma_form: str = "standard"
    data: dict = field(default_factory=lambda: {name: {"kind": "constant", "value": 0.0} for name in DATA_NAMES})
    T_final: float = 5.0
    steps: int = 1000
    epsilon_list: list = field(default_factory=lambda: [0.25, 0.125, 0.0625])
    micro_epsilon: float | None = None
    macro_M: int = 4
    macro_refine: int = 8
    ic_scaling: str = "natural"
    diffusion_scaling: str = "derived"
    interface_reconstruction: str = "halfcell"
    out_dir: str = "out"
    formats: list = field(default_factory=lambda: ["csv", "json", "svg"])
    trajectory_format: str = "csv"
    trajectory_stride: int = 1
    wallclock: bool = False

    # -- flat key mapping -------------------------------------------------

    _KEYMAP = {
        "cell.dim": "cell_dim",
        "cell.n": "cell_n",
        "cell.inclusion.enabled": "inclusion_enabled",
        "cell.inclusion.center": "inclusion_center",
        "cell.inclusion.halfwidth": "inclusion_halfwidth",
        "physics.alpha": "alpha",
        "physics.alpha_b": "alpha_b",
        "physics.gamma": "gamma",
        "physics.alpha_b_uses": "alpha_b_uses",
        "physics.gamma_form": "gamma_form",
        "time.T_final": "T_final",
        "time.steps": "steps",
        "study.epsilon_list": "epsilon_list",
        "micro.epsilon": "micro_epsilon",
        "macro.M": "macro_M",
        "macro.refine": "macro_refine",
        "flags.ic_scaling": "ic_scaling",
        "flags.diffusion_scaling": "diffusion_scaling",
        "flags.interface_reconstruction": "interface_reconstruction",
        "output.out_dir": "out_dir",
        "output.formats": "formats",
        "output.trajectory_format": "trajectory_format",
        "output.trajectory_stride": "trajectory_stride",
        "output.wallclock": "wallclock",
    }

    def to_flat(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for key, attr in self._KEYMAP.items():
            v = getattr(self, attr)
            if v is not None:
                out[key] = v
        if self.raw is not None:
            for k in RAW_KEYS:
                out[f"physics.raw.{k}"] = self.raw[k]
        for name in DATA_NAMES:
            for k, v in self.data[name].items():
                out[f"data.{name}.{k}"] = v
        return out

    @classmethod
    def from_flat(cls, flat: dict[str, Any]) -> "RunConfig":
        cfg = cls()
        kw: dict[str, Any] = {}
        raw: dict[str, float] = {}
        data = {name: {} for name in DATA_NAMES}
        for key, value in flat.items():
            if key in cls._KEYMAP:
                kw[cls._KEYMAP[key]] = value
            elif key.startswith("physics.raw."):
                k = key[len("physics.raw."):]
                if k not in RAW_KEYS:
                    raise ConfigError(key, f"unknown physiological constant; expected one of {RAW_KEYS}")
                raw[k] = value
            elif key.startswith("data."):
                parts = key.split(".")
                if len(parts) != 3 or parts[1] not in DATA_NAMES or parts[2] not in PROFILE_KEYS:
                    raise ConfigError(key, f"expected data.<{'|'.join(DATA_NAMES)}>.<{'|'.join(PROFILE_KEYS)}>")
                data[parts[1]][parts[2]] = value
            else:
                raise ConfigError(key, "unknown configuration key")
        if raw:
            missing = [k for k in RAW_KEYS if k not in raw]
            if missing:
                raise ConfigError(f"physics.raw.{missing[0]}", "incomplete physiological constant set")
            kw["raw"] = {k: raw[k] for k in RAW_KEYS}
        merged = dict(cfg.data)
        for name in DATA_NAMES:
            if data[name]:
                merged[name] = data[name]
        kw["data"] = merged
        cfg = replace(cfg, **kw)
        cfg.validate()
        return cfg

    # -- validation -------------------------------------------------------

    def validate(self) -> None:
        _check_type("cell.dim", self.cell_dim, int)
        if self.cell_dim not in (2, 3):
            raise ConfigError("cell.dim", f"must be 2 or 3, got {self.cell_dim}")
        _check_type("cell.n", self.cell_n, int)
        if self.cell_n < 2:
            raise ConfigError("cell.n", f"must be at least 2, got {self.cell_n}")
        for key, v in (("cell.inclusion.center", self.inclusion_center),
                       ("cell.inclusion.halfwidth", self.inclusion_halfwidth)):
            if not isinstance(v, list) or len(v) != self.cell_dim:
                raise ConfigError(key, f"must be a list of {self.cell_dim} numbers")
        try:
            self.geometry()
        except GeometryError as exc:
            raise ConfigError("cell.inclusion", str(exc)) from None
        for key, v in (("physics.alpha", self.alpha), ("physics.alpha_b", self.alpha_b)):
            if not _num(v) or v <= 0:
                raise ConfigError(key, f"must be a positive number, got {v!r}")
        if not _num(self.gamma) or self.gamma < 0:
            raise ConfigError("physics.gamma", f"must be a non-negative number, got {self.gamma!r}")
        if self.alpha_b_uses not in ("kappa", "kappa_b"):
            raise ConfigError("physics.alpha_b_uses", "must be 'kappa' or 'kappa_b'")
        if self.gamma_form not in ("standard", "with_rho"):
            raise ConfigError("physics.gamma_form", "must be 'standard' or 'with_rho'")
        if self.raw is not None:
            try:
                self.params()
            except ValueError as exc:
                raise ConfigError("physics.raw", str(exc)) from None
        for name in DATA_NAMES:
            try:
                p = Profile.from_dict(self.data[name])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"data.{name}", f"{exc}; kinds are {KINDS}") from None
            if p.kind == "gaussian" and len(p.center) != self.cell_dim:
                raise ConfigError(f"data.{name}.center", f"must have {self.cell_dim} components")
        if not _num(self.T_final) or self.T_final <= 0:
            raise ConfigError("time.T_final", f"must be positive, got {self.T_final!r}")
        _check_type("time.steps", self.steps, int)
        if self.steps < 1:
            raise ConfigError("time.steps", f"must be at least 1, got {self.steps}")
        if not isinstance(self.epsilon_list, list) or not self.epsilon_list:
            raise ConfigError("study.epsilon_list", "must be a non-empty list")
        _check_type("macro.M", self.macro_M, int)
        _check_type("macro.refine", self.macro_refine, int)
        if self.macro_M < 1 or self.macro_refine < 1:
            raise ConfigError("macro.M", "macro.M and macro.refine must be at least 1")
        eps_all = list(self.epsilon_list) + ([self.micro_epsilon] if self.micro_epsilon is not None else [])
        for eps in eps_all:
            K = _inverse_integer(eps)
            if K is None:
                raise ConfigError("study.epsilon_list", f"epsilon {eps!r} is not 1/K for an integer K")
            if K % self.macro_M:
                raise ConfigError("macro.M", f"{self.macro_M} does not divide K = {K} (epsilon {eps})")
        for key, v, allowed in (("flags.ic_scaling", self.ic_scaling, IC_SCALINGS),
                                ("flags.diffusion_scaling", self.diffusion_scaling, DIFFUSION_SCALINGS),
                                ("flags.interface_reconstruction", self.interface_reconstruction, RECONSTRUCTIONS),
                                ("output.trajectory_format", self.trajectory_format, ("csv", "npz"))):
            if v not in allowed:
                raise ConfigError(key, f"must be one of {allowed}, got {v!r}")
        bad = [f for f in self.formats if f not in ("csv", "json", "svg")]
        if bad:
            raise ConfigError("output.formats", f"unknown formats {bad}")
        _check_type("output.trajectory_stride", self.trajectory_stride, int)
        if self.trajectory_stride < 1:
            raise ConfigError("output.trajectory_stride", "must be at least 1")

    # -- derived objects --------------------------------------------------

    def geometry(self) -> UnitCellGeometry:
        spec = None
        if self.inclusion_enabled:
            spec = InclusionSpec(tuple(self.inclusion_center), tuple(self.inclusion_halfwidth))
        return build_unit_cell(spec, self.cell_n, self.cell_dim)

    def params(self) -> PhysicalParams:
        if self.raw is not None:
            return derive_coefficients(**self.raw, alpha_b_uses=self.alpha_b_uses, gamma_form=self.gamma_form)
        return PhysicalParams(self.alpha, self.alpha_b, self.gamma)

    def profiles(self) -> DataProfiles:
        return DataProfiles(**{name: Profile.from_dict(self.data[name]) for name in DATA_NAMES})

    def timegrid(self) -> TimeGrid:
        return TimeGrid.from_final(float(self.T_final), int(self.steps))

    def epsilons(self) -> list[float]:
        return sorted((float(e) for e in self.epsilon_list), reverse=True)


def _num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _check_type(key: str, v, typ) -> None:
    if not isinstance(v, typ) or isinstance(v, bool):
        raise ConfigError(key, f"must be of type {typ.__name__}, got {v!r}")


def _inverse_integer(eps) -> int | None:
    if not _num(eps) or eps <= 0:
        return None
    K = round(1.0 / eps)
    return K if K >= 1 and abs(1.0 / eps - K) <= 1e-9 * K else None


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def parse_value(text: str):
    """TOML literal if it parses, otherwise the raw string."""
    try:
        return tomli.loads(f"v = {text}")["v"]
    except tomli.TOMLDecodeError:
        return text


def load_config(path: str | Path | None = None, overrides: list[str] | None = None) -> RunConfig:
    flat: dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                flat = _flatten(tomli.load(fh))
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(str(path), f"not valid TOML: {exc}") from None
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(item, "overrides take the form key=value")
        key, text = item.split("=", 1)
        flat[key.strip()] = parse_value(text.strip())
    return RunConfig.from_flat(flat)


def dumps_config(cfg: RunConfig) -> str:
    lines = []
    for key, value in sorted(cfg.to_flat().items()):
        literal = tomli_w.dumps({"v": value}).split("=", 1)[1].strip()
        lines.append(f"{key} = {literal}")
    return "\n".join(lines) + "\n"

