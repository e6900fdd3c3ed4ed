"""File formats and run configuration.

Tensor text format::

    # optional comment lines
    dims: m1 m2 ... mk
    v v v ...        (values in mode-1-fastest order, any whitespace)

Design CSV: header ``s1,s2`` then one row per design point.

Run configuration: flat ``key = value`` lines, ``#`` comments. Unknown
keys are errors.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from tvgp.errors import ParseError, ShapeError
from tvgp.posterior import PARAM_NAMES, PriorSpec, Scheme
from tvgp.tensor import DenseTensor

OUTPUT_DIR_ENV = "TVGP_OUTPUT_DIR"


def write_tensor(t: DenseTensor, path, comment: str | None = None) -> None:
    t = t if isinstance(t, DenseTensor) else DenseTensor(t)
    flat = t.data
    row = t.dims[0]
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.append("dims: " + " ".join(str(m) for m in t.dims))
    for start in range(0, len(flat), row):
        lines.append(" ".join(repr(float(v)) for v in flat[start:start + row]))
    Path(path).write_text("\n".join(lines) + "\n")


def load_tensor(path) -> DenseTensor:
    path = Path(path)
    dims = None
    values: list[float] = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if dims is None:
            key, sep, rest = line.partition(":")
            if not sep or key.strip() != "dims":
                raise ParseError("expected 'dims: m1 m2 ...'", line=lineno, path=path)
            try:
                dims = tuple(int(tok) for tok in rest.split())
            except ValueError:
                raise ParseError(f"non-integer dimension in {rest.strip()!r}", line=lineno, path=path) from None
            if not dims or any(m < 1 for m in dims):
                raise ParseError(f"dimensions must be positive integers, got {dims}", line=lineno, path=path)
            continue
        try:
            values.extend(float(tok) for tok in line.split())
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno, path=path) from None
    if dims is None:
        raise ParseError("missing 'dims:' line", line=1, path=path)
    if len(values) != math.prod(dims):
        raise ParseError(
            f"dims {dims} need {math.prod(dims)} values, found {len(values)}", path=path
        )
    return DenseTensor.from_flat(values, dims)


def write_design(points, path) -> None:
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    header = ",".join(f"s{i + 1}" for i in range(pts.shape[1]))
    body = "\n".join(",".join(repr(float(v)) for v in row) for row in pts)
    Path(path).write_text(header + "\n" + body + "\n")


def load_design(path) -> np.ndarray:
    path = Path(path)
    lines = [ln for ln in path.read_text().splitlines()]
    if not lines or not lines[0].strip():
        raise ParseError("missing header", line=1, path=path)
    header = [h.strip() for h in lines[0].split(",")]
    if header != [f"s{i + 1}" for i in range(len(header))]:
        raise ParseError(f"header must be 's1,s2,...', got {lines[0]!r}", line=1, path=path)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(parts)}", line=lineno, path=path)
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno, path=path) from None
    if not rows:
        raise ParseError("no design points", path=path)
    return np.array(rows)


def check_design(design: np.ndarray, tensor: DenseTensor, extra: int = 0) -> None:
    """Design rows must equal the tensor's mode-1 order (minus ``extra`` test slices)."""
    if design.shape[0] + extra != tensor.dims[0]:
        raise ShapeError(
            f"{design.shape[0]} design points but the tensor has "
            f"{tensor.dims[0]} mode-1 slices"
            + (f" (expected {design.shape[0] + extra})" if extra else "")
        )


def write_params(values: dict[str, float], path, comment: str | None = None) -> None:
    lines = [f"# {comment}"] if comment else []
    lines += [f"{k} = {v!r}" for k, v in values.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def load_params(path) -> dict[str, float]:
    out = {}
    for key, value, lineno in _kv_lines(Path(path)):
        try:
            out[key] = float(value)
        except ValueError:
            raise ParseError(f"{key}: not a number: {value!r}", line=lineno, path=path) from None
    return out


def _kv_lines(path: Path):
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", line=lineno, path=path)
        yield key.strip(), value.strip(), lineno


def _pair(text: str) -> tuple[float, float]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 2:
        raise ValueError(f"expected two numbers, got {text!r}")
    return (_num(parts[0]), _num(parts[1]))


def _num(text: str) -> float:
    t = text.strip().lower()
    consts = {"pi": math.pi, "pi/2": math.pi / 2, "pi/4": math.pi / 4, "inf": math.inf}
    if t in consts:
        return consts[t]
    return float(t)


def _opt_float(text: str) -> float | None:
    return None if text.strip().lower() in ("", "none") else _num(text)


@dataclass
class RunConfig:
    # data
    training_tensor: str | None = None
    design: str | None = None
    test_slice: str | None = None
    modal_params: str | None = None
    output_dir: str = "tvgp_out"
    # scheme and chain
    scheme: str = "train-only"
    seed: int = 0
    iterations: int = 20000
    burn_in: int = 5000
    thin: int = 1
    chains: int = 1
    pilot_iterations: int = 0
    pilot_rounds: int = 3
    init: dict[str, float] = field(default_factory=dict)
    proposal_sd: dict[str, float] = field(default_factory=dict)
    # priors
    q11_bounds: tuple[float, float] = (0.0, 1e6)
    q22_bounds: tuple[float, float] = (0.0, 1e6)
    s1_bounds: tuple[float, float] = (1.7, 2.3)
    s2_bounds: tuple[float, float] = (0.0, math.pi / 2)
    sigma3_prior: str = "flat-log"
    jitter: float = 1e-8
    # analysis
    bins: int = 50
    mass: float = 0.95
    # simulation
    n_r: int = 12
    n_phi: int = 18
    r_range: tuple[float, float] = (1.7, 2.3)
    phi_range: tuple[float, float] = (0.0, math.pi / 2)
    m2: int = 50
    m3: int = 2
    true_q11: float = 30.0
    true_q22: float = 3.0
    true_sigma11: float = 1.0
    true_sigma22: float = 0.4
    true_rho: float = -0.05
    s_test: tuple[float, float] | None = None
    # units
    r_sun_kpc: float = 8.0
    v0_kms: float = 220.0

    @property
    def prior_spec(self) -> PriorSpec:
        return PriorSpec(
            q_bounds=(self.q11_bounds, self.q22_bounds),
            s_bounds=(self.s1_bounds, self.s2_bounds),
            sigma3_prior=self.sigma3_prior,
        )

    @property
    def scheme_enum(self) -> Scheme:
        return Scheme(self.scheme)

    def resolved_output_dir(self) -> Path:
        return Path(os.environ.get(OUTPUT_DIR_ENV) or self.output_dir)

    def set(self, key: str, value: str) -> None:
        """Assign one ``key = value`` entry, parsing by the field's type."""
        key = key.strip()
        if key.startswith("init_") and key[5:] in PARAM_NAMES:
            self.init[key[5:]] = _num(value)
            return
        if key.startswith("sd_") and key[3:] in PARAM_NAMES:
            self.proposal_sd[key[3:]] = _num(value)
            return
        parser = _PARSERS.get(key)
        if parser is None:
            raise KeyError(f"unknown configuration key {key!r}")
        setattr(self, key, parser(value))
        if key == "scheme":
            Scheme(self.scheme)


def _str(v: str) -> str:
    return v.strip()


def _opt_str(v: str) -> str | None:
    v = v.strip()
    return None if v.lower() in ("", "none") else v


def _opt_pair(v: str):
    return None if v.strip().lower() in ("", "none") else _pair(v)


_TYPE_PARSERS = {
    "str": _str,
    "str | None": _opt_str,
    "int": int,
    "float": _num,
    "tuple[float, float]": _pair,
    "tuple[float, float] | None": _opt_pair,
}

_PARSERS: dict[str, Any] = {
    f.name: _TYPE_PARSERS[f.type]
    for f in fields(RunConfig)
    if f.type in _TYPE_PARSERS
}


def load_config(path=None, overrides: list[str] | None = None) -> RunConfig:
    """Read a config file (optional) and apply ``key=value`` overrides."""
    cfg = RunConfig()
    if path is not None:
        path = Path(path)
        for key, value, lineno in _kv_lines(path):
            try:
                cfg.set(key, value)
            except (KeyError, ValueError) as exc:
                raise ParseError(str(exc).strip("'\""), line=lineno, path=path) from None
    for item in overrides or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ParseError(f"override must be key=value, got {item!r}")
        try:
            cfg.set(key, value)
        except (KeyError, ValueError) as exc:
            raise ParseError(f"override {item!r}: {exc}") from None
    return cfg
