"""Priors and the three log-posterior targets.

Parameter vector layout (all schemes share it)::

    (s1, s2, q11, q22, sigma11, sigma22, rho)

``s1, s2`` locate the test slice in input space, ``q11, q22`` are the SQE
inverse squared length scales of the mode-1 covariance, and
``sigma11, sigma22, rho`` parametrise the 2x2 mode-3 covariance. Each
scheme samples a subset:

* ``train-only`` -- the five GP scalars, training data only;
* ``joint`` -- all seven, training data plus test slice;
* ``predictive`` -- ``s1, s2`` with GP scalars pinned at training modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from tvgp.covariance import (
    DEFAULT_JITTER,
    Sigma3Params,
    SqeKernelParams,
    build_sigma3,
    build_sqe_matrix,
)
from tvgp.errors import DomainError, ShapeError
from tvgp.likelihood import PreparedData, augmented_points

PARAM_NAMES = ("s1", "s2", "q11", "q22", "sigma11", "sigma22", "rho")
GP_NAMES = PARAM_NAMES[2:]
S_NAMES = PARAM_NAMES[:2]


class Scheme(str, Enum):
    TRAIN_ONLY = "train-only"
    JOINT = "joint"
    PREDICTIVE = "predictive"

    @property
    def active(self) -> tuple[bool, ...]:
        if self is Scheme.TRAIN_ONLY:
            return (False, False, True, True, True, True, True)
        if self is Scheme.JOINT:
            return (True,) * 7
        return (True, True, False, False, False, False, False)


class ParamVector:
    """Named parameter values with a mask of the components being sampled.

    Instances are immutable; :meth:`with_active` returns a new vector.
    """

    __slots__ = ("names", "values", "active", "_index")

    def __init__(self, values, names: Sequence[str] = PARAM_NAMES, active=None):
        vals = np.array(values, dtype=np.float64).ravel()
        names = tuple(names)
        if len(vals) != len(names):
            raise ShapeError(f"{len(vals)} values for {len(names)} names")
        act = np.ones(len(vals), dtype=bool) if active is None else np.array(active, dtype=bool)
        if act.shape != vals.shape:
            raise ShapeError("active mask length differs from values")
        vals.flags.writeable = False
        act.flags.writeable = False
        self.names = names
        self.values = vals
        self.active = act
        self._index = {n: i for i, n in enumerate(names)}

    @classmethod
    def for_scheme(cls, scheme: Scheme | str, **values: float) -> ParamVector:
        """Full seven-component vector; unset components default to NaN."""
        scheme = Scheme(scheme)
        unknown = set(values) - set(PARAM_NAMES)
        if unknown:
            raise KeyError(f"unknown parameter(s): {sorted(unknown)}")
        vals = [values.get(n, math.nan) for n in PARAM_NAMES]
        return cls(vals, PARAM_NAMES, scheme.active)

    def __getitem__(self, name: str) -> float:
        return float(self.values[self._index[name]])

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def is_active(self, name: str) -> bool:
        i = self._index.get(name)
        return i is not None and bool(self.active[i])

    @property
    def active_names(self) -> tuple[str, ...]:
        return tuple(n for n, a in zip(self.names, self.active) if a)

    @property
    def active_values(self) -> np.ndarray:
        return self.values[self.active]

    def with_active(self, new_values) -> ParamVector:
        vals = self.values.copy()
        vals[self.active] = new_values
        return ParamVector(vals, self.names, self.active)

    def with_values(self, **updates: float) -> ParamVector:
        vals = self.values.copy()
        for k, v in updates.items():
            vals[self._index[k]] = v
        return ParamVector(vals, self.names, self.active)

    def as_dict(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(self.names, self.values)}

    def __eq__(self, other):
        if not isinstance(other, ParamVector):
            return NotImplemented
        return (
            self.names == other.names
            and np.array_equal(self.values, other.values, equal_nan=True)
            and np.array_equal(self.active, other.active)
        )

    def __repr__(self):
        body = ", ".join(
            f"{n}={v:.6g}" + ("" if a else "*")
            for n, v, a in zip(self.names, self.values, self.active)
        )
        return f"ParamVector({body})"


SIGMA3_PRIORS = ("flat-log", "jeffreys-style")


@dataclass(frozen=True)
class PriorSpec:
    """Prior supports and the choice of prior on the 2x2 covariance.

    ``sigma3_prior``:

    * ``"flat-log"`` -- ``1/sigma11 * 1/sigma22``, flat on rho;
    * ``"jeffreys-style"`` -- ``|Sigma3|^{-3/2}`` expressed in
      (sigma11, sigma22, rho) coordinates, i.e. times the Jacobian
      ``sqrt(sigma11 * sigma22)``.

    All supports are open intervals.
    """

    q_bounds: tuple[tuple[float, float], ...] = ((0.0, 1e6), (0.0, 1e6))
    s_bounds: tuple[tuple[float, float], ...] = ((1.7, 2.3), (0.0, math.pi / 2))
    sigma3_prior: str = "flat-log"

    def __post_init__(self):
        for lo, hi in self.q_bounds:
            if lo < 0 or not lo < hi:
                raise DomainError(f"bad q bounds ({lo}, {hi})")
        for lo, hi in self.s_bounds:
            if not lo < hi:
                raise DomainError(f"bad s bounds ({lo}, {hi})")
        if self.sigma3_prior not in SIGMA3_PRIORS:
            raise DomainError(
                f"sigma3_prior must be one of {SIGMA3_PRIORS}, got {self.sigma3_prior!r}"
            )


def _uniform(x: float, lo: float, hi: float) -> float:
    if lo < x < hi:
        return -math.log(hi - lo) if math.isfinite(hi - lo) else 0.0
    return -math.inf


def log_prior(p: ParamVector, spec: PriorSpec) -> float:
    """Sum of log-priors over the active components; -inf off support."""
    total = 0.0
    for name, (lo, hi) in zip(S_NAMES, spec.s_bounds):
        if p.is_active(name):
            total += _uniform(p[name], lo, hi)
    for name, (lo, hi) in zip(("q11", "q22"), spec.q_bounds):
        if p.is_active(name):
            total += _uniform(p[name], lo, hi)
    if total == -math.inf:
        return total
    if any(p.is_active(n) for n in ("sigma11", "sigma22", "rho")):
        s11, s22, rho = p["sigma11"], p["sigma22"], p["rho"]
        if not (s11 > 0 and s22 > 0 and -1 < rho < 1):
            return -math.inf
        if spec.sigma3_prior == "flat-log":
            total += -math.log(s11) - math.log(s22) - math.log(2.0)
        else:
            total += -1.5 * math.log(s11 * s22 * (1.0 - rho * rho)) + 0.5 * math.log(s11 * s22)
    return total


def _kernel(p: ParamVector | Mapping[str, float]) -> SqeKernelParams:
    return SqeKernelParams((p["q11"], p["q22"]))


def _sigma3(p: ParamVector | Mapping[str, float]) -> Sigma3Params:
    return Sigma3Params(p["sigma11"], p["sigma22"], p["rho"])


class TrainingPosterior:
    """Log-posterior of the five GP scalars given training data."""

    scheme = Scheme.TRAIN_ONLY

    def __init__(self, d, design, spec: PriorSpec | None = None, jitter: float = DEFAULT_JITTER):
        self.prepared = d if isinstance(d, PreparedData) else PreparedData(d, jitter)
        self.design = np.atleast_2d(np.asarray(design, dtype=np.float64))
        if self.design.shape[0] != self.prepared.dims[0]:
            raise ShapeError(
                f"{self.design.shape[0]} design points for "
                f"{self.prepared.dims[0]} mode-1 slices"
            )
        self.spec = spec or PriorSpec()
        self.jitter = jitter

    def log_likelihood(self, p: ParamVector) -> float:
        sigma1 = build_sqe_matrix(self.design, _kernel(p), self.jitter)
        sigma3 = build_sigma3(_sigma3(p), self.jitter)
        return self.prepared.loglik(sigma1, sigma3)

    def __call__(self, p: ParamVector) -> float:
        lp = log_prior(p, self.spec)
        if lp == -math.inf:
            return lp
        return lp + self.log_likelihood(p)


class JointPosterior(TrainingPosterior):
    """Log-posterior of (s_test, GP scalars) given training data plus test slice.

    ``d_star`` carries the test slice as its last mode-1 slice and
    ``design`` lists the points of the other slices.
    """

    scheme = Scheme.JOINT

    def __init__(self, d_star, design, spec: PriorSpec | None = None, jitter: float = DEFAULT_JITTER):
        prepared = d_star if isinstance(d_star, PreparedData) else PreparedData(d_star, jitter)
        design = np.atleast_2d(np.asarray(design, dtype=np.float64))
        if design.shape[0] + 1 != prepared.dims[0]:
            raise ShapeError(
                f"{design.shape[0]} design points + s_test for "
                f"{prepared.dims[0]} mode-1 slices"
            )
        self.prepared = prepared
        self.design = design
        self.spec = spec or PriorSpec()
        self.jitter = jitter

    def log_likelihood(self, p: ParamVector) -> float:
        pts = augmented_points(self.design, (p["s1"], p["s2"]))
        sigma1 = build_sqe_matrix(pts, _kernel(p), self.jitter)
        sigma3 = build_sigma3(_sigma3(p), self.jitter)
        return self.prepared.loglik(sigma1, sigma3)


class PredictivePosterior(JointPosterior):
    """Log posterior predictive of s_test at fixed GP scalars.

    ``fixed_gp`` maps ``q11, q22, sigma11, sigma22, rho`` to the values
    learnt from training data alone; the 2x2 covariance is built once.
    """

    scheme = Scheme.PREDICTIVE

    def __init__(
        self,
        d_star,
        design,
        fixed_gp: Mapping[str, float],
        spec: PriorSpec | None = None,
        jitter: float = DEFAULT_JITTER,
    ):
        super().__init__(d_star, design, spec, jitter)
        missing = [n for n in GP_NAMES if n not in fixed_gp]
        if missing:
            raise KeyError(f"fixed GP parameters missing: {missing}")
        self.fixed_gp = {n: float(fixed_gp[n]) for n in GP_NAMES}
        self.kernel = _kernel(self.fixed_gp)
        self.sigma3 = build_sigma3(_sigma3(self.fixed_gp), jitter)

    def log_likelihood(self, p: ParamVector) -> float:
        pts = augmented_points(self.design, (p["s1"], p["s2"]))
        sigma1 = build_sqe_matrix(pts, self.kernel, self.jitter)
        return self.prepared.loglik(sigma1, self.sigma3)


def log_posterior_training(p: ParamVector, d, design, spec: PriorSpec | None = None,
                           jitter: float = DEFAULT_JITTER) -> float:
    return TrainingPosterior(d, design, spec, jitter)(p)


def log_posterior_joint(p: ParamVector, d_star, design, spec: PriorSpec | None = None,
                        jitter: float = DEFAULT_JITTER) -> float:
    return JointPosterior(d_star, design, spec, jitter)(p)


def log_posterior_predictive(p: ParamVector, d_star, design, fixed_gp: Mapping[str, float],
                             spec: PriorSpec | None = None,
                             jitter: float = DEFAULT_JITTER) -> float:
    return PredictivePosterior(d_star, design, fixed_gp, spec, jitter)(p)


def make_target(scheme: Scheme | str, data, design, spec: PriorSpec | None = None,
                fixed_gp: Mapping[str, float] | None = None,
                jitter: float = DEFAULT_JITTER):
    scheme = Scheme(scheme)
    if scheme is Scheme.TRAIN_ONLY:
        return TrainingPosterior(data, design, spec, jitter)
    if scheme is Scheme.JOINT:
        return JointPosterior(data, design, spec, jitter)
    if fixed_gp is None:
        raise ValueError("the predictive scheme needs fixed GP parameters")
    return PredictivePosterior(data, design, fixed_gp, spec, jitter)
