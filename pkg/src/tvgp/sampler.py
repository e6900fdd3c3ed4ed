"""Random-walk Metropolis-Hastings.

Each iteration perturbs every active component with an independent
Gaussian, evaluates the target once and accepts with probability
``min(1, exp(new - current))``. Proposals outside the prior support have
target ``-inf`` and are rejected; there is no reflection.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from tvgp.errors import DomainError, ParseError
from tvgp.posterior import ParamVector

Target = Callable[[ParamVector], float]

_CHUNK = 8192


class SamplerError(RuntimeError):
    """The target failed during a chain. ``point`` is the offending state."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


@dataclass(frozen=True)
class ChainConfig:
    seed: int
    iterations: int
    init: ParamVector
    proposal_sd: tuple[float, ...]
    burn_in: int = 0
    thin: int = 1

    def __post_init__(self):
        object.__setattr__(self, "proposal_sd", tuple(float(s) for s in self.proposal_sd))
        if self.iterations < 1:
            raise DomainError(f"iterations must be positive, got {self.iterations}")
        if not 0 <= self.burn_in < self.iterations:
            raise DomainError(
                f"burn_in must lie in [0, iterations), got {self.burn_in}"
            )
        if self.thin < 1:
            raise DomainError(f"thin must be positive, got {self.thin}")
        n_active = int(np.count_nonzero(self.init.active))
        if len(self.proposal_sd) != n_active:
            raise DomainError(
                f"{len(self.proposal_sd)} proposal sds for {n_active} active parameters"
            )
        if any(not (s >= 0 and math.isfinite(s)) for s in self.proposal_sd):
            raise DomainError(f"proposal sds must be finite and >= 0: {self.proposal_sd}")


@dataclass
class Trace:
    names: tuple[str, ...]
    iterations: np.ndarray
    samples: np.ndarray
    log_target: np.ndarray
    accept_count: int = 0
    proposal_count: int = 0
    config: ChainConfig | None = field(default=None, repr=False)

    def __post_init__(self):
        if not (len(self.iterations) == len(self.samples) == len(self.log_target)):
            raise ValueError("trace columns differ in length")

    def __len__(self):
        return len(self.log_target)

    @property
    def acceptance_rate(self) -> float:
        return self.accept_count / self.proposal_count if self.proposal_count else 0.0

    def column(self, name: str) -> np.ndarray:
        return self.samples[:, self.names.index(name)]

    def to_csv(self, path) -> None:
        write_trace_csv(self, path)

    @classmethod
    def from_csv(cls, path) -> Trace:
        return read_trace_csv(path)


def default_proposal_sd(p: ParamVector) -> tuple[float, ...]:
    """Per-parameter proposal scales for the seven-parameter layout.

    0.05 for input coordinates, 2% of the current value for inverse length
    scales, 0.02 for the 2x2 covariance parameters.
    """
    sds = []
    for name in p.active_names:
        if name.startswith("s") and not name.startswith("sigma"):
            sds.append(0.05)
        elif name.startswith("q"):
            sds.append(0.02 * abs(p[name]) if p[name] else 0.02)
        else:
            sds.append(0.02)
    return tuple(sds)


def propose(current: ParamVector, proposal_sd: Sequence[float], rng: np.random.Generator) -> ParamVector:
    """Gaussian random-walk proposal on the active components."""
    sd = np.asarray(proposal_sd, dtype=np.float64)
    step = sd * rng.standard_normal(len(sd))
    return current.with_active(current.active_values + step)


def accept_ratio(log_target_new: float, log_target_cur: float) -> float:
    """``min(1, exp(new - cur))``; 0 when the proposal has zero density."""
    if log_target_new == -math.inf:
        return 0.0
    return math.exp(min(0.0, log_target_new - log_target_cur))


def _evaluate(target: Target, p: ParamVector) -> float:
    try:
        value = float(target(p))
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        raise SamplerError(f"target failed at {p!r}: {exc}", point=p) from exc
    if math.isnan(value) or value == math.inf:
        raise SamplerError(f"target returned {value} at {p!r}", point=p)
    return value


def run_chain(target: Target, cfg: ChainConfig) -> Trace:
    """Run one chain. Identical ``cfg`` gives a bit-identical trace.

    States after ``burn_in`` iterations are stored every ``thin``-th
    iteration (iterations are numbered from 1).
    """
    rng = np.random.default_rng(cfg.seed)
    current = cfg.init
    cur_lp = _evaluate(target, current)
    if not math.isfinite(cur_lp):
        raise SamplerError(
            f"target is {cur_lp} at the initial point; choose another seed point",
            point=current,
        )
    sd = np.asarray(cfg.proposal_sd)
    k = len(sd)
    n_store = (cfg.iterations - cfg.burn_in) // cfg.thin
    names = current.active_names
    iters = np.empty(n_store, dtype=np.int64)
    samples = np.empty((n_store, k))
    log_target = np.empty(n_store)
    accepted = 0
    stored = 0
    cur_vals = current.active_values.copy()

    t = 0
    while t < cfg.iterations:
        chunk = min(_CHUNK, cfg.iterations - t)
        steps = rng.standard_normal((chunk, k)) * sd
        uniforms = rng.random(chunk)
        for i in range(chunk):
            t += 1
            prop_vals = cur_vals + steps[i]
            proposal = current.with_active(prop_vals)
            new_lp = _evaluate(target, proposal)
            if uniforms[i] <= accept_ratio(new_lp, cur_lp):
                current, cur_vals, cur_lp = proposal, prop_vals, new_lp
                accepted += 1
            if t > cfg.burn_in and (t - cfg.burn_in) % cfg.thin == 0:
                iters[stored] = t
                samples[stored] = cur_vals
                log_target[stored] = cur_lp
                stored += 1

    return Trace(
        names=names,
        iterations=iters,
        samples=samples,
        log_target=log_target,
        accept_count=accepted,
        proposal_count=cfg.iterations,
        config=cfg,
    )


def pilot_tune(
    target: Target,
    init: ParamVector,
    proposal_sd: Sequence[float],
    seed: int,
    iterations: int = 2000,
    rounds: int = 3,
) -> tuple[ParamVector, tuple[float, ...], list[float]]:
    """Short pilot chains that retune proposal scales before a main run.

    After each round the sds are reset to ``2.38 / sqrt(k)`` times the
    per-parameter sample sd of the pilot chain when the chain moved enough,
    otherwise rescaled by the acceptance rate. The main chain itself is
    plain RW-MH with the returned fixed scales.

    Returns the last pilot state, the tuned sds and per-round acceptance
    rates.
    """
    sd = np.asarray(proposal_sd, dtype=np.float64)
    k = len(sd)
    rates = []
    seeds = np.random.SeedSequence(seed).spawn(rounds)
    for r in range(rounds):
        cfg = ChainConfig(
            seed=int(seeds[r].generate_state(1)[0]),
            iterations=iterations,
            init=init,
            proposal_sd=tuple(sd),
        )
        trace = run_chain(target, cfg)
        rate = trace.acceptance_rate
        rates.append(rate)
        last = init.with_active(trace.samples[-1])
        spread = trace.samples.std(axis=0)
        if trace.accept_count >= 20 and np.all(spread > 0):
            sd = 2.38 / math.sqrt(k) * spread
        else:
            sd = sd * max(rate / 0.25, 0.1)
        init = last
    return init, tuple(float(s) for s in sd), rates


def write_trace_csv(trace: Trace, path) -> None:
    """CSV with header ``iter,<names...>,log_target``; floats use repr."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(",".join(["iter", *trace.names, "log_target"]) + "\n")
        for it, row, lt in zip(trace.iterations, trace.samples, trace.log_target):
            fh.write(",".join([str(int(it)), *(repr(float(v)) for v in row), repr(float(lt))]) + "\n")


def read_trace_csv(path) -> Trace:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty trace file", line=1, path=path) from None
        if len(header) < 3 or header[0] != "iter" or header[-1] != "log_target":
            raise ParseError(
                "header must be 'iter,<param names...>,log_target'", line=1, path=path
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"expected {len(header)} fields, got {len(row)}", line=lineno, path=path
                )
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno, path=path) from None
    arr = np.array(rows, dtype=np.float64).reshape(len(rows), len(header))
    return Trace(
        names=tuple(header[1:-1]),
        iterations=arr[:, 0].astype(np.int64),
        samples=arr[:, 1:-1].copy(),
        log_target=arr[:, -1].copy(),
    )


__all__ = [
    "ChainConfig",
    "SamplerError",
    "Trace",
    "accept_ratio",
    "default_proposal_sd",
    "pilot_tune",
    "propose",
    "read_trace_csv",
    "run_chain",
    "write_trace_csv",
]
