"""Command-line entry points.

    tvgp simulate [--config FILE] [--set key=value ...]
    tvgp fit --scheme train-only|joint [--config FILE] [--set ...]
    tvgp predict [--config FILE] [--set ...]
    tvgp analyze TRACE.csv [--bins N] [--mass P] [--output-dir DIR]
    tvgp convert-units REPORT [--r-sun-kpc R] [--v0-kms V]

``TVGP_OUTPUT_DIR`` overrides the configured output directory.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from tvgp import analysis, io, units
from tvgp.errors import ParseError
from tvgp.posterior import GP_NAMES, ParamVector, Scheme, make_target
from tvgp.sampler import ChainConfig, Trace, default_proposal_sd, pilot_tune, run_chain
from tvgp.synthetic import GpParams, generate_dataset, make_polar_grid
from tvgp.tensor import DenseTensor

log = logging.getLogger("tvgp")

DEFAULT_INIT = {"q11": 1.0, "q22": 1.0, "sigma11": 1.0, "sigma22": 1.0, "rho": 0.0}


def chain_seed(seed: int, chain: int, stream: int = 0) -> int:
    """Independent per-chain seed; chain k's stream never depends on how many chains run."""
    ss = np.random.SeedSequence(seed, spawn_key=(chain, stream))
    return int(ss.generate_state(1, np.uint64)[0])


def cmd_simulate(cfg: io.RunConfig) -> dict[str, Path]:
    out = cfg.resolved_output_dir()
    out.mkdir(parents=True, exist_ok=True)
    grid = make_polar_grid(cfg.n_r, cfg.n_phi, cfg.r_range, cfg.phi_range)
    truth = GpParams(cfg.true_q11, cfg.true_q22, cfg.true_sigma11, cfg.true_sigma22, cfg.true_rho)
    ds = generate_dataset(
        grid, truth, cfg.m2, cfg.m3, seed=cfg.seed, s_test=cfg.s_test,
        r_range=cfg.r_range, phi_range=cfg.phi_range, jitter=cfg.jitter,
    )
    paths = {
        "augmented": out / "augmented.tensor",
        "training": out / "training.tensor",
        "test_slice": out / "test_slice.tensor",
        "design": out / "design.csv",
        "truth": out / "truth.txt",
    }
    io.write_tensor(ds.augmented, paths["augmented"], "training slices followed by the test slice")
    io.write_tensor(ds.training, paths["training"])
    io.write_tensor(ds.test_slice, paths["test_slice"])
    io.write_design(ds.design, paths["design"])
    manifest = {"s1": float(ds.s_test[0]), "s2": float(ds.s_test[1]), **truth.as_dict()}
    io.write_params(manifest, paths["truth"], f"seed = {cfg.seed}")
    log.info("wrote %s (dims %s)", paths["augmented"], ds.augmented.dims)
    return paths


@dataclass
class FitResult:
    traces: list[Trace]
    intervals: dict[str, analysis.HpdInterval]
    modes: dict[str, float]
    paths: dict[str, Path]


def _load_data(cfg: io.RunConfig, scheme: Scheme):
    if not cfg.training_tensor or not cfg.design:
        raise ParseError("configuration needs training_tensor and design")
    train = io.load_tensor(cfg.training_tensor)
    design = io.load_design(cfg.design)
    io.check_design(design, train)
    if scheme is Scheme.TRAIN_ONLY:
        return train, design
    if not cfg.test_slice:
        raise ParseError(f"scheme {scheme.value} needs test_slice")
    test = io.load_tensor(cfg.test_slice)
    if test.dims != train.dims[1:]:
        raise ParseError(f"test slice dims {test.dims} do not match training {train.dims[1:]}")
    d_star = DenseTensor(np.concatenate([train.array, test.array[None]], axis=0))
    return d_star, design


def _initial_point(cfg: io.RunConfig, scheme: Scheme, fixed_gp=None) -> ParamVector:
    values = dict(DEFAULT_INIT)
    values["s1"] = 0.5 * sum(cfg.s1_bounds)
    values["s2"] = 0.5 * sum(cfg.s2_bounds)
    if fixed_gp:
        values.update(fixed_gp)
    values.update(cfg.init)
    return ParamVector.for_scheme(scheme, **values)


def run_scheme(cfg: io.RunConfig, scheme: Scheme | str) -> FitResult:
    """Load data, sample the scheme's target, write traces and summaries."""
    scheme = Scheme(scheme)
    data, design = _load_data(cfg, scheme)
    fixed_gp = None
    if scheme is Scheme.PREDICTIVE:
        if not cfg.modal_params or not Path(cfg.modal_params).exists():
            raise FileNotFoundError(
                f"modal parameter file {cfg.modal_params!r} not found; run "
                "'fit --scheme train-only' first"
            )
        fixed_gp = io.load_params(cfg.modal_params)
    target = make_target(scheme, data, design, cfg.prior_spec, fixed_gp, cfg.jitter)
    init = _initial_point(cfg, scheme, fixed_gp)
    sd = dict(zip(init.active_names, default_proposal_sd(init)))
    sd.update({k: v for k, v in cfg.proposal_sd.items() if k in sd})
    proposal_sd = tuple(sd[n] for n in init.active_names)

    def one_chain(k: int) -> Trace:
        start, chain_sd = init, proposal_sd
        if cfg.pilot_iterations > 0:
            start, chain_sd, rates = pilot_tune(
                target, init, proposal_sd, chain_seed(cfg.seed, k, 1),
                cfg.pilot_iterations, cfg.pilot_rounds,
            )
            log.info("chain %d pilot acceptance rates: %s", k, ", ".join(f"{r:.3f}" for r in rates))
        chain_cfg = ChainConfig(
            seed=chain_seed(cfg.seed, k), iterations=cfg.iterations, init=start,
            proposal_sd=chain_sd, burn_in=cfg.burn_in, thin=cfg.thin,
        )
        return run_chain(target, chain_cfg)

    if cfg.chains > 1:
        with ThreadPoolExecutor(max_workers=cfg.chains) as pool:
            traces = list(pool.map(one_chain, range(cfg.chains)))
    else:
        traces = [one_chain(0)]

    out = cfg.resolved_output_dir()
    out.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}
    for k, tr in enumerate(traces):
        suffix = f"_chain{k}" if cfg.chains > 1 else ""
        p = out / f"trace_{scheme.value}{suffix}.csv"
        tr.to_csv(p)
        paths[f"trace{suffix}"] = p
        log.info("chain %d: %d samples, acceptance rate %.3f", k, len(tr), tr.acceptance_rate)

    intervals, modes, extra = summarize(traces, cfg.bins, cfg.mass, out, scheme.value)
    paths.update(extra)
    rows = dict(intervals)
    consts = units.UnitConstants(cfg.r_sun_kpc, cfg.v0_kms)
    rows.update(unit_rows(intervals, consts))
    report = analysis.format_report({scheme.value: rows}, mass=cfg.mass)
    paths["report"] = out / f"report_{scheme.value}.txt"
    paths["report"].write_text(report)
    if scheme is Scheme.TRAIN_ONLY:
        paths["modal"] = out / "modal_params.txt"
        io.write_params({n: modes[n] for n in GP_NAMES}, paths["modal"],
                        "histogram modes of the training-only chain")
    return FitResult(traces, intervals, modes, paths)


def summarize(traces, bins, mass, out: Path, label: str):
    names = traces[0].names
    pooled = np.vstack([t.samples for t in traces])
    intervals, modes, paths = {}, {}, {}
    for j, name in enumerate(names):
        col = pooled[:, j]
        intervals[name] = analysis.hpd(col, mass)
        modes[name] = analysis.mode_estimate(col, bins)
        p = out / f"hist_{label}_{name}.csv"
        analysis.write_histogram_csv(analysis.histogram(col, bins), p)
        paths[f"hist_{name}"] = p
    return intervals, modes, paths


def unit_rows(intervals, consts: units.UnitConstants) -> dict[str, analysis.HpdInterval]:
    rows = {}
    if "s1" in intervals and intervals["s1"].lower > 0:
        rows["omega_bar"] = units.convert_interval(intervals["s1"], "s1", consts)
    if "s2" in intervals:
        rows["bar_angle_deg"] = units.convert_interval(intervals["s2"], "s2", consts)
    return rows


def cmd_analyze(trace_path, bins=analysis.DEFAULT_BINS, mass=0.95, output_dir=None) -> dict[str, Path]:
    trace = Trace.from_csv(trace_path)
    trace_path = Path(trace_path)
    out = Path(output_dir) if output_dir else trace_path.parent
    out.mkdir(parents=True, exist_ok=True)
    intervals, _, paths = summarize([trace], bins, mass, out, trace_path.stem)
    paths["report"] = out / f"{trace_path.stem}_report.txt"
    paths["report"].write_text(analysis.format_report({trace_path.stem: intervals}, mass=mass))
    return paths


def cmd_convert_units(report_path, consts: units.UnitConstants = units.UnitConstants()) -> str:
    mass, columns = analysis.parse_report(Path(report_path).read_text())
    converted = {s: unit_rows(col, consts) for s, col in columns.items()}
    return analysis.format_report(converted, names=["omega_bar", "bar_angle_deg"], mass=mass)


def _config_from_args(args) -> io.RunConfig:
    cfg = io.load_config(args.config, args.set)
    if getattr(args, "output_dir", None):
        cfg.output_dir = args.output_dir
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tvgp", description="Tensor-variate GP fitting and MCMC inference of an unknown input.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", "-c", help="key = value configuration file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override one configuration key (repeatable)")
        p.add_argument("--output-dir", help="output directory")

    add_config(sub.add_parser("simulate", help="write a synthetic dataset"))
    p_fit = sub.add_parser("fit", help="sample the training-only or joint posterior")
    add_config(p_fit)
    p_fit.add_argument("--scheme", choices=[Scheme.TRAIN_ONLY.value, Scheme.JOINT.value],
                       default=None)
    add_config(sub.add_parser("predict", help="sample the posterior predictive of s_test"))

    p_an = sub.add_parser("analyze", help="HPD report and histograms from a trace CSV")
    p_an.add_argument("trace")
    p_an.add_argument("--bins", type=int, default=analysis.DEFAULT_BINS)
    p_an.add_argument("--mass", type=float, default=0.95)
    p_an.add_argument("--output-dir")

    p_cu = sub.add_parser("convert-units", help="convert s1/s2 rows of a report to Galactic units")
    p_cu.add_argument("report")
    p_cu.add_argument("--r-sun-kpc", type=float, default=8.0)
    p_cu.add_argument("--v0-kms", type=float, default=220.0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "simulate":
            paths = cmd_simulate(_config_from_args(args))
        elif args.command == "fit":
            cfg = _config_from_args(args)
            scheme = args.scheme or cfg.scheme
            if Scheme(scheme) is Scheme.PREDICTIVE:
                raise ParseError("use 'tvgp predict' for the predictive scheme")
            paths = run_scheme(cfg, scheme).paths
        elif args.command == "predict":
            paths = run_scheme(_config_from_args(args), Scheme.PREDICTIVE).paths
        elif args.command == "analyze":
            paths = cmd_analyze(args.trace, args.bins, args.mass, args.output_dir)
        else:
            sys.stdout.write(cmd_convert_units(
                args.report, units.UnitConstants(args.r_sun_kpc, args.v0_kms)))
            return 0
    except (ParseError, FileNotFoundError, ValueError, RuntimeError) as exc:
        print(f"tvgp: error: {exc}", file=sys.stderr)
        return 1
    for key, p in paths.items():
        print(f"{key}: {p}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
