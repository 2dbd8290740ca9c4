#!/usr/bin/env python3
"""
Command-line entry point for the two-star ERGM lab.

Usage:
    python twostar_lab.py exact --n 3 --alpha 3 --h 0
    python twostar_lab.py verify ghs --n 4 --alpha 0:2:0.5 --h 0:2:0.5
    python twostar_lab.py phase --alpha 0:4:0.05 --h -4:1:0.05 --out phase.csv
    python twostar_lab.py mcmc --n 100 --alpha 1 --h 0 --chains 32 --sweeps 10000

Exit status: 0 when every verifier in the run passed, 1 when a verifier
failed or a computation raised, 2 for usage and configuration errors.
"""

from __future__ import annotations

import argparse
import itertools
import logging
import re
import sys
import time
from collections.abc import Callable
from pathlib import Path
from typing import Any

import numpy as np

from gibbs_exact import NORMALIZATION_TOL, build_system, free_energy, normalization_error, statistic_moments
from hamiltonians import ScalarParams
from mcmc import ChainSpec, coexistence_histogram, concavity_scan, exact_oracle, run_chains
from meanfield import (
    classify,
    critical_curve,
    curvature,
    finite_size_fixed_point,
    objective,
    phase_grid,
    residual,
)
from report_io import PHASE_COLUMNS, Report, emit, write_report
from run_config import COMMANDS, GRID_FIELDS, VERIFY_TARGETS, ConfigError, RunConfig
from verifiers import (
    atlas_summary,
    check_decomposition,
    conjecture_scan,
    derivative_density_check,
    derivative_ursell_check,
    doubled_expectation,
    mixture_expectation,
    mixture_weights,
    sweep_partition_submodularity,
    ursell_tensors,
    verify_alpha_sensitivity,
    verify_fkg_lattice,
    verify_fkg_monotone,
    verify_ghs_exhaustive,
    verify_gks_exhaustive,
    verify_ising_submodularity,
    verify_P_lattice,
    verify_sector_monotonicity,
    verify_u3_representation_all,
    verify_volume_monotonicity,
    verify_zv_inequalities,
)
from verifiers.duplication import MIXTURE_TOL
from verifiers.inequalities import DERIVATIVE_CAP, MONOTONE_AUDIT_CAP
from verifiers.reports import IdentityReport, combine

logger = logging.getLogger("twostar-lab")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------
def _systems(cfg: RunConfig):
    for params in cfg.params_grid():
        yield build_system(cfg.n, params, cap=cfg.enum_cap, workers=cfg.workers)


def _derivative_reports(sys_) -> list:
    reports = [*derivative_ursell_check(sys_), *derivative_density_check(sys_)]
    if sys_.wedges.pairs:
        wedge = sys_.wedges.pairs[0]
        reports.append(verify_alpha_sensitivity(sys_, wedge[:1], wedge))
    return reports


def _run_exact(cfg: RunConfig, report: Report) -> None:
    for sys_ in _systems(cfg):
        moments = statistic_moments(sys_)
        norm = normalization_error(sys_)
        record = sys_.param_record()
        record.update(
            log_z=sys_.log_z,
            free_energy=free_energy(sys_),
            edge_mean=moments["mean_edges"] / sys_.idx.m,
            **moments,
            normalization_error=norm,
        )
        report.verdicts.append(norm <= NORMALIZATION_TOL)
        if isinstance(sys_.params, ScalarParams) and sys_.k <= DERIVATIVE_CAP:
            for check in _derivative_reports(sys_):
                record[f"{check.tag}_error"] = check.max_error
                report.verdicts.append(check.passed)
        if cfg.model == "ergm-wedge":
            beta1, beta2 = sys_.params.betas
            exact = build_system(cfg.n, ScalarParams.from_betas(beta1, beta2, cfg.n), cap=cfg.enum_cap)
            asymptotic = build_system(cfg.n, ScalarParams.asymptotic_from_betas(beta1, beta2), cap=cfg.enum_cap)
            record["f_gap_exact"] = free_energy(sys_) - free_energy(exact)
            record["f_gap"] = free_energy(sys_) - free_energy(asymptotic)
        report.add(record)


def _run_ursell(cfg: RunConfig, report: Report) -> None:
    for sys_ in _systems(cfg):
        t = ursell_tensors(sys_)
        base = sys_.param_record()
        k = sys_.k
        for order, tensor in ((1, t.u1), (2, t.u2), (3, t.u3)):
            for combo in itertools.combinations_with_replacement(range(k), order):
                report.add({
                    **base,
                    "order": order,
                    "indices": "|".join(str(sys_.active[c]) for c in combo),
                    "value": float(tensor[combo]),
                })


def _edge_count(bits: np.ndarray) -> np.ndarray:
    return bits.sum(axis=1, dtype=np.float64)


def _duplication_reports(sys_) -> list:
    weights = mixture_weights(sys_)
    params = sys_.param_record()
    edges = sys_.active
    battery = [((), ()), (edges[:1], ()), ((), edges[:1]), (edges[:2], edges[2:3]), (edges[:1], edges[1:3])]
    worst, witness = 0.0, None
    for C, D in battery:
        err = abs(mixture_expectation(sys_, C, D, weights) - doubled_expectation(sys_, C, D))
        if err >= worst:
            worst, witness = err, (frozenset(C), frozenset(D))
    reports = [
        check_decomposition(sys_),
        IdentityReport(
            tag="mixture-total", params=params, max_error=abs(weights.total() - 1.0),
            tolerance=MIXTURE_TOL, checked=len(weights.sectors),
        ),
        IdentityReport(
            tag="mixture-identity", params=params, max_error=worst,
            tolerance=MIXTURE_TOL, witness=witness, checked=len(battery),
        ),
    ]
    if sys_.params.alpha >= 0 and sys_.params.h >= 0:
        reports.append(verify_zv_inequalities(sys_, edges[:2], edges[2:3]))
        reports.append(verify_sector_monotonicity(sys_, edges[:2], edges[-1:], edges[-1:], edges[-2:]))
    return reports


def _star_reports(sys_) -> list:
    """Lambda = first edge of each vertex star, A = the star, B = every active edge."""
    reports = []
    for v in range(sys_.n):
        star = [i for i, pair in enumerate(sys_.idx.pairs) if v in pair and i in sys_.active]
        if star:
            reports.append(verify_volume_monotonicity(sys_, star[:1], star, sys_.active))
    return reports


def _verify_reports(cfg: RunConfig, sys_) -> list:
    target = cfg.target
    if target == "gks":
        return [verify_gks_exhaustive(sys_, cfg.gks_size)]
    if target == "ghs":
        return [verify_ghs_exhaustive(sys_)]
    if target == "fkg-lattice":
        return [verify_fkg_lattice(sys_, seed=cfg.seed)]
    if target == "fkg":
        return [verify_fkg_monotone(sys_, _edge_count, _edge_count, declared=sys_.k > MONOTONE_AUDIT_CAP)]
    if target == "vol-mono":
        return [combine(_star_reports(sys_), "vol-mono", sys_.param_record())]
    if target == "part-submod":
        return [sweep_partition_submodularity(sys_)]
    if target == "duplication":
        return _duplication_reports(sys_)
    if target == "u3-repr":
        return [verify_u3_representation_all(sys_)]
    if target == "p-lattice":
        return [verify_P_lattice(mixture_weights(sys_), seed=cfg.seed), verify_ising_submodularity(sys_)]
    raise ConfigError(f"unknown verify target {target!r}")


def _run_verify(cfg: RunConfig, report: Report) -> None:
    for sys_ in _systems(cfg):
        for result in _verify_reports(cfg, sys_):
            report.add({"n": cfg.n, **result.to_record()})
            report.verdicts.append(result.passed)
    logger.info("verify %s: %d checks, %d failed", cfg.target, len(report.verdicts),
                sum(not v for v in report.verdicts))


def _run_phase(cfg: RunConfig, report: Report) -> None:
    report.columns = PHASE_COLUMNS
    report.extend(p.to_record() for p in phase_grid(cfg.alpha, cfg.h, cfg.workers))


def _run_fixpoint(cfg: RunConfig, report: Report) -> None:
    for a in cfg.alpha:
        for h in cfg.h:
            point = classify(a, h)
            for k, root in enumerate(point.roots):
                report.add({
                    "alpha": a,
                    "h": h,
                    "root_index": k,
                    "root": root,
                    "residual": residual(root, a, h),
                    "objective": objective(root, a, h),
                    "curvature": curvature(root, a),
                    "maximizer": root in point.maximizers,
                    "classification": point.classification,
                })


def _run_curve(cfg: RunConfig, report: Report) -> None:
    for a in cfg.alpha:
        report.add(critical_curve(a).to_record())


def _run_mcmc(cfg: RunConfig, report: Report) -> None:
    for a in cfg.alpha:
        for h in cfg.h:
            spec = ChainSpec(
                n=cfg.n, alpha=a, h=h, sweeps=cfg.sweeps, burn_in=cfg.burn_in, thinning=cfg.thinning,
                seed=cfg.seed, chains=cfg.chains, schedule=cfg.schedule,
            )
            summary = run_chains(spec)
            record = summary.to_record()
            point = classify(a, h)
            record["u_star"] = point.u_star
            record["finite_size_u"] = finite_size_fixed_point(cfg.n, a, h)
            record["classification"] = point.classification
            if point.classification == "unique":
                record["limiting_variance"] = point.variances[0]
            if cfg.m <= cfg.enum_cap:
                record.update(exact_oracle(summary))
            report.add(record)


def _run_concavity(cfg: RunConfig, report: Report) -> None:
    template = ChainSpec(
        n=cfg.n, alpha=0.0, h=0.0, sweeps=cfg.sweeps, burn_in=cfg.burn_in, thinning=cfg.thinning,
        seed=cfg.seed, chains=cfg.chains, schedule=cfg.schedule,
    ) if cfg.mode == "mcmc" else None
    for a in cfg.alpha:
        scan = concavity_scan(a, cfg.h, cfg.n, mode=cfg.mode, chain_template=template)
        report.extend(p.to_record() for p in scan.points)
        report.verdicts.append(scan.passed)


def _run_coexistence(cfg: RunConfig, report: Report) -> None:
    for a in cfg.alpha:
        hist = coexistence_histogram(
            a, cfg.n, sweeps=cfg.sweeps, chains=cfg.chains, seed=cfg.seed,
            burn_in=cfg.burn_in, thinning=cfg.thinning, bins=cfg.bins,
        )
        report.extend({"n": cfg.n, **r} for r in hist.to_records())
        report.notes.setdefault("coexistence", []).append({
            "alpha": a,
            "h": hist.h,
            "maximizers": list(hist.maximizers),
            "mean_from_empty": hist.mean_from_empty,
            "mean_from_full": hist.mean_from_full,
        })


def _run_conjecture(cfg: RunConfig, report: Report) -> None:
    points = conjecture_scan(cfg.n, cfg.params_grid(), workers=cfg.workers)
    report.extend({"n": cfg.n, **p.to_record()} for p in points)
    report.notes["atlas"] = atlas_summary(points)


_HANDLERS: dict[str, Callable[[RunConfig, Report], None]] = {
    "exact": _run_exact,
    "ursell": _run_ursell,
    "verify": _run_verify,
    "phase": _run_phase,
    "fixpoint": _run_fixpoint,
    "curve": _run_curve,
    "mcmc": _run_mcmc,
    "concavity": _run_concavity,
    "coexistence": _run_coexistence,
    "conjecture": _run_conjecture,
}


def dispatch(cfg: RunConfig) -> Report:
    """Route a validated config to its command and collect the report."""
    handler = _HANDLERS.get(cfg.command)
    if handler is None:
        raise ConfigError(f"unknown command {cfg.command!r}")
    report = Report(command=cfg.command if cfg.target is None else f"{cfg.command} {cfg.target}",
                    config=cfg.as_meta())
    t0 = time.monotonic()
    handler(cfg, report)
    report.elapsed_seconds = time.monotonic() - t0
    logger.info("%s finished: %d records in %.2fs", report.command, len(report.records), report.elapsed_seconds)
    return report


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------
_GRID_FLAGS = tuple(f"--{name}" for name in GRID_FIELDS)
_NEGATIVE_VALUE = re.compile(r"^-(\d|\.\d)")


def _join_negative_values(argv: list[str]) -> list[str]:
    """Turn ``--h -4:1:0.05`` into ``--h=-4:1:0.05`` so argparse takes it as a value."""
    out: list[str] = []
    skip = False
    for k, tok in enumerate(argv):
        if skip:
            skip = False
            continue
        nxt = argv[k + 1] if k + 1 < len(argv) else None
        if tok in _GRID_FLAGS and nxt is not None and _NEGATIVE_VALUE.match(nxt):
            out.append(f"{tok}={nxt}")
            skip = True
        else:
            out.append(tok)
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("--config", type=Path, help="YAML file with RunConfig fields; flags override it")
    common.add_argument("--n", type=int, help="vertex count (default: 4)")
    common.add_argument("--model", choices=("two-star", "ergm-wedge", "ergm-triangle"),
                        help="Hamiltonian family (default: two-star)")
    for name in GRID_FIELDS:
        common.add_argument(f"--{name}", help=f"{name} grid: start:stop:step, a,b,c or a single value")
    common.add_argument("--enum-cap", dest="enum_cap", type=int, help="enumeration cap in active edges")
    common.add_argument("--gks-size", dest="gks_size", type=int, help="subset size cap for GKS sweeps")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--workers", type=int, help="threads for enumeration and grid scans")
    common.add_argument("--chains", type=int, help="independent chains")
    common.add_argument("--sweeps", type=int, help="sweeps per chain, burn-in included")
    common.add_argument("--burn-in", dest="burn_in", type=int, help="discarded sweeps")
    common.add_argument("--thinning", type=int, help="sweeps between recorded samples")
    common.add_argument("--schedule", choices=("random", "matching", "auto"), help="heat-bath update order")
    common.add_argument("--mode", choices=("exact", "mcmc"), help="concavity scan mode")
    common.add_argument("--bins", type=int, help="histogram bins for the coexistence command")
    common.add_argument("--out", type=Path, help="output file (bare names go to $TWOSTAR_OUTPUT_DIR)")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), help="output format (default: csv)")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(
        prog="twostar_lab",
        description="Exact and Monte Carlo verification lab for the two-star random graph model",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        allow_abbrev=False,
        epilog="""
Examples:
  # Partition function, free energy and moments at n = 3
  python twostar_lab.py exact --n 3 --alpha 3 --h 0

  # GHS inequality over a grid, all triples
  python twostar_lab.py verify ghs --n 4 --alpha 0:2:0.5 --h 0:2:0.5

  # Plot-ready phase diagram
  python twostar_lab.py phase --alpha 0:4:0.05 --h -4:1:0.05 --out phase.csv

  # Edge-density histogram on the coexistence curve
  python twostar_lab.py coexistence --n 30 --alpha 3 --sweeps 4000 --chains 8 --bins 40
        """,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name in COMMANDS:
        cmd = sub.add_parser(name, parents=[common], allow_abbrev=False)
        if name == "verify":
            cmd.add_argument("target", choices=VERIFY_TARGETS)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values: dict[str, Any] = {
        key: value for key, value in vars(args).items()
        if key not in ("config", "verbose") and value is not None
    }
    if args.config is not None:
        return RunConfig.from_yaml(args.config, overrides=values)
    return RunConfig.from_mapping(values)


def main(argv: list[str] | None = None) -> int:
    """Main entry point; returns the exit status."""
    parser = build_parser()
    args = parser.parse_args(_join_negative_values(list(sys.argv[1:] if argv is None else argv)))
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        cfg = config_from_args(args)
    except ConfigError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2

    try:
        report = dispatch(cfg)
    except ConfigError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1

    path = cfg.output_path()
    try:
        if path is None:
            sys.stdout.buffer.write(emit(report, cfg.fmt))
            sys.stdout.flush()
        else:
            write_report(report, cfg.fmt, path)
            logger.info("Report written to %s", path)
    except OSError as e:
        print(f"Error: cannot write report: {e}", file=sys.stderr)
        return 1

    summary = report.summary()
    if summary["checks"]:
        logger.info("%d checks, %d failed: %s", summary["checks"], summary["failed"], summary["verdict"])
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
