"""Experiment runner: configs to trace files, bounds, sweeps.

Subcommands::

    dvopt run <config.json>
    dvopt bounds <name> [key=value ...]
    dvopt graph-info <schedule.json>
    dvopt sweep <config.json> --seeds S1 S2 ... --periods P1 P2 ...

Exit codes: 0 success, 1 validation/usage error, 2 runtime failure.

A config is a JSON object::

    {
      "seed": 1,
      "objective": {"kind": "ridge", "n": 20, "l": 20, "m": 10,
                    "c": 0.1, "noise": 0.1},
      "schedule": {...inline schedule...} | {"file": "sched.json"}
                  | {"alternating": {"kinds": ["star", "cycle"], "n": 20,
                                     "period": 50, "horizon": 1000}},
      "algorithms": ["nesterov", "dual_gd", "diging"],
      "max_iter": 1000,
      "record_every": 1,
      "output_dir": "out",
      "run_id": "optional-name",
      "overrides": {"diging_stepsize": 0.05}
    }

Objective kinds: ``ridge``, ``logistic`` (synthetic, fields n/l/m/c and
``noise`` for ridge), and ``dataset`` (fields path/n/c; sparse labeled
text file, samples shuffled evenly across agents).  One root seed drives
everything; the graph and data streams are derived from it with fixed
labels, so adding an algorithm never changes the generated instance.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import algorithms, graphs, metrics, theory
from .linalg import sqrt_psd
from .objectives import (
    AggregateObjective,
    LogisticObjective,
    centralized_solve,
    dual_constants,
    gen_logistic_instance,
    gen_ridge_instance,
    load_sparse_labeled,
)

__all__ = ["ExperimentConfig", "execute", "bounds_command", "graphinfo_command", "sweep", "main"]

_SEED_GRAPHS = 0x67727068  # "grph"
_SEED_DATA = 0x64617461  # "data"

ALGORITHMS = ("nesterov", "dual_gd", "diging")


class ValidationError(ValueError):
    """Bad config, bad arguments, or missing files."""


def _derive_seed(root: int, label: int) -> int:
    return int(root) ^ label


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    objective: dict
    schedule: dict
    algorithms: tuple[str, ...]
    max_iter: int
    record_every: int
    output_dir: str
    run_id: str
    overrides: dict

    @classmethod
    def from_dict(cls, raw: dict, base_dir: str = ".") -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ValidationError("config must be a JSON object")
        known = {
            "seed",
            "objective",
            "schedule",
            "algorithms",
            "max_iter",
            "record_every",
            "output_dir",
            "run_id",
            "overrides",
        }
        unknown = set(raw) - known
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}")
        for req in ("seed", "objective", "schedule", "algorithms", "max_iter"):
            if req not in raw:
                raise ValidationError(f"config missing required field '{req}'")
        algs = tuple(raw["algorithms"])
        if not algs:
            raise ValidationError("at least one algorithm required")
        bad = [a for a in algs if a not in ALGORITHMS]
        if bad:
            raise ValidationError(
                f"unknown algorithm name(s) {bad}; valid names: {list(ALGORITHMS)}"
            )
        max_iter = int(raw["max_iter"])
        if max_iter < 1:
            raise ValidationError("max_iter must be >= 1")
        record_every = int(raw.get("record_every", 1))
        if record_every < 1:
            raise ValidationError("record_every must be >= 1")
        sched = raw["schedule"]
        if isinstance(sched, dict) and "file" in sched:
            path = os.path.join(base_dir, sched["file"])
            if not os.path.exists(path):
                raise ValidationError(f"schedule file not found: {path}")
        obj = raw["objective"]
        if isinstance(obj, dict) and obj.get("kind") == "dataset":
            path = os.path.join(base_dir, obj.get("path", ""))
            if not os.path.exists(path):
                raise ValidationError(f"dataset file not found: {path}")
        seed = int(raw["seed"])
        return cls(
            seed=seed,
            objective=dict(obj),
            schedule=dict(sched) if isinstance(sched, dict) else sched,
            algorithms=algs,
            max_iter=max_iter,
            record_every=record_every,
            output_dir=str(raw.get("output_dir", ".")),
            run_id=str(raw.get("run_id", f"run{seed}")),
            overrides=dict(raw.get("overrides", {})),
        )


def _build_objective(cfg: ExperimentConfig) -> AggregateObjective:
    spec = cfg.objective
    kind = spec.get("kind")
    data_seed = _derive_seed(cfg.seed, _SEED_DATA)
    if kind == "ridge":
        return gen_ridge_instance(
            n=int(spec["n"]),
            l=int(spec["l"]),
            m=int(spec["m"]),
            c=float(spec.get("c", 0.1)),
            noise=float(spec.get("noise", 0.1)),
            seed=data_seed,
        )
    if kind == "logistic":
        return gen_logistic_instance(
            n=int(spec["n"]),
            l=int(spec["l"]),
            m=int(spec["m"]),
            c=float(spec["c"]),
            seed=data_seed,
        )
    if kind == "dataset":
        ds = load_sparse_labeled(spec["path"])
        n = int(spec["n"])
        c = float(spec["c"])
        dense, labels = ds.to_dense()
        total = dense.shape[0]
        per_agent = total // n
        if per_agent < 1:
            raise ValidationError(f"dataset has {total} samples, fewer than {n} agents")
        order = np.random.default_rng(data_seed).permutation(total)
        locs = []
        for i in range(n):
            rows = order[i * per_agent : (i + 1) * per_agent]
            locs.append(
                LogisticObjective(
                    dense[rows], labels[rows], ridge=c / n, scale=2.0 * n * per_agent
                )
            )
        return AggregateObjective(tuple(locs))
    raise ValidationError(f"unknown objective kind {kind!r}")


def _build_schedule(cfg: ExperimentConfig) -> graphs.GraphSchedule:
    spec = cfg.schedule
    if not isinstance(spec, dict):
        raise ValidationError("schedule must be an object")
    if "file" in spec:
        return graphs.load_schedule(spec["file"])
    if "alternating" in spec:
        alt = spec["alternating"]
        for req in ("kinds", "n", "period"):
            if req not in alt:
                raise ValidationError(f"alternating schedule missing '{req}'")
        kinds = tuple(alt["kinds"])
        if len(kinds) != 2:
            raise ValidationError("alternating schedule needs exactly two kinds")
        params = alt.get("params", (None, None))
        return graphs.alternating_schedule(
            kinds,
            n=int(alt["n"]),
            period=int(alt["period"]),
            horizon=int(alt.get("horizon", cfg.max_iter)),
            params=(params[0], params[1]),
            seed=int(alt.get("seed", _derive_seed(cfg.seed, _SEED_GRAPHS))),
        )
    return graphs.schedule_from_spec(spec)


_RUNNERS = {
    "nesterov": lambda agg, s, cfg: algorithms.run_distributed_nesterov(
        agg, s, max_iter=cfg.max_iter, record_every=cfg.record_every
    ),
    "dual_gd": lambda agg, s, cfg: algorithms.run_dual_gradient(
        agg, s, max_iter=cfg.max_iter, record_every=cfg.record_every
    ),
    "diging": lambda agg, s, cfg: algorithms.run_diging(
        agg,
        s,
        stepsize=cfg.overrides.get("diging_stepsize"),
        max_iter=cfg.max_iter,
        record_every=cfg.record_every,
    ),
}


def _accel_bound_verdict(rows, dc, radius, schedule):
    changes = schedule.change_iterations

    def bound(k):
        m_k = sum(1 for s in changes if s <= k)
        return theory.nesterov_tv_bound(dc.l_f, dc.mu_f, radius, m_k, k)

    report = metrics.bound_check(rows, bound)
    return {
        "clean": report.clean,
        "max_violation": report.max_violation,
        "first_violation_iter": report.first_violation_iter,
        "checked": report.checked,
    }


def _gd_contraction_verdict(trace, dc, x_star, schedule):
    # Static single-epoch schedules only: map the agent states back to
    # matrix space through the pseudo-inverse square root.
    from .graphs import laplacian
    from .linalg import eig_sym

    w = laplacian(schedule.topologies()[0])
    spec = eig_sym(w)
    lam = spec.eigenvalues
    inv_sqrt = np.where(lam > 1e-9 * lam[-1], 1.0 / np.sqrt(np.clip(lam, 1e-300, None)), 0.0)
    pinv_sqrt = (spec.eigenvectors * inv_sqrt) @ spec.eigenvectors.T
    radius = float(np.linalg.norm(x_star))
    rho = (dc.l_f - dc.mu_f) / (dc.l_f + dc.mu_f)
    worst = -math.inf
    first = None
    for rec in trace.records:
        if rec.z is None:
            continue
        x_k = -(rec.z @ pinv_sqrt)
        violation = float(np.linalg.norm(x_k - x_star)) - (rho**rec.iter * radius + 1e-10)
        if violation > worst:
            worst = violation
        if violation > 0 and first is None:
            first = rec.iter
    return {"clean": first is None, "max_violation": worst, "first_violation_iter": first}


def execute(config: ExperimentConfig) -> dict:
    """Run every configured algorithm and write traces plus a summary."""
    agg = _build_objective(config)
    schedule = _build_schedule(config)
    if schedule.n != agg.n:
        raise ValidationError(
            f"objective has {agg.n} agents but schedule has {schedule.n} nodes"
        )
    if config.max_iter > schedule.horizon:
        raise ValidationError("max_iter exceeds the schedule horizon")

    os.makedirs(config.output_dir, exist_ok=True)
    theta = graphs.theta_bounds(schedule)
    dc = dual_constants(agg, theta)
    m_changes, alpha = graphs.change_stats(schedule)
    per_epoch = [graphs.spectral_info(t) for t in schedule.topologies()]
    ceiling = theory.alg1_complexity(dc.kappa, 0.0, log_term=1.0).alpha_ceiling
    warnings = []
    if alpha >= ceiling:
        warnings.append(
            f"change fraction alpha={alpha:.6g} is at or above the admissible "
            f"ceiling {ceiling:.6g}; convergence is not guaranteed"
        )

    oracle = centralized_solve(agg, tol=1e-10)
    x_star = algorithms.solve_dual_min_norm(agg, schedule)
    radius = float(np.linalg.norm(x_star))

    summary: dict = {
        "run_id": config.run_id,
        "seed": config.seed,
        "dual_constants": {"mu_f": dc.mu_f, "L_f": dc.l_f, "kappa": dc.kappa},
        "theta": {"theta_max": theta[0], "theta_min": theta[1]},
        "per_epoch": [
            {
                "start": start,
                "lambda_max": info.lambda_max,
                "lambda_min_pos": info.lambda_min_pos,
                "chi": info.chi,
            }
            for (start, _), info in zip(schedule.epochs, per_epoch)
        ],
        "changes": {"m": m_changes, "alpha": alpha},
        "alpha_ceiling": ceiling,
        "alpha_feasible": alpha < ceiling,
        "phi_star": oracle[1],
        "dual_radius": radius,
        "warnings": warnings,
        "algorithms": {},
        "bounds": {},
        "files": [],
    }

    for name in config.algorithms:
        trace = _RUNNERS[name](agg, schedule, config)
        rows = metrics.compute_metrics(trace, agg, oracle)
        basename = f"{config.run_id}_{name}.csv"
        metrics.emit(rows, "csv", os.path.join(config.output_dir, basename))
        summary["files"].append(basename)
        last = rows[-1]
        summary["algorithms"][name] = {
            "aborted": trace.aborted,
            "final_iter": last.iter,
            "final_dual_residual": last.dual_residual,
            "final_primal_gap": last.primal_gap,
            "final_consensus_dist": last.consensus_dist,
        }
        if name == "nesterov":
            summary["bounds"]["accel_residual_bound"] = _accel_bound_verdict(
                rows, dc, radius, schedule
            )
        if name == "dual_gd" and len(schedule.epochs) == 1:
            summary["bounds"]["gd_contraction_bound"] = _gd_contraction_verdict(
                trace, dc, x_star, schedule
            )

    spath = os.path.join(config.output_dir, f"{config.run_id}_summary.json")
    with open(spath, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    summary["summary_path"] = spath
    return summary


# ---------------------------------------------------------------------------
# bounds subcommand

_UNICODE_KEYS = {
    "κ": "kappa",
    "κ̄": "kappa_bar",
    "kbar": "kappa_bar",
    "μ": "mu",
    "μ̄": "mu_bar",
    "mubar": "mu_bar",
    "ε": "eps",
    "α": "alpha",
    "δ": "delta",
    "χ": "chi",
    "λ2": "lambda2",
    "‖X*‖": "norm_xstar",
    "xstar": "norm_xstar",
    "logterm": "log_term",
}


def _parse_kv(pairs: list[str]) -> dict:
    out = {}
    for token in pairs:
        if "=" not in token:
            raise ValidationError(f"expected key=value, got {token!r}")
        key, _, val = token.partition("=")
        key = _UNICODE_KEYS.get(key, key)
        try:
            out[key] = float(val)
        except ValueError:
            raise ValidationError(f"non-numeric value in {token!r}") from None
    return out


def _need(kv: dict, *names) -> list[float]:
    missing = [n for n in names if n not in kv]
    if missing:
        raise ValidationError(f"missing constant(s): {', '.join(missing)}")
    return [kv[n] for n in names]


def bounds_command(name: str, kv: dict) -> list[theory.BoundReport]:
    """Evaluate one named bound from key=value constants."""
    reports = []
    if name == "cor1":
        l_s, mu, radius, eps = _need(kv, "L", "mu", "R", "eps")
        reports.append(
            theory.BoundReport("cor1.iterations", kv, theory.gd_iterations(l_s, mu, radius, eps))
        )
    elif name == "thm3":
        l_s, mu, radius, m, n_it = _need(kv, "L", "mu", "R", "m", "N")
        reports.append(
            theory.BoundReport(
                "thm3.residual_bound",
                kv,
                theory.nesterov_tv_bound(l_s, mu, radius, int(m), int(n_it)),
            )
        )
    elif name == "thm5":
        (kappa,) = _need(kv, "kappa")
        alpha = kv.get("alpha", 0.0)
        res = theory.alg1_complexity(
            kappa,
            alpha,
            l_smooth=kv.get("L"),
            mu=kv.get("mu"),
            radius=kv.get("R"),
            eps=kv.get("eps"),
            log_term=kv.get("log_term"),
        )
        reports.append(theory.BoundReport("thm5.iterations", kv, res.n_iters, res.feasible))
        reports.append(theory.BoundReport("thm5.alpha_ceiling", kv, res.alpha_ceiling))
    elif name == "cor2":
        (eps,) = _need(kv, "eps")
        if eps == 0.0:
            value = 0.0
        else:
            kappa, l_s, mu, nx = _need(kv, "kappa", "L", "mu", "norm_xstar")
            value = theory.primal_from_dual_bound(eps, kappa, l_s, mu, nx)
        reports.append(theory.BoundReport("cor2.primal_gap_bound", kv, value))
    elif name == "prop1":
        kbar, n = _need(kv, "kappa_bar", "n")
        lam0, lam = theory.diging_rates(
            kbar,
            int(n),
            b=int(kv.get("B", 1)),
            delta=kv.get("delta", 0.0),
            mu_bar=kv.get("mu_bar", 1.0),
            alpha=kv.get("alpha"),
        )
        reports.append(theory.BoundReport("prop1.lambda0", kv, lam0))
        if lam is not None:
            reports.append(theory.BoundReport("prop1.lambda_of_alpha", kv, lam))
    elif name == "prop2":
        (kappa,) = _need(kv, "kappa")
        lam0, alpha, lam = theory.panda_rates(
            kappa,
            l_smooth=kv.get("L", 1.0),
            mu=kv.get("mu", 1.0),
            delta=kv.get("delta", 0.0),
            b=int(kv.get("B", 1)),
            c=kv.get("c"),
        )
        reports.append(theory.BoundReport("prop2.lambda0", kv, lam0))
        reports.append(theory.BoundReport("prop2.alpha_step", kv, alpha))
        if lam is not None:
            reports.append(theory.BoundReport("prop2.lambda_of_c", kv, lam))
    elif name == "prop3":
        lam2, kphi, chi = _need(kv, "lambda2", "kappa_phi", "chi")
        verdict, lhs, rhs = theory.static_nesterov_comparison(lam2, kphi, chi)
        reports.append(theory.BoundReport("prop3.favors_dual_accelerated", kv, verdict))
        reports.append(theory.BoundReport("prop3.lhs", kv, lhs))
        reports.append(theory.BoundReport("prop3.rhs", kv, rhs))
    else:
        raise ValidationError(
            f"unknown bound {name!r}; valid: cor1, thm3, thm5, cor2, prop1, prop2, prop3"
        )
    return reports


def graphinfo_command(path) -> dict:
    """Spectral summary of a schedule file."""
    schedule = graphs.load_schedule(path)
    theta = graphs.theta_bounds(schedule)
    m_changes, alpha = graphs.change_stats(schedule)
    epochs = []
    for (start, topo) in schedule.epochs:
        info = graphs.spectral_info(topo)
        epochs.append(
            {
                "start": start,
                "n": topo.n,
                "edges": len(topo.edges),
                "lambda_max": info.lambda_max,
                "lambda_min_pos": info.lambda_min_pos,
                "chi": info.chi,
            }
        )
    return {
        "epochs": epochs,
        "theta_max": theta[0],
        "theta_min": theta[1],
        "m": m_changes,
        "alpha": alpha,
    }


def sweep(config: ExperimentConfig, seeds: list[int], periods: list[int]) -> list[dict]:
    """Run the alternating schedule for every (seed, period) cell."""
    if not seeds or not periods:
        raise ValidationError("sweep needs at least one seed and one period")
    if not (isinstance(config.schedule, dict) and "alternating" in config.schedule):
        raise ValidationError("sweep requires an 'alternating' schedule spec")
    table = []
    for seed in seeds:
        for period in periods:
            sched_spec = dict(config.schedule)
            alt = dict(sched_spec["alternating"])
            alt["period"] = int(period)
            sched_spec["alternating"] = alt
            cell = ExperimentConfig(
                seed=int(seed),
                objective=config.objective,
                schedule=sched_spec,
                algorithms=config.algorithms,
                max_iter=config.max_iter,
                record_every=config.record_every,
                output_dir=os.path.join(config.output_dir, f"s{seed}_p{period}"),
                run_id=f"{config.run_id}_s{seed}_p{period}",
                overrides=config.overrides,
            )
            summary = execute(cell)
            for name, stats in summary["algorithms"].items():
                table.append(
                    {
                        "seed": int(seed),
                        "period": int(period),
                        "algorithm": name,
                        "final_dual_residual": stats["final_dual_residual"],
                        "final_primal_gap": stats["final_primal_gap"],
                        "final_consensus_dist": stats["final_consensus_dist"],
                        "aborted": stats["aborted"],
                    }
                )
    return table


# ---------------------------------------------------------------------------
# entry point


def _cmd_run(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    config = ExperimentConfig.from_dict(raw, base_dir=os.path.dirname(args.config) or ".")
    summary = execute(config)
    print(f"run {summary['run_id']}: wrote {len(summary['files'])} trace file(s)")
    for w in summary["warnings"]:
        print(f"warning: {w}")
    for name, stats in summary["algorithms"].items():
        print(
            f"  {name}: final dual residual {stats['final_dual_residual']:.6g}, "
            f"primal gap {stats['final_primal_gap']:.6g}"
        )
    print(f"summary: {summary['summary_path']}")
    return 0


def _cmd_bounds(args) -> int:
    kv = _parse_kv(args.constants)
    for report in bounds_command(args.name, kv):
        echoed = " ".join(f"{k}={v:g}" for k, v in report.inputs.items())
        extra = "" if report.satisfied is None else f" feasible={report.satisfied}"
        print(f"{report.name} [{echoed}] = {report.value}{extra}")
    return 0


def _cmd_graphinfo(args) -> int:
    info = graphinfo_command(args.schedule)
    for e in info["epochs"]:
        print(
            f"epoch start={e['start']}: n={e['n']} edges={e['edges']} "
            f"lambda_max={e['lambda_max']:.6g} lambda_min_pos={e['lambda_min_pos']:.6g} "
            f"chi={e['chi']:.6g}"
        )
    print(
        f"theta_max={info['theta_max']:.6g} theta_min={info['theta_min']:.6g} "
        f"m={info['m']} alpha={info['alpha']:.6g}"
    )
    return 0


def _cmd_sweep(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    config = ExperimentConfig.from_dict(raw, base_dir=os.path.dirname(args.config) or ".")
    table = sweep(config, [int(s) for s in args.seeds], [int(p) for p in args.periods])
    header = f"{'seed':>6} {'period':>7} {'algorithm':>10} {'dual_residual':>14} {'primal_gap':>12} {'consensus':>12}"
    print(header)
    for row in table:
        print(
            f"{row['seed']:>6} {row['period']:>7} {row['algorithm']:>10} "
            f"{row['final_dual_residual']:>14.6g} {row['final_primal_gap']:>12.6g} "
            f"{row['final_consensus_dist']:>12.6g}"
        )
    out = os.path.join(config.output_dir, f"{config.run_id}_sweep.json")
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(table, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"sweep table: {out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dvopt",
        description="Decentralized optimization over time-varying graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config")
    p_run.set_defaults(func=_cmd_run)

    p_b = sub.add_parser("bounds", help="evaluate a closed-form bound")
    p_b.add_argument("name")
    p_b.add_argument("constants", nargs="*")
    p_b.set_defaults(func=_cmd_bounds)

    p_g = sub.add_parser("graph-info", help="spectral summary of a schedule file")
    p_g.add_argument("schedule")
    p_g.set_defaults(func=_cmd_graphinfo)

    p_s = sub.add_parser("sweep", help="seed x switching-period sweep")
    p_s.add_argument("config")
    p_s.add_argument("--seeds", nargs="+", required=True)
    p_s.add_argument("--periods", nargs="+", required=True)
    p_s.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ValidationError, ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - runtime failures exit with 2
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
