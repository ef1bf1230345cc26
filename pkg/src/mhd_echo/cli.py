"""``mhd-echo`` command-line entry point.

Exit codes: 0 success, 1 invalid input or configuration, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Callable

from . import records
from .analysis import LOWER_SLACK, fit_sqrt_scaling
from .config import SCHEMAS, ConfigError, ExperimentConfig, check, load_config_file, resolve
from .core import ModeIndex, PhysParams
from .growth import GrowthFactorQuery, L_analytic, U_sup_numeric, certifying_c_max
from .integrate import IntegrationError
from .lattice import TruncationPolicy, run_echo_chain
from .single_mode import default_t_end, evolve_single_mode, stability_bound, stability_ratio
from .sweep import INTERVAL_COLUMNS, SWEEP_COLUMNS, SweepSpec, make_weight, run_sweep
from .toy import toy_trajectory, toy_w_relation_residual
from .wave import WaveState, evolve_wave, wave_special_data

CHAIN_COLUMNS = (
    "k",
    "t_start",
    "t_end",
    "norm_in",
    "norm_out",
    "amplification",
    "envelope_upper",
    "envelope_lower",
    "hypotheses_met",
    "upper_hypotheses_met",
    "w_in",
    "w_out",
    "dominance",
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _emit_csv(path, columns, rows, config):
    if path is None:
        sys.stdout.write(records.csv_text(columns, rows, config))
    else:
        records.write_csv(path, columns, rows, config)


def _emit_json(path, payload, config):
    if path is None:
        sys.stdout.write(records.json_text(payload, config))
    else:
        records.write_json(path, payload, config)


def _phys(cfg: ExperimentConfig, with_c: bool = True) -> PhysParams:
    return PhysParams(cfg["alpha"], cfg["kappa"], cfg["c"] if with_c else 0.0)


# Each command validates everything first (ValueError -> exit 1), then runs.


def cmd_wave(cfg: ExperimentConfig):
    params = _phys(cfg, with_c=False)
    check(cfg["t_end"] > 0, "t_end must be > 0")
    check(cfg["rtol"] > 0, "rtol must be > 0")
    if cfg["special"]:
        check(params.alpha > 0, "special data needs alpha > 0")
        initial = wave_special_data(params)
    else:
        initial = WaveState(0.0, cfg["f0"], cfg["g0"])
    traj = evolve_wave(initial, params, cfg["t_end"], cfg["rtol"])
    rows = zip(traj.t.tolist(), traj.f.tolist(), traj.g.tolist(), traj.energy.tolist())
    _emit_csv(cfg["out"], ("t", "f", "g", "energy"), rows, cfg.recorded())


def cmd_single_mode(cfg: ExperimentConfig):
    params = _phys(cfg, with_c=False)
    mode = ModeIndex(cfg["k"], cfg["xi"])
    check(mode.k >= 1, "k must be >= 1")
    check(cfg["samples"] >= 1, "samples must be >= 1")
    t_end = cfg["t_end"] if cfg["t_end"] is not None else default_t_end(mode, params)
    check(t_end > 0, "t_end must be > 0")
    ratio = stability_ratio(mode, params, cfg["samples"], t_end, rtol=cfg["rtol"])
    bound = stability_bound(params)
    if cfg["out"] is not None:
        traj = evolve_single_mode(mode, params, cfg["w0"], cfg["j0"], t_end, rtol=cfg["rtol"])
        rows = zip(traj.t.tolist(), traj.w.tolist(), traj.j.tolist(), traj.energy.tolist())
        records.write_csv(cfg["out"], ("t", "w", "j", "energy"), rows, cfg.recorded())
    _emit_json(cfg["summary"], {"ratio": ratio, "bound": bound, "pass": ratio <= bound, "t_end": t_end}, cfg.recorded())


def cmd_toy(cfg: ExperimentConfig):
    params = _phys(cfg)
    check(cfg["k"] >= 1, "k must be >= 1")
    check(cfg["xi"] > 0, "xi must be > 0")
    traj = toy_trajectory(params, cfg["k"], cfg["xi"], rtol=cfg["rtol"])
    term = traj.terminal
    report = {
        "inputs": {"k": cfg["k"], "xi": cfg["xi"], "alpha": params.alpha, "kappa": params.kappa, "c": params.c},
        "terminal_state": {"t": term.t, "w_k": term.w_k, "j_k": term.j_k, "w_km1": term.w_km1, "j_km1": term.j_km1},
        "upper_bound": traj.upper_bound(),
        "lower_bound": traj.lower_bound(),
        "upper_quantity": traj.upper_quantity(),
        "pass_upper": traj.upper_quantity() <= traj.upper_bound(),
        "pass_lower": abs(term.w_km1) >= traj.lower_bound(),
        "wk_rel_residual": toy_w_relation_residual(traj),
        "certifying": traj.certifying,
        "violations": list(traj.violations),
    }
    _emit_json(cfg["out"], report, cfg.recorded())


def cmd_chain(cfg: ExperimentConfig):
    params = _phys(cfg)
    check(params.c > 0, "c must be > 0")
    check(cfg["xi"] > 0, "xi must be > 0")
    k_start = cfg["k_start"]
    check(k_start >= 1, "k_start must be >= 1")
    k_max = cfg["k_max"] if cfg["k_max"] is not None else k_start + 20
    policy = TruncationPolicy(k_max, cfg["tail_threshold"])
    policy.check_start(k_start)
    weight = make_weight(cfg["weight"], k_max, cfg["weight_s"])
    check(cfg["tol"] > 0, "tol must be > 0")
    chain = run_echo_chain(
        params,
        cfg["xi"],
        k_start,
        weight,
        policy,
        cfg["tol"],
        stop_at_lower_failure=cfg["stop_at_lower_failure"],
        k_stop=cfg["k_stop"],
        snapshots=cfg["snapshots"] is not None,
    )
    rows = [
        (
            r.k,
            r.t_start,
            r.t_end,
            r.norm_in,
            r.norm_out,
            r.amplification,
            r.envelope_upper,
            r.envelope_lower,
            r.lower_hypotheses_met,
            r.upper_hypotheses_met,
            r.w_in,
            r.w_out,
            r.dominance,
        )
        for r in chain
    ]
    _emit_csv(cfg["out"], CHAIN_COLUMNS, rows, cfg.recorded())
    if cfg["snapshots"] is not None:
        snaps = [{"t": s.t, "w": s.w, "j": s.j} for s in chain.snapshots]
        records.write_jsonl(cfg["snapshots"], snaps, cfg.recorded())


def cmd_growth_factor(cfg: ExperimentConfig):
    check(cfg["grid"] >= 8, "grid must be >= 8")
    queries = []
    for beta in cfg["beta_grid"]:
        c = cfg["c"] if cfg["c"] is not None else min(certifying_c_max(beta), 1e-4) if beta > 0 else math.nan
        for K in cfg["K_grid"]:
            queries.append(GrowthFactorQuery(beta, K, c))
    check(bool(queries), "beta_grid and K_grid must be non-empty")
    rows = []
    for q in queries:
        L = L_analytic(q)
        U = U_sup_numeric(q, cfg["grid"], rtol=cfg["rtol"])
        rows.append((q.beta, q.K, q.c, L, U, L - U, q.certifying))
    _emit_csv(cfg["out"], ("beta", "K", "c", "L_analytic", "U_numeric", "margin", "certifying"), rows, cfg.recorded())


def _sweep_spec(cfg: ExperimentConfig) -> SweepSpec:
    if cfg["xi_grid"] is not None:
        check(all(cfg[k] is None for k in ("xi_min", "xi_max", "n_xi")), "give either xi_grid or xi_min/xi_max/n_xi")
        grid = tuple(cfg["xi_grid"])
    else:
        check(all(cfg[k] is not None for k in ("xi_min", "xi_max", "n_xi")), "give xi_grid or all of xi_min, xi_max, n_xi")
        grid = SweepSpec.log_grid(cfg["xi_min"], cfg["xi_max"], cfg["n_xi"])
    return SweepSpec(
        xi_grid=grid,
        params=_phys(cfg),
        k_start=cfg["k_start"],
        k_max_pad=cfg["k_max_pad"],
        tail_threshold=cfg["tail_threshold"],
        tol=cfg["tol"],
        weight=cfg["weight"],
        weight_s=cfg["weight_s"],
        stop_at_lower_failure=cfg["stop_at_lower_failure"],
        worker_count=cfg["workers"],
    )


def cmd_sweep(cfg: ExperimentConfig, chain_fn: Callable = run_echo_chain):
    spec = _sweep_spec(cfg)
    result = run_sweep(spec, chain_fn)
    recorded = cfg.recorded()
    _emit_csv(cfg["out"], SWEEP_COLUMNS, [r.cells() for r in result.rows], recorded)
    if cfg["intervals"] is not None:
        rows = [iv for r in result.rows for iv in r.intervals]
        records.write_csv(cfg["intervals"], INTERVAL_COLUMNS, rows, recorded)
    if cfg["summary"] is not None:
        fit = result.fit
        payload = {
            "fit": None if fit is None else fit.__dict__,
            "fit_error": result.fit_error,
            "failed_xi": [r.xi for r in result.rows if not r.ok],
        }
        records.write_json(cfg["summary"], payload, recorded)
    if result.all_failed:
        raise IntegrationError("every xi in the sweep failed: " + "; ".join(r.error for r in result.rows))


def _analyze_inputs(paths):
    """Collect ``(xi, terminal amplification)`` points and annotated chain rows."""
    points, annotated = [], []
    for path in paths:
        try:
            config, rows = records.read_csv(path)
        except FileNotFoundError:
            raise ConfigError(f"input file not found: {path}") from None
        if not rows:
            continue
        cols = rows[0].keys()
        if "terminal_amplification" in cols:
            for r in rows:
                if not r["error"] and r["terminal_amplification"]:
                    points.append((float(r["xi"]), float(r["terminal_amplification"])))
        elif "amplification" in cols:
            if config is None or "xi" not in config:
                raise ConfigError(f"{path}: chain CSV without a recorded xi")
            xi = float(config["xi"])
            points.append((xi, abs(float(rows[-1]["w_out"]))))
            for r in rows:
                amp, up, low = float(r["amplification"]), float(r["envelope_upper"]), float(r["envelope_lower"])
                w_in, w_out = abs(float(r["w_in"])), abs(float(r["w_out"]))
                lower_ratio = w_out / (low * w_in) if low * w_in > 0 else math.nan
                hyp = r["hypotheses_met"] == "true"
                annotated.append(
                    (xi, int(r["k"]), amp, up, amp / up, lower_ratio, amp <= up, (lower_ratio >= LOWER_SLACK) if hyp else None, hyp)
                )
        else:
            raise ConfigError(f"{path}: neither a chain nor a sweep table")
    return points, annotated


def cmd_analyze(cfg: ExperimentConfig):
    check(bool(cfg["inputs"]), "no input files")
    points, annotated = _analyze_inputs(cfg["inputs"])
    if len(points) < 4:
        raise ConfigError(f"insufficient data points: need >= 4, got {len(points)}")
    fit = fit_sqrt_scaling(points)
    config = {"command": "analyze", "inputs": len(cfg["inputs"])}
    _emit_json(cfg["out"], {"fit": fit.__dict__, "points": sorted(points)}, config)
    if cfg["annotated"] is not None:
        columns = ("xi", "k", "amplification", "envelope_upper", "upper_ratio", "lower_ratio", "upper_pass", "lower_pass", "hypotheses_met")
        records.write_csv(cfg["annotated"], columns, sorted(annotated, key=lambda r: (r[0], -r[1])), config)


COMMANDS = {
    "wave": cmd_wave,
    "single-mode": cmd_single_mode,
    "toy": cmd_toy,
    "chain": cmd_chain,
    "growth-factor": cmd_growth_factor,
    "sweep": cmd_sweep,
    "analyze": cmd_analyze,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mhd-echo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, schema in SCHEMAS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML file or a previous output file with a recorded configuration")
        for key in schema:
            flag = "--in" if key.name == "inputs" else key.flag
            kwargs = dict(dest=key.name, default=argparse.SUPPRESS, help=key.help)
            if key.kind == "bool":
                p.add_argument(flag, action=argparse.BooleanOptionalAction, **kwargs)
            elif key.kind in ("floats", "paths"):
                p.add_argument(flag, nargs="+", type=float if key.kind == "floats" else str, **kwargs)
            else:
                p.add_argument(flag, type={"float": float, "int": int}.get(key.kind, str), **kwargs)
    return parser


def run_command(argv=None, *, chain_fn: Callable | None = None) -> int:
    try:
        args = vars(build_parser().parse_args(argv))
        command = args.pop("command")
        config_path = args.pop("config", None)
        file_values = load_config_file(config_path) if config_path else None
        cfg = resolve(command, file_values, args)
        if command == "sweep" and chain_fn is not None:
            cmd_sweep(cfg, chain_fn)
        else:
            COMMANDS[command](cfg)
    except IntegrationError as exc:
        print(f"mhd-echo: numerical failure: {exc}", file=sys.stderr)
        return 2
    except FloatingPointError as exc:
        print(f"mhd-echo: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"mhd-echo: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
