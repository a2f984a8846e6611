"""Command line front end.

Five subcommands cover the lab's workflows:

* ``budget``       evaluate one scenario's noise budget and fidelity
* ``sweep``        tabulate the budget over one or two config axes
* ``teleport``     Monte Carlo sampling of the digital protocol
* ``repeater``     weak-probe amplification of a distributed link
* ``kerr-validate`` fit the interaction rates of the probe circuit

All subcommands read the same JSON config (packaged reference values
when ``--config`` is omitted), emit JSON or CSV deterministically, and
echo the config hash and seed so outputs are traceable.  Exit codes:
0 success, 2 bad configuration, 3 physics regime violation.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import itertools
import json
import math
import sys
from importlib import resources
from typing import Any

import numpy as np

from . import budget as bd
from . import config as cf
from . import figures
from . import repeater as rp
from . import teleport as tp
from .kerr import RegimeError, extract_kerr


def _jsonable(value: Any) -> Any:
    """Strip numpy types and replace non-finite floats with null."""
    if isinstance(value, dict):
        return {key: _jsonable(v) for key, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        out = float(value)
        return out if math.isfinite(out) else None
    return value


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_text(out: str | None, text: str) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit(args: argparse.Namespace, meta: dict[str, Any], rows: list[dict[str, Any]],
          columns: list[str], key: str) -> None:
    """Serialize rows under the shared envelope; one row for scalar reports."""
    if args.format == "json":
        payload = dict(meta)
        payload[key] = _jsonable(rows if key == "rows" else rows[0])
        _write_text(args.out, json.dumps(payload, sort_keys=True, indent=2) + "\n")
        return
    buf = io.StringIO()
    for name in ("schema_version", "command", "config_hash", "seed"):
        buf.write(f"# {name}={meta[name]}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(_jsonable(row[c])) for c in columns])
    _write_text(args.out, buf.getvalue())


def _plot_path(args: argparse.Namespace) -> str | None:
    if args.plot is None:
        return None
    if args.plot:
        return args.plot
    if args.out:
        stem = args.out.rsplit(".", 1)[0]
        return stem + ".png"
    return f"{args.command.replace('-', '_')}.png"


def _load(args: argparse.Namespace) -> tuple[dict[str, Any], dict[str, Any]]:
    if args.config:
        cfg = cf.load_config(args.config)
    else:
        with resources.as_file(resources.files("mwteleport.data") / "reference.json") as path:
            cfg = cf.load_config(str(path))
    if args.seed is not None:
        cfg["seed"] = args.seed
    meta = {
        "schema_version": cf.SCHEMA_VERSION,
        "command": args.command,
        "config_hash": cf.canonical_hash(cfg),
        "seed": cfg["seed"],
    }
    return cfg, meta


_BUDGET_COLUMNS = ["delta_xi_prime2", "a_total", "xi", "fidelity", "a_j_max",
                   "attenuation_applied", "feasible", "classical"]


def _budget_row(cfg: dict[str, Any]) -> dict[str, Any]:
    lb = bd.scenario_budget(
        cf.epr_from_config(cfg),
        cf.channel_from_config(cfg),
        cf.chain_from_config(cfg),
        cf.feedforward_from_config(cfg),
    )
    return {name: getattr(lb, name) for name in _BUDGET_COLUMNS}


def cmd_budget(args: argparse.Namespace) -> int:
    cfg, meta = _load(args)
    row = _budget_row(cfg)
    _emit(args, meta, [row], _BUDGET_COLUMNS, "result")
    plot = _plot_path(args)
    if plot:
        figures.render_budget(row, plot)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg, meta = _load(args)
    axes = cfg["sweep"]["axes"]
    if not 1 <= len(axes) <= 2:
        raise cf.ConfigError("sweep.axes", f"need one or two axes, got {len(axes)}")
    for axis in axes:
        cf.resolve_axis_path(cfg, axis["path"])
    grids = [np.linspace(axis["start"], axis["stop"], axis["count"]) for axis in axes]
    names = [axis["path"] for axis in axes]
    rows = []
    for values in itertools.product(*grids):
        point = copy.deepcopy(cfg)
        for name, value in zip(names, values):
            cf.set_axis_value(point, name, float(value))
        row = dict(zip(names, (float(v) for v in values)))
        row.update(_budget_row(point))
        rows.append(row)
    _emit(args, meta, rows, names + _BUDGET_COLUMNS, "rows")
    plot = _plot_path(args)
    if plot:
        figures.render_sweep(axes, rows, plot)
    return 0


def cmd_teleport(args: argparse.Namespace) -> int:
    cfg, meta = _load(args)
    jpa = cf.jpa_from_config(cfg)
    ch = cf.channel_from_config(cfg)
    chain = cf.chain_from_config(cfg)
    splitter = cfg["epr"]["splitter_loss_db"]
    alpha_t = complex(*cfg["teleport"]["alpha_t"])
    batch = tp.batch_teleport(alpha_t, jpa, splitter, ch, chain,
                              cfg["teleport"]["n_runs"], seed=cfg["seed"])
    expected = tp.expected_fidelity(jpa, splitter, ch, chain)
    sigma = (abs(batch.fidelity_mean - expected) / batch.fidelity_stderr
             if batch.fidelity_stderr > 0 else math.inf)
    row = {
        "alpha_t_re": alpha_t.real,
        "alpha_t_im": alpha_t.imag,
        "n_runs": batch.n_runs,
        "fidelity_mean": batch.fidelity_mean,
        "fidelity_stderr": batch.fidelity_stderr,
        "fidelity_expected": expected,
        "deviation_sigma": sigma,
    }
    _emit(args, meta, [row], list(row), "result")
    plot = _plot_path(args)
    if plot:
        figures.render_teleport(batch.fidelities, expected, plot)
    return 0


def cmd_repeater(args: argparse.Namespace) -> int:
    cfg, meta = _load(args)
    sec = cfg["repeater"]
    report = rp.repeater_gain_report(
        sec["lam"], sec["eta_a"], sec["eta_b"],
        cf.repeater_amplifier_from_config(cfg), levels=sec["truncation"],
    )
    row: dict[str, Any] = {
        "lam": report.lam,
        "eta_a": report.eta_a,
        "eta_b": report.eta_b,
        "amplifier": report.amplifier,
        "gain": report.gain,
        "lam_eff": report.lam_eff,
        "eta_b_eff": report.eta_b_eff,
        "success_density": report.success_density,
        "success_prob": report.success_prob,
        "approximation_error": report.approximation_error,
        "levels": report.levels,
        "refinement_delta": report.refinement_delta,
        "truncation_weight": report.truncation_weight,
    }
    stages = {"before": report.before, "after": report.after,
              "after_averaged": report.after_averaged}
    nested = dict(row)
    flat = dict(row)
    for name, quality in stages.items():
        nested[name] = {"delta_xi2": quality.delta_xi2,
                        "delta_xi_perp2": quality.delta_xi_perp2}
        flat[f"{name}_delta_xi2"] = quality.delta_xi2
        flat[f"{name}_delta_xi_perp2"] = quality.delta_xi_perp2
    if args.format == "json":
        _emit(args, meta, [nested], list(nested), "result")
    else:
        _emit(args, meta, [flat], list(flat), "result")
    plot = _plot_path(args)
    if plot:
        figures.render_repeater(nested, plot)
    return 0


def cmd_kerr_validate(args: argparse.Namespace) -> int:
    cfg, meta = _load(args)
    sec = cfg["kerr"]
    system = cf.system_from_config(cfg)
    report = extract_kerr(system, sec.get("probe_time"), sec.get("n_samples"),
                          sec["residual_bound"])
    row = {
        "chi_stark": report.chi_stark,
        "chi_kerr": report.chi_kerr,
        "prediction": report.prediction,
        "ratio_to_fourth_order": report.ratio_to_fourth_order,
        "fit_residual": report.fit_residual,
        "probe_time": report.probe_time,
        "n_samples": report.n_samples,
        "ground_state_population": report.ground_state_population,
        "dispersive_ratio": report.dispersive_ratio,
    }
    _emit(args, meta, [row], list(row), "result")
    plot = _plot_path(args)
    if plot:
        figures.render_kerr(row, plot)
    return 0


_COMMANDS = {
    "budget": cmd_budget,
    "sweep": cmd_sweep,
    "teleport": cmd_teleport,
    "repeater": cmd_repeater,
    "kerr-validate": cmd_kerr_validate,
}


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="JSON config file (packaged reference when omitted)")
    shared.add_argument("--out", help="write the report here instead of stdout")
    shared.add_argument("--seed", type=int, help="override the config seed")
    shared.add_argument("--format", choices=("json", "csv"), default="json")
    shared.add_argument("--plot", nargs="?", const="",
                        help="also render a PNG (path optional: defaults next to --out)")
    parser = argparse.ArgumentParser(
        prog="mwteleport",
        description="noise budgets, sampled teleportation, and amplifier validation "
                    "for propagating microwave entanglement",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("budget", parents=[shared], help="evaluate one scenario")
    sub.add_parser("sweep", parents=[shared], help="tabulate budgets over config axes")
    sub.add_parser("teleport", parents=[shared], help="Monte Carlo protocol runs")
    sub.add_parser("repeater", parents=[shared], help="weak-probe link amplification")
    sub.add_parser("kerr-validate", parents=[shared], help="fit probe interaction rates")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except cf.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (RegimeError, tp.GridResolutionError) as exc:
        print(f"regime violation: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
