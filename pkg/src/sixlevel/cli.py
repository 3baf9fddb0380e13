"""Command-line interface.

Subcommands: susceptibility, velocities, phases, gate, entangle, dynamics,
sweep, paper.  Single-point results are written as JSON, sweeps as
RFC-4180 CSV with 12-significant-digit scientific notation; identical
configs and flags produce byte-identical artifacts.

Exit codes: 0 success, 2 configuration/usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    RunConfig,
    SWEEP_QUANTITIES,
    load_config,
    paper_scenario,
    set_parameter,
)
from .dynamics import evolve, steady_state
from .entanglement import lambda_spectrum, partial_trace, residual_entanglement, \
    spin_flip, three_tangle, density_matrix
from .errors import ConfigError, NumericalError
from .gates import build_qpg, conjugate_on_trigger, equivalent_up_to_phase, \
    rotation, toffoli_reference
from .model import AtomParams, DriveParams
from .propagation import (
    PhaseTable,
    PulseGeometry,
    beta_factors,
    find_length_for_phase,
    group_velocities,
    phase_table,
    xi_factors,
)
from .susceptibility import (
    FieldIntensities,
    analytic_susceptibilities,
    signal_trigger_kerr,
    suppression_report,
    total_susceptibilities,
)

OUTPUT_DIR_ENV = "SIXLEVEL_OUT"


# ---------------------------------------------------------------------------
# serialization helpers

def _json_safe(value):
    """Map values onto deterministic JSON; non-finite floats -> 'undefined'."""
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, complex):
        return [_json_safe(value.real), _json_safe(value.imag)]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else "undefined"
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def _write_json(out_dir: Path, name: str, payload: dict) -> Path:
    path = out_dir / name
    path.write_text(
        json.dumps(_json_safe(payload), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return path


def _fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if not math.isfinite(value):
        return "undefined"
    return f"{value:.12e}"


def _write_csv(out_dir: Path, name: str, header: list[str], rows) -> Path:
    path = out_dir / name
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt_cell(v) for v in row])
    return path


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(OUTPUT_DIR_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _need_config(args) -> RunConfig:
    if not args.config:
        raise ConfigError("this subcommand requires --config PATH")
    return load_config(args.config)


def _need_geometry(cfg: RunConfig) -> PulseGeometry:
    if cfg.geometry is None:
        raise ConfigError("this subcommand requires a 'geometry' section in the config")
    return cfg.geometry


# ---------------------------------------------------------------------------
# payload builders (shared by single-point subcommands and the sweep)

def _susceptibility_payload(drive: DriveParams, atom: AtomParams) -> dict:
    chi = analytic_susceptibilities(drive, atom)
    f = FieldIntensities.from_drive(drive, atom)
    chi_p, chi_s, chi_t = total_susceptibilities(chi, f)
    rep = suppression_report(drive, atom)
    return {
        "coefficients": chi.as_dict(),
        "chi3_ST": signal_trigger_kerr(drive, atom),
        "totals": {"chi_P": chi_p, "chi_S": chi_s, "chi_T": chi_t},
        "intensities": {"e2_P": f.e2_P, "e2_S": f.e2_S, "e2_T": f.e2_T},
        "suppression": {
            "abs_d3": rep.abs_d3,
            "abs_d5": rep.abs_d5,
            "linear_magnitude": rep.linear_magnitude,
            "third_magnitude": rep.third_magnitude,
            "fifth_magnitude": rep.fifth_magnitude,
            "fifth_order_dominant": rep.fifth_order_dominant,
        },
    }


def _velocities_payload(drive: DriveParams, atom: AtomParams) -> dict:
    v = group_velocities(drive, atom, warn=False)
    b = beta_factors(drive, atom, warn=False)
    return {
        "vg_P": v.vg_P,
        "vg_S": v.vg_S,
        "vg_T": v.vg_T,
        "max_mismatch": v.max_mismatch,
        "beta1": b.beta1,
        "beta2": b.beta2,
        "beta": b.beta,
    }


def _phases_payload(drive: DriveParams, atom: AtomParams, geom: PulseGeometry) -> dict:
    table = phase_table(drive, atom, geom)
    v = group_velocities(drive, atom, warn=False)
    xi = xi_factors(v, geom)
    return {
        "table": table.to_dict(),
        "three_body_phase": table.three_body_phase(),
        "xi": {
            "xi_PS": xi.xi_PS, "xi_PT": xi.xi_PT, "xi_ST": xi.xi_ST,
            "xi_PST": xi.xi_PST, "xi_SPT": xi.xi_SPT, "xi_TPS": xi.xi_TPS,
        },
    }


def _gate_payload(table: PhaseTable) -> dict:
    gate = build_qpg(table)
    conjugated = conjugate_on_trigger(gate, rotation(math.pi / 2, math.pi))
    verdict = equivalent_up_to_phase(
        conjugated, toffoli_reference(), mode="local-diagonal", tol=1e-12
    )
    return {
        "matrix": [[gate[i, j] for j in range(8)] for i in range(8)],
        "toffoli_equivalence": {
            "equivalent": verdict.equivalent,
            "mode": verdict.mode,
            "global_phase": verdict.global_phase,
            "left_phases": verdict.left_phases,
            "right_phases": verdict.right_phases,
            "residual": verdict.residual,
        },
    }


def _entangle_payload(amp: np.ndarray) -> dict:
    rho = density_matrix(amp)
    lam = {}
    for keep in ("PS", "PT"):
        reduced = partial_trace(rho, keep)
        lam[keep] = list(lambda_spectrum(reduced, spin_flip(reduced)))
    return {
        "zeta": residual_entanglement(amp),
        "three_tangle": three_tangle(amp),
        "lambda_PS": lam["PS"],
        "lambda_PT": lam["PT"],
    }


# ---------------------------------------------------------------------------
# subcommand handlers

def _single_point_out(args, name: str, payload: dict) -> None:
    out_dir = _out_dir(args)
    if getattr(args, "format", "json") == "csv":
        flat: dict[str, object] = {}

        def walk(prefix: str, value) -> None:
            if isinstance(value, dict):
                for k, v in value.items():
                    walk(f"{prefix}{k}." if prefix else f"{k}.", v)
            elif isinstance(value, complex):
                flat[prefix.rstrip(".") + ".re"] = value.real
                flat[prefix.rstrip(".") + ".im"] = value.imag
            elif isinstance(value, (list, tuple)):
                for i, v in enumerate(value):
                    walk(f"{prefix}{i}.", v)
            else:
                flat[prefix.rstrip(".")] = value

        walk("", payload)
        keys = sorted(flat)
        path = _write_csv(out_dir, f"{name}.csv", keys, [[flat[k] for k in keys]])
    else:
        path = _write_json(out_dir, f"{name}.json", payload)
    print(path)


def _cmd_susceptibility(args) -> int:
    cfg = _need_config(args)
    _single_point_out(args, "susceptibility",
                      _susceptibility_payload(cfg.drive, cfg.atom))
    return 0


def _cmd_velocities(args) -> int:
    cfg = _need_config(args)
    _single_point_out(args, "velocities", _velocities_payload(cfg.drive, cfg.atom))
    return 0


def _cmd_phases(args) -> int:
    cfg = _need_config(args)
    geom = _need_geometry(cfg)
    _single_point_out(args, "phases", _phases_payload(cfg.drive, cfg.atom, geom))
    return 0


def _cmd_gate(args) -> int:
    if args.table:
        try:
            data = json.loads(Path(args.table).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read phase table {args.table}: {exc}") from exc
        try:
            table = PhaseTable.from_dict(data)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        cfg = _need_config(args)
        table = phase_table(cfg.drive, cfg.atom, _need_geometry(cfg))
    path = _write_json(_out_dir(args), "gate.json", _gate_payload(table))
    print(path)
    return 0


def _cmd_entangle(args) -> int:
    try:
        data = json.loads(Path(args.state).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read state {args.state}: {exc}") from exc
    if (not isinstance(data, list) or len(data) != 8
            or not all(isinstance(p, list) and len(p) == 2 for p in data)):
        raise ConfigError("state file must hold a JSON array of 8 [re, im] pairs")
    amp = np.array([complex(p[0], p[1]) for p in data])
    try:
        payload = _entangle_payload(amp)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    path = _write_json(_out_dir(args), "entangle.json", payload)
    print(path)
    print(f"zeta = {payload['zeta']!r}")
    return 0


def _cmd_dynamics(args) -> int:
    cfg = _need_config(args)
    t_end = args.t_end
    if t_end is None:
        excited = max(cfg.atom.gamma[1], cfg.atom.gamma[3], cfg.atom.gamma[5])
        if excited <= 0:
            raise ConfigError("--t-end is required when all decay rates are zero")
        t_end = 100.0 / excited
    state0 = np.zeros(6, dtype=complex)
    state0[0] = 1.0
    traj = evolve(state0, cfg.drive, cfg.atom, t_end=t_end,
                  dt_max=args.dt_max, n_points=args.points)
    out_dir = _out_dir(args)
    path = out_dir / "trajectory.csv"
    traj.to_csv(path)
    steady = steady_state(cfg.drive, cfg.atom, warn=False)
    summary = {
        "t_end": t_end,
        "final_norm": float(np.sum(np.abs(traj.final_state) ** 2)),
        "distance_to_steady_state": float(np.linalg.norm(traj.final_state - steady)),
    }
    _write_json(out_dir, "dynamics.json", summary)
    print(path)
    return 0


_SWEEP_COLUMNS = {
    "susceptibilities": [
        "re_chi1_P", "im_chi1_P", "re_chi3_PS", "im_chi3_PS",
        "re_chi3_PT", "im_chi3_PT", "re_chi5_PST", "im_chi5_PST",
        "re_chi3_SP", "im_chi3_SP", "re_chi5_SPT", "im_chi5_SPT",
        "re_chi5_TPS", "im_chi5_TPS",
    ],
    "velocities": ["vg_P", "vg_S", "vg_T", "max_mismatch"],
    "phases": ["three_body_phase", "phi_P_111", "phi_S_111", "phi_T_111"],
}


def _sweep_point(cfg: RunConfig, quantity: str, paths: tuple[str, ...],
                 values: tuple[float, ...]):
    for path, value in zip(paths, values):
        cfg = set_parameter(cfg, path, value)
    if quantity == "susceptibilities":
        chi = analytic_susceptibilities(cfg.drive, cfg.atom)
        cells = []
        for value in chi.as_dict().values():
            cells += [value.real, value.imag]
        return cells
    if quantity == "velocities":
        v = group_velocities(cfg.drive, cfg.atom, warn=False)
        return [v.vg_P, v.vg_S, v.vg_T, v.max_mismatch]
    table = phase_table(cfg.drive, cfg.atom, cfg.geometry)
    return [
        table.three_body_phase(),
        table.field_phase(7, "P"),
        table.field_phase(7, "S"),
        table.field_phase(7, "T"),
    ]


def _cmd_sweep(args) -> int:
    cfg = _need_config(args)
    if cfg.sweep is None:
        raise ConfigError("sweep subcommand requires a 'sweep' section in the config")
    spec = cfg.sweep
    axis_values = []
    for axis in spec.axes:
        if axis.scale == "log":
            values = np.geomspace(axis.lo, axis.hi, axis.count)
        else:
            values = np.linspace(axis.lo, axis.hi, axis.count)
        axis_values.append([float(v) for v in values])
    paths = tuple(axis.path for axis in spec.axes)

    import itertools

    points = list(itertools.product(*axis_values))

    def evaluate(values):
        try:
            cells = _sweep_point(cfg, spec.quantity, paths, values)
            return list(values) + cells + ["ok"]
        except NumericalError as exc:
            blanks = [None] * len(_SWEEP_COLUMNS[spec.quantity])
            return list(values) + blanks + [f"error: {exc}"]

    if args.jobs and args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(evaluate, points))
    else:
        rows = [evaluate(p) for p in points]

    header = list(paths) + _SWEEP_COLUMNS[spec.quantity] + ["status"]
    path = _write_csv(_out_dir(args), "sweep.csv", header, rows)
    print(path)
    return 0


def _cmd_paper(args) -> int:
    cfg = paper_scenario()
    drive, atom, geom = cfg.drive, cfg.atom, cfg.geometry
    assert geom is not None

    payload: dict = {
        "velocities": _velocities_payload(drive, atom),
        "susceptibility": _susceptibility_payload(drive, atom),
        "phases_at_shipped_length": _phases_payload(drive, atom, geom),
    }

    target = 5.0 * math.pi
    length_star = find_length_for_phase(drive, atom, geom, target)
    from dataclasses import replace

    table_star = phase_table(drive, atom, replace(geom, length=length_star))
    gate = build_qpg(table_star)
    uniform = np.full(8, 1.0 / math.sqrt(8.0), dtype=complex)
    output_state = gate @ uniform
    payload["five_pi_point"] = {
        "target_phase": target,
        "length_star": length_star,
        "three_body_phase": table_star.three_body_phase(),
        "zeta": residual_entanglement(output_state),
        "three_tangle": three_tangle(output_state),
    }
    payload["toffoli"] = _gate_payload(table_star)["toffoli_equivalence"]

    out_dir = _out_dir(args)
    report = _write_json(out_dir, "paper_report.json", payload)

    lengths = np.linspace(geom.length / 10.0, 2.5 * length_star, 101)
    rows = []
    for L in lengths:
        t = phase_table(drive, atom, replace(geom, length=float(L)))
        out = build_qpg(t) @ uniform
        rows.append([float(L), t.three_body_phase(), residual_entanglement(out)])
    curve = _write_csv(out_dir, "phase_vs_length.csv",
                       ["length", "three_body_phase", "zeta"], rows)
    print(report)
    print(curve)
    return 0


# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sixlevel",
        description="Six-level EIT ladder: susceptibilities, slow light, "
                    "conditional phases, three-qubit gates and entanglement.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_format=False):
        p.add_argument("--config", help="path to a JSON run configuration")
        p.add_argument("--out", help=f"output directory (default: ${OUTPUT_DIR_ENV} or .)")
        p.add_argument("--jobs", type=int, default=1, help="worker threads for sweeps")
        if needs_format:
            p.add_argument("--format", choices=("json", "csv"), default="json",
                           help="artifact format for single-point results")

    add_common(sub.add_parser("susceptibility", help="closed-form susceptibilities"),
               needs_format=True)
    add_common(sub.add_parser("velocities", help="group velocities and beta factors"),
               needs_format=True)
    add_common(sub.add_parser("phases", help="per-polarization phase table"))
    p_gate = sub.add_parser("gate", help="8x8 phase gate and Toffoli verdict")
    add_common(p_gate)
    p_gate.add_argument("--table", help="phase-table JSON (otherwise built from config)")
    p_ent = sub.add_parser("entangle", help="three-way entanglement of a state")
    add_common(p_ent)
    p_ent.add_argument("--state", required=True,
                       help="JSON array of 8 [re, im] amplitude pairs")
    p_dyn = sub.add_parser("dynamics", help="integrate the amplitude equations")
    add_common(p_dyn)
    p_dyn.add_argument("--t-end", type=float, default=None, help="integration horizon, s")
    p_dyn.add_argument("--dt-max", type=float, default=None, help="step-size bound, s")
    p_dyn.add_argument("--points", type=int, default=501, help="stored sample count")
    add_common(sub.add_parser("sweep", help="Cartesian parameter sweep to CSV"))
    add_common(sub.add_parser("paper", help="bundled Rb-87 scenario report"))
    return parser


_HANDLERS = {
    "susceptibility": _cmd_susceptibility,
    "velocities": _cmd_velocities,
    "phases": _cmd_phases,
    "gate": _cmd_gate,
    "entangle": _cmd_entangle,
    "dynamics": _cmd_dynamics,
    "sweep": _cmd_sweep,
    "paper": _cmd_paper,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
