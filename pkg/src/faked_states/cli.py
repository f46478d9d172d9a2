"""Command-line front end.

Commands::

    faked-states sweep-eta --from 0 --to 1 --steps 101
    faked-states security-region --eta-grid 0:1:51 --qber-grid 0:0.5:51
    faked-states audit curves.csv --qber 0.003 --dark-qber 0.001
    faked-states simulate run.toml
    faked-states qnd --phase 90 --resolution 0.01

Every command accepts ``--out PATH`` (default stdout) and
``--format {csv,summary}``.  Exit codes: 0 success, 2 usage or validation
error, 3 data or parse error, 4 infeasible computation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import montecarlo, qnd, security
from .analytics import AttackTiming, symmetric_curve_point
from .curves import (
    DEFAULT_FLOOR,
    DEFAULT_STEP,
    DetectorPair,
    GateCurve,
    TabulatedCurve,
    mismatch_eta,
    read_curve_file,
)
from .errors import ConfigError, InfeasibleError, ParseError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INFEASIBLE = 0, 2, 3, 4


def fmt(x) -> str:
    """Render a number with 9 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.9g}"
    return str(x)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _table_text(header, rows) -> str:
    cells = [list(header)] + [[fmt(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells) + "\n"


def _kv_text(pairs) -> str:
    width = max(len(k) for k, _ in pairs)
    return "\n".join(f"{k.ljust(width)}  {fmt(v)}" for k, v in pairs) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _grid(entry: str) -> np.ndarray:
    """Parse ``start:stop:num`` or a comma-separated list of values."""
    try:
        if ":" in entry:
            start, stop, num = entry.split(":")
            values = np.linspace(float(start), float(stop), int(num))
        else:
            values = np.array([float(v) for v in entry.split(",")])
    except ValueError:
        raise ConfigError(f"cannot parse grid {entry!r}") from None
    if values.size == 0 or np.any((values < 0) | (values > 1)):
        raise ConfigError(f"grid {entry!r} must be nonempty and within [0, 1]")
    return values


# -- sweep-eta -----------------------------------------------------------------

SWEEP_HEADER = ("eta", "qber", "i_ab", "i_ae")


def sweep_rows(start: float, stop: float, steps: int):
    if not (0.0 <= start < stop <= 1.0):
        raise ConfigError("need 0 <= from < to <= 1")
    if steps < 2:
        raise ConfigError("steps must be at least 2")
    return [(eta, *symmetric_curve_point(float(eta))) for eta in np.linspace(start, stop, steps)]


def cmd_sweep_eta(args) -> str:
    rows = sweep_rows(args.from_, args.to, args.steps)
    if args.format == "csv":
        return _csv_text(SWEEP_HEADER, rows)
    best = max(rows, key=lambda r: r[3] - r[2])
    return _table_text(SWEEP_HEADER, rows) + f"max i_ae - i_ab = {fmt(best[3] - best[2])} at eta = {fmt(best[0])}\n"


# -- security-region -------------------------------------------------------------

REGION_HEADER = ("eta", "qber", "region", "delta", "rate")


def region_rows(etas, qbers):
    rows = []
    for eta in etas:
        for q in qbers:
            a = security.classify(float(eta), float(q))
            rows.append((a.eta, a.measured_qber, str(a.region), a.delta, a.rate))
    return rows


def cmd_security_region(args) -> str:
    rows = region_rows(_grid(args.eta_grid), _grid(args.qber_grid))
    if args.format == "csv":
        return _csv_text(REGION_HEADER, rows)
    return _table_text(REGION_HEADER, rows)


# -- audit ---------------------------------------------------------------------

AUDIT_HEADER = (
    "eta",
    "t_min",
    "direction",
    "total_mismatch",
    "floor",
    "budget_exact",
    "budget_approx",
    "measured_qber",
    "dark_qber",
    "eve_qber",
    "delta",
    "rate",
    "region",
)


def audit_report(pair: DetectorPair, floor: float, dark_qber: float, measured_qber: float | None, step: float) -> dict:
    """Security audit of a characterised detector pair.

    ``budget_exact`` is the largest measured QBER keeping the corrected error
    rate below the privacy-amplification threshold; ``budget_approx`` is the
    linear rule of thumb ``0.11 * eta``.
    """
    if not floor > 0:
        raise ConfigError("floor must be positive")
    if not 0.0 <= dark_qber < 1.0:
        raise ConfigError("dark-qber must lie in [0, 1)")
    m = mismatch_eta(pair, floor=floor, step=step)
    report = {
        "eta": m.eta,
        "t_min": m.t,
        "direction": m.direction,
        "total_mismatch": m.total_mismatch,
        "floor": floor,
        "budget_exact": security.exact_qber_budget(m.eta),
        "budget_approx": security.approx_qber_budget(m.eta),
        "measured_qber": float("nan"),
        "dark_qber": dark_qber,
        "eve_qber": float("nan"),
        "delta": float("nan"),
        "rate": float("nan"),
        "region": "",
    }
    if measured_qber is not None:
        if not 0.0 <= measured_qber <= 1.0:
            raise ConfigError("qber must lie in [0, 1]")
        eve_qber = max(0.0, measured_qber - dark_qber)
        a = security.classify(m.eta, eve_qber)
        report.update(measured_qber=measured_qber, eve_qber=eve_qber, delta=a.delta, rate=a.rate, region=str(a.region))
    return report


def cmd_audit(args) -> str:
    pair = read_curve_file(args.curve_file, calibration=args.calibration)
    report = audit_report(pair, args.floor, args.dark_qber, args.qber, args.step)
    if args.format == "csv":
        return _csv_text(AUDIT_HEADER, [[report[k] for k in AUDIT_HEADER]])
    lines = _kv_text([(k, report[k]) for k in AUDIT_HEADER])
    if report["total_mismatch"]:
        lines += "total mismatch: one detector is blind while the other is sensitive; Eve can copy the key without errors\n"
    return lines


# -- simulate ------------------------------------------------------------------

SIM_DEFAULTS = {
    "n_pulses": 100_000,
    "seed": 0,
    "workers": 1,
    "channel_transmittance": 1.0,
    "alice_mu": "single",
    "nominal_arrival_time": 0.0,
    "double_click_policy": "random_assign",
}
DETECTOR_DEFAULTS = {"dark0": 0.0, "dark1": 0.0}
GATE_DEFAULTS = {"center": 0.0, "plateau_width": 2.0, "edge_scale": 0.05, "peak_efficiency": 0.1}
ATTACK_DEFAULTS = {"enabled": False, "t0": 0.0, "t1": 0.0, "mu_t0": "single", "mu_t1": "single"}


def _section(table: dict, name: str, defaults: dict, extra: tuple = ()) -> dict:
    values = table.get(name, {})
    if not isinstance(values, dict):
        raise ConfigError(f"[{name}] must be a table")
    unknown = set(values) - set(defaults) - set(extra)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(sorted(unknown))}")
    return {**defaults, **{k: v for k, v in values.items() if k in defaults}}


def _number(value, name: str, allow_single: bool = False):
    if allow_single and value == "single":
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number" + (' or "single"' if allow_single else ""))
    return value


def _curve_from_table(entry: dict, name: str, base: Path):
    if not isinstance(entry, dict):
        raise ConfigError(f"[detectors.{name}] must be a table")
    kind = entry.get("kind", "gate")
    allowed = {
        "gate": {"kind", *GATE_DEFAULTS},
        "tabulated": {"kind", "t", "eta"},
        "file": {"kind", "path", "column", "calibration"},
    }
    if kind not in allowed:
        raise ConfigError(f"detectors.{name}.kind must be one of gate, tabulated, file")
    unknown = set(entry) - allowed[kind]
    if unknown:
        raise ConfigError(f"unknown key(s) in [detectors.{name}]: {', '.join(sorted(unknown))}")
    try:
        if kind == "gate":
            params = {**GATE_DEFAULTS, **{k: v for k, v in entry.items() if k != "kind"}}
            return GateCurve(**{k: float(_number(v, f"detectors.{name}.{k}")) for k, v in params.items()})
        if kind == "tabulated":
            if "t" not in entry or "eta" not in entry:
                raise ConfigError(f"detectors.{name} needs t and eta arrays")
            return TabulatedCurve(entry["t"], entry["eta"])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"detectors.{name}: {exc}") from None
    if "path" not in entry:
        raise ConfigError(f"detectors.{name}.path is required for kind = \"file\"")
    path = (base / entry["path"]).resolve()
    if not path.exists():
        raise ConfigError(f"detectors.{name}.path: file {str(path)!r} does not exist")
    column = entry.get("column", "eta0" if name == "curve0" else "eta1")
    if column not in ("eta0", "eta1"):
        raise ConfigError(f"detectors.{name}.column must be eta0 or eta1")
    pair = read_curve_file(path, calibration=float(entry.get("calibration", 1.0)))
    return pair.curve0 if column == "eta0" else pair.curve1


def load_config(path: str | Path) -> tuple[montecarlo.SimConfig, int]:
    """Read a TOML run configuration; returns the config and the worker count.

    Raises:
        ConfigError: on unknown sections or keys, wrong types, or missing files.
    """
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file {str(path)!r} does not exist") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from None
    unknown = set(data) - {"simulation", "detectors", "attack"}
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")

    sim = _section(data, "simulation", SIM_DEFAULTS)
    det = _section(data, "detectors", DETECTOR_DEFAULTS, extra=("curve0", "curve1"))
    att = _section(data, "attack", ATTACK_DEFAULTS)
    raw_det = data.get("detectors", {})
    curves = [
        _curve_from_table(raw_det.get(name, {"kind": "gate"}), name, path.parent) for name in ("curve0", "curve1")
    ]

    for key in ("n_pulses", "seed", "workers"):
        if isinstance(sim[key], bool) or not isinstance(sim[key], int):
            raise ConfigError(f"simulation.{key} must be an integer")
    if sim["workers"] < 1:
        raise ConfigError("simulation.workers must be at least 1")
    if not isinstance(att["enabled"], bool):
        raise ConfigError("attack.enabled must be true or false")
    try:
        pair = DetectorPair(
            curves[0],
            curves[1],
            float(_number(det["dark0"], "detectors.dark0")),
            float(_number(det["dark1"], "detectors.dark1")),
        )
        timing = None
        if att["enabled"]:
            timing = AttackTiming(float(_number(att["t0"], "attack.t0")), float(_number(att["t1"], "attack.t1")))
        config = montecarlo.SimConfig(
            n_pulses=sim["n_pulses"],
            seed=sim["seed"],
            pair=pair,
            channel_transmittance=float(_number(sim["channel_transmittance"], "simulation.channel_transmittance")),
            alice_mu=_number(sim["alice_mu"], "simulation.alice_mu", allow_single=True),
            attack=timing,
            mu_t0=_number(att["mu_t0"], "attack.mu_t0", allow_single=True),
            mu_t1=_number(att["mu_t1"], "attack.mu_t1", allow_single=True),
            nominal_arrival_time=float(_number(sim["nominal_arrival_time"], "simulation.nominal_arrival_time")),
            double_click_policy=sim["double_click_policy"],
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return config, sim["workers"]


def _rounded(value):
    if isinstance(value, dict):
        return {k: _rounded(v) for k, v in value.items()}
    if isinstance(value, float):
        return None if math.isnan(value) else float(f"{value:.9g}")
    return value


def cmd_simulate(args) -> str:
    config, workers = load_config(args.config_file)
    stats = montecarlo.run(config, workers=workers).to_dict()
    if args.format == "summary":
        return json.dumps(_rounded(stats), indent=2, sort_keys=True) + "\n"
    flat = []
    for key, value in stats.items():
        if key == "coincidences":
            flat += [(f"coincidence_{k.replace(',', '_')}", v) for k, v in value.items()]
        else:
            flat.append((key, float("nan") if value is None else value))
    return _csv_text(("key", "value"), flat)


# -- qnd -----------------------------------------------------------------------

QND_HEADER = ("interval", "t_start", "t_end", "probability", "recovered_phase")


def qnd_rows(phase: float, resolution: float, bins: int, tau: float, bandwidth: float, omega0: float, t0: float | None):
    if bins < 1:
        raise ConfigError("bins must be positive")
    grid = qnd.TimeGrid.covering(tau, bins)
    state = qnd.make_qubit_state(phase, tau / 2 if t0 is None else t0, grid, omega0, bandwidth)
    rows = []
    for i in range(qnd.n_intervals(grid, resolution)):
        prob, collapsed = qnd.project_timing(state, i, resolution)
        start = grid.t_start + i * resolution
        end = min(start + resolution, grid.t_start + tau)
        phi = qnd.recovered_phase(collapsed) if collapsed is not None else float("nan")
        rows.append((i, start, end, prob, phi))
    return rows


def cmd_qnd(args) -> str:
    try:
        rows = qnd_rows(args.phase, args.resolution, args.bins, args.tau, args.bandwidth, args.omega0, args.t0)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
    if args.format == "csv":
        return _csv_text(QND_HEADER, rows)
    nonzero = [r for r in rows if r[3] > 0]
    return _kv_text(
        [
            ("intervals", len(rows)),
            ("nonzero_intervals", len(nonzero)),
            ("total_probability", math.fsum(r[3] for r in rows)),
            ("min_recovered_phase", min(r[4] for r in nonzero)),
            ("max_recovered_phase", max(r[4] for r in nonzero)),
        ]
    )


# -- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="faked-states", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_format="csv"):
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "summary"), default=default_format)

    p = sub.add_parser("sweep-eta", help="QBER and mutual informations versus eta (symmetric curves)")
    p.add_argument("--from", dest="from_", type=float, default=0.0)
    p.add_argument("--to", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=101)
    common(p)
    p.set_defaults(func=cmd_sweep_eta)

    p = sub.add_parser("security-region", help="classify (eta, QBER) grid points")
    p.add_argument("--eta-grid", default="0:1:21", help="start:stop:num or comma-separated values")
    p.add_argument("--qber-grid", default="0:0.5:21", help="start:stop:num or comma-separated values")
    common(p)
    p.set_defaults(func=cmd_security_region)

    p = sub.add_parser("audit", help="mismatch and QBER budget of a measured curve pair")
    p.add_argument("curve_file")
    p.add_argument("--floor", type=float, default=DEFAULT_FLOOR, help="relative efficiency floor")
    p.add_argument("--step", type=float, default=DEFAULT_STEP, help="sampling step in ns")
    p.add_argument("--calibration", type=float, default=1.0)
    p.add_argument("--qber", type=float, default=None, help="measured QBER")
    p.add_argument("--dark-qber", type=float, default=0.0, help="QBER share caused by dark counts")
    common(p, "summary")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("simulate", help="run the Monte Carlo simulator from a TOML config")
    p.add_argument("config_file")
    common(p, "summary")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("qnd", help="timing projector demonstration on a time-bin qubit")
    p.add_argument("--phase", type=float, default=0.0, help="degrees")
    p.add_argument("--resolution", type=float, default=0.01, help="ns, multiple of tau/bins")
    p.add_argument("--bins", type=int, default=1000, help="grid bins per pulse window")
    p.add_argument("--tau", type=float, default=1.0, help="pulse separation in ns")
    p.add_argument("--bandwidth", type=float, default=40.0, help="pulse bandwidth in 1/ns")
    p.add_argument("--omega0", type=float, default=100.0, help="carrier frequency in rad/ns")
    p.add_argument("--t0", type=float, default=None, help="first pulse peak in ns (default tau/2)")
    common(p)
    p.set_defaults(func=cmd_qnd)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _emit(args.func(args), args.out)
    except ConfigError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, FileNotFoundError, UnicodeDecodeError) as exc:
        print(f"{parser.prog} {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InfeasibleError as exc:
        print(f"{parser.prog} {args.command}: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
