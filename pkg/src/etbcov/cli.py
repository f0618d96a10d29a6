"""Command line: ``etbcov run | compare | check``.

Configuration files are flat ``key = value`` lines grouped under
``[section]`` headers; ``#`` starts a comment.  Numbers may be written as
fractions (``dt = 1/60``).  Keys given before the first header may come
from any section.  Agents are listed as ``agent.N.pos = x,y`` and ordered by
``N``.
"""
import argparse
import dataclasses
import logging
import os
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import checks
from . import geometry as geo
from . import sim
from . import svgplot
from .density import DensityField, two_peak_field

log = logging.getLogger("etbcov")

BUNDLED_CONFIG = Path(__file__).with_name("eight_agents.cfg")

SECTIONS = {
    "scenario": ("controller", "duration", "dt", "s_max", "chords", "h_stride", "eps_move",
                 "dtb", "taud", "beta_min", "seed", "clamp"),
    "domain": ("vertices",),
    "density": ("kind", "value", "centers", "scale", "grid_file"),
    "agents": (),
    "output": ("out", "plots", "controllers"),
}
_AGENT_KEY = re.compile(r"agent\.(-?\d+)\.pos$")
_LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    scenario: sim.Scenario
    out: Path = Path("results")
    plots: bool = True
    controllers: tuple = ("etb-constant",)
    source: str = ""


# ---------------------------------------------------------------------------
# parsing


def _number(text):
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        return float(text)


def _point(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"expected x,y but got {text.strip()!r}")
    return (_number(parts[0]), _number(parts[1]))


def _points(text):
    return [_point(chunk) for chunk in text.split(";") if chunk.strip()]


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean but got {text.strip()!r}")


def _controllers(text):
    names = tuple(n.strip() for n in text.split(",") if n.strip())
    if not names:
        raise ValueError("empty controller list")
    for n in names:
        if n not in sim.CONTROLLERS:
            raise ValueError(f"unknown controller {n!r}; valid: {', '.join(sim.CONTROLLERS)}")
    return names


def _controller(text):
    names = _controllers(text)
    if len(names) != 1:
        raise ValueError("expected a single controller name")
    return names[0]


def _read_entries(path):
    """``{key: (value, line)}`` and ``{agent index: (x, y, line)}``."""
    entries = {}
    agents = {}
    section = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{path}:{lineno}"
        m = re.fullmatch(r"\[\s*([A-Za-z_]+)\s*\]", line)
        if m:
            section = m.group(1).lower()
            if section not in SECTIONS:
                raise ConfigError(f"{where}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        am = _AGENT_KEY.match(key)
        if am:
            if section not in (None, "agents"):
                raise ConfigError(f"{where}: agent positions belong in [agents]")
            idx = int(am.group(1))
            if idx in agents:
                raise ConfigError(f"{where}: duplicate entry for agent {idx}")
            try:
                agents[idx] = (*_point(value), lineno)
            except ValueError as exc:
                raise ConfigError(f"{where}: {exc}") from None
            continue
        allowed = SECTIONS[section] if section else sum(SECTIONS.values(), ())
        if key not in allowed:
            raise ConfigError(f"{where}: unknown key {key!r}" + (f" in [{section}]" if section else ""))
        if key in entries:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        entries[key] = (value, lineno)
    return entries, agents


def parse_config(path):
    """Validated :class:`RunConfig`; omitted fields take the scenario defaults."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"{path}: no such file")
    entries, agents = _read_entries(path)
    parsers = {
        "controller": _controller, "duration": _number, "dt": _number, "s_max": _number,
        "chords": lambda v: int(_number(v)), "h_stride": lambda v: int(_number(v)),
        "eps_move": _number, "dtb": _number, "taud": _number, "beta_min": _number, "seed": lambda v: int(_number(v)),
        "clamp": _bool, "vertices": _points, "kind": str, "value": _number, "centers": _points,
        "scale": _number, "grid_file": str, "out": Path, "plots": _bool, "controllers": _controllers,
    }
    values = {}
    for key, (raw, lineno) in entries.items():
        try:
            values[key] = parsers[key](raw)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {key}: {exc}") from None

    def fail(key, msg):
        line = entries[key][1] if key in entries else 0
        raise ConfigError(f"{path}:{line}: {msg}")

    Q = geo.rectangle(0.0, 0.0, 40.0, 40.0)
    if "vertices" in values:
        try:
            Q = geo.as_polygon(values["vertices"])
        except ValueError as exc:
            fail("vertices", f"vertices: {exc}")
        if Q.shape[0] < 3 or geo.convex_hull(Q).shape[0] != Q.shape[0]:
            fail("vertices", "domain must be a convex polygon with at least 3 vertices")

    density = _density(values, fail, path.parent)

    if agents:
        order = sorted(agents)
        positions = np.array([agents[i][:2] for i in order])
        seen = {}
        for i in order:
            x, y, lineno = agents[i]
            if (x, y) in seen:
                raise ConfigError(f"{path}:{lineno}: agent {i} duplicates the position of agent {seen[(x, y)]}")
            seen[(x, y)] = i
            if not geo.point_in_polygon((x, y), Q):
                raise ConfigError(f"{path}:{lineno}: agent {i} at ({x}, {y}) lies outside the domain")
    else:
        positions = np.array([Q.mean(axis=0)])

    kwargs = {"Q": Q, "density": density, "initial_positions": positions}
    rename = {"chords": "K"}
    for key in SECTIONS["scenario"]:
        if key in values:
            kwargs[rename.get(key, key)] = values[key]
    try:
        scenario = sim.Scenario(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    controllers = values.get("controllers", (scenario.controller,))
    return RunConfig(scenario, values.get("out", Path("results")), values.get("plots", True),
                     controllers, str(path))


def _density(values, fail, base):
    kind = values.get("kind")
    if kind is None:
        if any(k in values for k in ("value", "centers", "scale", "grid_file")):
            fail(next(k for k in ("value", "centers", "scale", "grid_file") if k in values),
                 "density parameters given without 'kind'")
        return two_peak_field()
    try:
        if kind == "uniform":
            return DensityField.uniform(values.get("value", 1.0))
        if kind == "exponentials":
            if "centers" not in values:
                fail("kind", "exponential density needs 'centers'")
            return DensityField.exponentials(values["centers"], values.get("scale", 100.0))
        if kind == "tabulated":
            if "grid_file" not in values:
                fail("kind", "tabulated density needs 'grid_file'")
            grid = Path(values["grid_file"])
            return DensityField.from_grid_file(grid if grid.is_absolute() else base / grid)
    except (ValueError, OSError) as exc:
        fail("kind", f"density: {exc}")
    fail("kind", f"unknown density kind {kind!r}; valid: uniform, exponentials, tabulated")


# ---------------------------------------------------------------------------
# commands


def _write_outputs(cfg, traces):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, tr in traces.items():
        sim.write_trace_csv(tr, out / f"trace_{name}.csv")
        sim.write_metrics_csv(tr, out / f"metrics_{name}.csv")
    if not cfg.plots:
        return
    svgplot.line_plot([(n, tr.times[tr.H_steps], tr.H_values) for n, tr in traces.items()],
                      out / "H.svg", "coverage cost H", "time [s]", "H")
    svgplot.line_plot([(n, tr.times, tr.msgs_cum) for n, tr in traces.items()],
                      out / "messages_cumulative.svg", "cumulative messages", "time [s]", "messages",
                      step=True)
    for n, tr in traces.items():
        svgplot.line_plot([(n, tr.times, tr.msgs_step)], out / f"messages_per_step_{n}.svg",
                          f"messages per step ({n})", "time [s]", "messages", step=True)
        svgplot.trajectory_plot(cfg.scenario.Q, tr.positions, out / f"trajectories_{n}.svg",
                                f"trajectories ({n})")


def _simulate(cfg):
    traces = {}
    for name in dict.fromkeys(cfg.controllers):
        sc = dataclasses.replace(cfg.scenario, controller=name)
        log.info("running %s for %.1f s", name, sc.duration)
        traces[name] = sim.run(sc)
    return traces


def cmd_run(cfg):
    traces = _simulate(cfg)
    _write_outputs(cfg, traces)
    for name, tr in traces.items():
        print(f"{name}: final H = {tr.H_values[-1]:.6g}, total messages = {tr.total_messages}")
    return 0


def summary_rows(controllers, traces):
    rows = []
    for a_i, a in enumerate(controllers):
        for b_i, b in enumerate(controllers):
            if a_i == b_i:
                continue
            ma, mb = traces[a].total_messages, traces[b].total_messages
            rows.append((a, b, ma, mb, sim.reduction(ma, mb)))
    return rows


def cmd_compare(cfg):
    if len(cfg.controllers) < 2:
        raise ConfigError("compare needs at least two controllers")
    traces = _simulate(cfg)
    _write_outputs(cfg, traces)
    rows = summary_rows(cfg.controllers, traces)
    width = max(len(c) for c in cfg.controllers)
    print(f"{'controller':<{width}}  {'vs':<{width}}  {'messages':>9}  {'reference':>9}  reduction")
    for a, b, ma, mb, red in rows:
        print(f"{a:<{width}}  {b:<{width}}  {ma:>9}  {mb:>9}  {red:8.1f}%")
    with open(Path(cfg.out) / "summary.csv", "w", newline="\n") as fh:
        fh.write("controller,reference,messages,reference_messages,reduction_pct\n")
        for a, b, ma, mb, red in rows:
            fh.write(f"{a},{b},{ma},{mb},{red:.4f}\n")
    return 0


def cmd_check(cfg, trace_path, controller=None):
    if controller is None:
        m = re.match(r"trace_(.+)\.csv$", Path(trace_path).name)
        controller = m.group(1) if m and m.group(1) in sim.CONTROLLERS else "etb-constant"
    rows = sim.read_trace_csv(trace_path)
    found = checks.check_trace(rows, cfg.scenario.Q, etb=controller.startswith("etb"))
    names = ["outside_domain", "receiver_set", "broadcast_sufficiency"]
    if controller.startswith("etb"):
        names += ["broadcast_on_speed_change", "promise_honesty"]
    for n in names:
        print(f"{n}: {found.get(n, 0)} violations")
    return 1 if any(found.values()) else 0


# ---------------------------------------------------------------------------
# entry point


def _configure_logging():
    level = os.environ.get("ETB_LOG", "quiet").strip().lower()
    if level not in _LOG_LEVELS:
        raise ConfigError(f"ETB_LOG must be one of {', '.join(_LOG_LEVELS)}, got {level!r}")
    logging.basicConfig(level=_LOG_LEVELS[level], format="%(levelname)s %(name)s: %(message)s")


def build_parser():
    p = argparse.ArgumentParser(prog="etbcov", description="Event-triggered coverage control simulator.")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="scenario file (default: bundled 8-agent scenario)")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--controllers", help="comma-separated controller names")
    common.add_argument("--duration", type=float, help="simulated seconds")
    common.add_argument("--seed", type=int)
    common.add_argument("--dtb", type=float, help="target dwell time of the variable-speed policy [s]")
    common.add_argument("--taud", type=float, help="wait after stopping, variable-speed policy [s]")
    common.add_argument("--chords", type=int, help="chords per curved cell boundary")
    sub.add_parser("run", parents=[common], help="simulate and write traces, metrics and plots")
    sub.add_parser("compare", parents=[common], help="simulate several controllers and tabulate reductions")
    chk = sub.add_parser("check", parents=[common], help="run the invariant checks on a trace file")
    chk.add_argument("trace", type=Path)
    return p


def apply_overrides(cfg, args):
    changes = {}
    for flag, key in (("duration", "duration"), ("seed", "seed"), ("dtb", "dtb"),
                      ("taud", "taud"), ("chords", "K")):
        v = getattr(args, flag)
        if v is not None:
            changes[key] = v
    if changes:
        cfg.scenario = dataclasses.replace(cfg.scenario, **changes)
    if args.out is not None:
        cfg.out = args.out
    if args.controllers is not None:
        cfg.controllers = _controllers(args.controllers)
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        _configure_logging()
        cfg = parse_config(args.config if args.config is not None else BUNDLED_CONFIG)
        cfg = apply_overrides(cfg, args)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "compare":
            return cmd_compare(cfg)
        single = cfg.controllers[0] if args.controllers is not None else None
        return cmd_check(cfg, args.trace, single)
    except (ConfigError, ValueError) as exc:
        print(f"etbcov: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"etbcov: I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
