import csv

import numpy as np
import pytest

from etbcov import cli, sim
from etbcov.density import DensityField


def write(tmp_path, text, name="s.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def run_main(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


# ---------------------------------------------------------------------------
# configuration files


def test_bundled_config_is_the_eight_agent_scenario():
    cfg = cli.parse_config(cli.BUNDLED_CONFIG)
    sc = cfg.scenario
    assert np.array_equal(sc.initial_positions, sim.EIGHT_AGENT_POSITIONS)
    assert np.array_equal(sc.Q, [[0, 0], [40, 0], [40, 40], [0, 40]])
    assert sc.dt == 1 / 60 and sc.dtb == 45 / 60 and sc.K == 16 and sc.duration == 600
    assert sc.density.kind == DensityField.exponentials([[20, 30], [30, 10]], 100.0).kind
    assert np.array_equal(sc.density.centers, [[20, 30], [30, 10]]) and sc.density.scale == 100


def test_empty_config_defaults(tmp_path):
    cfg = cli.parse_config(write(tmp_path, ""))
    sc = cfg.scenario
    assert np.array_equal(sc.initial_positions, [[20.0, 20.0]])
    assert (sc.dt, sc.K, sc.duration, sc.s_max) == (1 / 60, 16, 600.0, 0.1)
    assert cfg.controllers == ("etb-constant",)


def test_keys_without_sections_and_comments(tmp_path):
    cfg = cli.parse_config(write(tmp_path, "duration = 5  # short\nagent.0.pos = 1,2\nkind = uniform\n"))
    assert cfg.scenario.duration == 5.0
    assert np.array_equal(cfg.scenario.initial_positions, [[1.0, 2.0]])
    assert cfg.scenario.density.kind == DensityField.uniform().kind


@pytest.mark.parametrize("text, match", [
    ("[agents]\nagent.1.pos = 1,1\nagent.2.pos = 1,1\n", r":3: agent 2 duplicates"),
    ("[agents]\nagent.1.pos = 1,1\nagent.1.pos = 2,2\n", r":3: duplicate entry for agent 1"),
    ("[scenario]\nspeed = 3\n", r":2: unknown key 'speed'"),
    ("[physics]\n", r":1: unknown section"),
    ("[scenario]\nduration = 5\nduration = 6\n", r":3: duplicate key"),
    ("[scenario]\nduration = soon\n", r":2: duration"),
    ("agent.1.pos = 50,1\n", r":1: agent 1 .* outside the domain"),
    ("vertices = 0,0; 4,0; 1,1; 0,4\n", r":1: domain must be a convex polygon"),
    ("controller = gossip\n", r"valid: periodic, etb-constant, etb-variable, self-triggered"),
    ("kind = gaussian\n", r"unknown density kind"),
    ("scale = 3\n", r"without 'kind'"),
    ("just words\n", r":1: expected 'key = value'"),
])
def test_config_errors(tmp_path, text, match):
    with pytest.raises(cli.ConfigError, match=match):
        cli.parse_config(write(tmp_path, text))


def test_tabulated_density_path_is_relative_to_config(tmp_path):
    (tmp_path / "phi.txt").write_text("2 2 0 0 40 40\n1 1\n1 1\n")
    cfg = cli.parse_config(write(tmp_path, "kind = tabulated\ngrid_file = phi.txt\n"))
    assert cfg.scenario.density((10.0, 10.0)) == 1.0


# ---------------------------------------------------------------------------
# commands


def test_run_zero_duration(tmp_path, capsys):
    code, out, _ = run_main(["run", "--out", tmp_path, "--duration", 0], capsys)
    assert code == 0 and "total messages = 0" in out
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["H.svg", "messages_cumulative.svg", "messages_per_step_etb-constant.svg",
                     "metrics_etb-constant.csv", "trace_etb-constant.csv", "trajectories_etb-constant.svg"]


def test_run_is_byte_identical(tmp_path, capsys):
    outs = [tmp_path / "a", tmp_path / "b"]
    for o in outs:
        assert run_main(["run", "--out", o, "--duration", 3, "--controllers", "etb-variable"], capsys)[0] == 0
    for name in ("trace_etb-variable.csv", "metrics_etb-variable.csv", "H.svg", "trajectories_etb-variable.svg"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_compare_table_and_summary(tmp_path, capsys):
    code, out, _ = run_main(["compare", "--out", tmp_path, "--duration", 3,
                             "--controllers", "periodic,etb-constant"], capsys)
    assert code == 0 and "reduction" in out
    with open(tmp_path / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [(r["controller"], r["reference"]) for r in rows] == [
        ("periodic", "etb-constant"), ("etb-constant", "periodic")]
    for r in rows:
        # recompute from the metrics files
        total = {}
        for name in (r["controller"], r["reference"]):
            last = (tmp_path / f"metrics_{name}.csv").read_text().splitlines()[-1]
            total[name] = int(last.split(",")[2])
        expect = 100 * (1 - total[r["controller"]] / total[r["reference"]])
        assert float(r["reduction_pct"]) == pytest.approx(expect, abs=0.1)
        assert int(r["messages"]) == total[r["controller"]]


def test_compare_against_itself_is_zero():
    rows = cli.summary_rows(("a", "b"), {"a": _Fake(7), "b": _Fake(7)})
    assert [r[4] for r in rows] == [0.0, 0.0]


class _Fake:
    def __init__(self, total):
        self.total_messages = total


def test_compare_needs_two_controllers(tmp_path, capsys):
    code, _, err = run_main(["compare", "--out", tmp_path, "--duration", 0], capsys)
    assert code == 2 and "at least two" in err


def test_unknown_controller_flag(tmp_path, capsys):
    code, _, err = run_main(["run", "--out", tmp_path, "--controllers", "nope"], capsys)
    assert code == 2 and "valid: periodic" in err


def test_bad_log_level(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("ETB_LOG", "loud")
    code, _, err = run_main(["run", "--out", tmp_path, "--duration", 0], capsys)
    assert code == 2 and "ETB_LOG" in err


def test_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run_main(["run", "--out", blocker / "sub", "--duration", 0], capsys)
    assert code == 3 and "I/O error" in err


def test_overrides_reach_the_scenario(tmp_path):
    args = cli.build_parser().parse_args(["run", "--duration", "7", "--dtb", "0.5", "--taud", "0.2",
                                          "--chords", "24", "--seed", "3"])
    sc = cli.apply_overrides(cli.parse_config(cli.BUNDLED_CONFIG), args).scenario
    assert (sc.duration, sc.dtb, sc.taud, sc.K, sc.seed) == (7.0, 0.5, 0.2, 24, 3)


@pytest.mark.parametrize("controller", ["etb-constant", "periodic"])
def test_check_clean_trace(tmp_path, capsys, controller):
    assert run_main(["run", "--out", tmp_path, "--duration", 5, "--controllers", controller], capsys)[0] == 0
    code, out, _ = run_main(["check", tmp_path / f"trace_{controller}.csv"], capsys)
    assert code == 0
    assert "broadcast_sufficiency: 0 violations" in out


def test_check_flags_tampered_trace(tmp_path, capsys):
    assert run_main(["run", "--out", tmp_path, "--duration", 5], capsys)[0] == 0
    path = tmp_path / "trace_etb-constant.csv"
    lines = path.read_text().splitlines()
    # shrink the first broadcast radius so a recorded receiver is out of range
    for n, line in enumerate(lines[2:], 2):
        f = line.split(",")
        if f[5] == "1" and f[7]:
            f[6] = "0.001"
            lines[n] = ",".join(f)
            break
    path.write_text("\n".join(lines) + "\n")
    code, out, _ = run_main(["check", path], capsys)
    assert code == 1 and "0 violations" in out and "receiver_set: 0 violations" not in out
