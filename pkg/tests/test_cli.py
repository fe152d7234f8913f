import json

import numpy as np
import pytest

from avcqc import serialize as io
from avcqc.cli import main
from helpers import ONE, ZERO, bitflip_channel, constant_channel, orthogonal_channel


def write_channel(tmp_path, w, name="channel.json"):
    path = tmp_path / name
    io.dump_json(io.channel_to_json(w), path)
    return str(path)


def write_source(tmp_path, joint, name="source.json"):
    path = tmp_path / name
    io.dump_json({"v_prime": ["0", "1"], "v": ["0", "1"], "joint": joint}, path)
    return str(path)


def write_fixed_channel(tmp_path, states, name="fixed.json"):
    obj = {
        "x_alphabet": ["0", "1"],
        "s_alphabet": ["s"],
        "dim": 2,
        "states": {
            "0,s": io.matrix_to_json(states[0]),
            "1,s": io.matrix_to_json(states[1]),
        },
    }
    path = tmp_path / name
    io.dump_json(obj, path)
    return str(path)


class TestCapacityCommand:
    def test_orthogonal_channel(self, tmp_path):
        chan = write_channel(tmp_path, orthogonal_channel())
        out = tmp_path / "res.json"
        rc = main(["capacity", "--channel", chan, "--seed", "7", "--out", str(out)])
        assert rc == 0
        res = json.loads(out.read_text())
        assert res["value"] == pytest.approx(1.0, abs=1e-6)
        assert res["certified_gap"] <= 5e-3

    def test_bitflip_channel(self, tmp_path):
        chan = write_channel(tmp_path, bitflip_channel())
        out = tmp_path / "res.json"
        rc = main(["capacity", "--channel", chan, "--seed", "7", "--out", str(out)])
        assert rc == 0
        res = json.loads(out.read_text())
        assert res["value"] <= 1e-6

    def test_malformed_json_reports_position(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"x_alphabet": [0, 1],\n "oops"')
        out = tmp_path / "res.json"
        rc = main(["capacity", "--channel", str(bad), "--seed", "1", "--out", str(out)])
        assert rc == 1
        err = capsys.readouterr().err
        assert "line" in err and "column" in err
        assert not out.exists()

    def test_trace_csv(self, tmp_path):
        chan = write_channel(tmp_path, bitflip_channel())
        out = tmp_path / "res.json"
        trace = tmp_path / "trace.csv"
        rc = main(
            ["capacity", "--channel", chan, "--seed", "3", "--out", str(out),
             "--trace-csv", str(trace)]
        )
        assert rc == 0
        lines = trace.read_text().strip().splitlines()
        assert lines[0] == "iteration,objective"
        assert len(lines) > 1


class TestCrCapacityCommand:
    def test_constant_channel_perfect_correlation(self, tmp_path):
        chan = write_channel(tmp_path, constant_channel())
        src = write_source(tmp_path, [[0.5, 0.0], [0.0, 0.5]])
        out = tmp_path / "cr.json"
        rc = main(
            ["cr-capacity", "--channel", chan, "--source", src, "--seed", "5",
             "--out", str(out)]
        )
        assert rc == 0
        res = json.loads(out.read_text())
        assert res["value"] == pytest.approx(1.0, abs=1e-6)
        assert res["case_tag"] == "large_correlation"


class TestSeparateCommand:
    def test_constant_channel_not_separable(self, tmp_path):
        chan = write_channel(tmp_path, constant_channel())
        src = write_source(tmp_path, [[0.45, 0.05], [0.05, 0.45]])
        out = tmp_path / "sep.json"
        rc = main(
            ["separate", "--channel", chan, "--source", src, "--seed", "5",
             "--out", str(out)]
        )
        assert rc == 0
        res = json.loads(out.read_text())
        assert res["separable"] is False
        assert res["witness_distance"] <= 1e-10

    def test_orthogonal_channel_certificate(self, tmp_path):
        chan = write_channel(tmp_path, orthogonal_channel())
        src = write_source(tmp_path, [[0.45, 0.05], [0.05, 0.45]])
        out = tmp_path / "sep.json"
        rc = main(
            ["separate", "--channel", chan, "--source", src, "--seed", "5",
             "--out", str(out)]
        )
        assert rc == 0
        res = json.loads(out.read_text())
        assert res["separable"] is True
        assert res["margin"] > 0
        assert res["g_pair"]["iota"] == 3

    def test_dead_band_exit_code(self, tmp_path):
        eps = 2e-6
        from avcqc import Avcqc

        rho1 = (1 - eps) * ZERO + eps * ONE
        w = Avcqc(("0", "1"), ("0", "1"), np.array([[ZERO, ZERO], [rho1, rho1]]))
        chan = write_channel(tmp_path, w)
        src = write_source(tmp_path, [[0.45, 0.05], [0.05, 0.45]])
        out = tmp_path / "sep.json"
        rc = main(
            ["separate", "--channel", chan, "--source", src, "--seed", "5",
             "--out", str(out)]
        )
        assert rc == 2
        assert not out.exists()


class TestTypicalityCommand:
    def test_bound_suite_csv(self, tmp_path):
        b = np.sqrt(0.92**2 - 0.5**2) / 2
        w0 = np.array([[0.75, b], [b, 0.25]], complex)
        w1 = np.array([[0.75, -b], [-b, 0.25]], complex)
        chan = write_fixed_channel(tmp_path, [w0, w1])
        out = tmp_path / "typ.csv"
        rc = main(
            ["typicality", "--channel", chan, "--p", "0.5,0.5", "--n-min", "4",
             "--n-max", "8", "--alpha", "0.1", "--out", str(out)]
        )
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "bound_id,n,lhs,rhs,slack,fitted_constant"
        assert len(lines) == 1 + 7 * 5
        for line in lines[1:]:
            assert float(line.split(",")[4]) >= -1e-12

    def test_requires_single_state_channel(self, tmp_path, capsys):
        chan = write_channel(tmp_path, orthogonal_channel())
        out = tmp_path / "typ.csv"
        rc = main(["typicality", "--channel", chan, "--out", str(out)])
        assert rc == 1


class TestSimulateCommand:
    def test_builds_precode_and_writes_trials(self, tmp_path, capsys):
        chan = write_channel(tmp_path, orthogonal_channel())
        src = write_source(tmp_path, [[0.45, 0.05], [0.05, 0.45]])
        out = tmp_path / "sim.csv"
        rc = main(
            ["simulate", "--channel", chan, "--source", src, "--seed", "9",
             "--trials", "25", "--out", str(out)]
        )
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "trial,v_prime,v,j,decoded,jammer_choice"
        assert len(lines) == 26
        assert "agreement_rate=" in capsys.readouterr().out

    def test_not_separable_channel_exits_indeterminate(self, tmp_path):
        chan = write_channel(tmp_path, constant_channel())
        src = write_source(tmp_path, [[0.45, 0.05], [0.05, 0.45]])
        out = tmp_path / "sim.csv"
        rc = main(
            ["simulate", "--channel", chan, "--source", src, "--seed", "9",
             "--trials", "10", "--out", str(out)]
        )
        assert rc == 2
        assert not out.exists()

    def test_accepts_code_file(self, tmp_path):
        from avcqc import CorrelationCode

        chan = write_channel(tmp_path, orthogonal_channel())
        src = write_source(tmp_path, [[0.5, 0.0], [0.0, 0.5]])
        dec0 = np.stack([ZERO, ONE])
        dec1 = np.stack([ONE, ZERO])
        code = CorrelationCode(
            l=1,
            n=1,
            v_prime_words=(("0",), ("1",)),
            v_words=(("0",), ("1",)),
            encoders=[[("0",), ("1",)], [("1",), ("0",)]],
            decoders=np.stack([dec0, dec1]),
        )
        code_path = tmp_path / "code.json"
        io.dump_json(io.correlation_code_to_json(code), code_path)
        out = tmp_path / "sim.csv"
        rc = main(
            ["simulate", "--channel", chan, "--source", src, "--seed", "9",
             "--trials", "30", "--code", str(code_path), "--out", str(out)]
        )
        assert rc == 0
        rows = out.read_text().strip().splitlines()[1:]
        assert all(r.split(",")[3] == r.split(",")[4] for r in rows)


class TestDiscontinuityDemo:
    def test_demo_rows(self, tmp_path):
        out = tmp_path / "demo.csv"
        rc = main(["discontinuity-demo", "--n-list", "3,4", "--seed", "11",
                   "--out", str(out)])
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "n,source_distance_to_limit,cr_capacity"
        rows = {l.split(",")[0]: l.split(",")[1:] for l in lines[1:]}
        assert float(rows["3"][0]) == pytest.approx(0.5, abs=1e-12)
        assert float(rows["4"][0]) == pytest.approx(0.25, abs=1e-12)
        assert float(rows["3"][1]) <= 1e-3
        assert float(rows["limit"][1]) == pytest.approx(1.0, abs=1e-6)

    def test_rejects_small_n(self, tmp_path):
        out = tmp_path / "demo.csv"
        rc = main(["discontinuity-demo", "--n-list", "2,3", "--seed", "11",
                   "--out", str(out)])
        assert rc == 1


class TestDeterminism:
    def test_capacity_byte_identical(self, tmp_path):
        chan = write_channel(tmp_path, orthogonal_channel())
        outs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            rc = main(["capacity", "--channel", chan, "--seed", "42", "--out", str(out)])
            assert rc == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_simulate_byte_identical(self, tmp_path):
        chan = write_channel(tmp_path, orthogonal_channel())
        src = write_source(tmp_path, [[0.45, 0.05], [0.05, 0.45]])
        outs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            rc = main(
                ["simulate", "--channel", chan, "--source", src, "--seed", "13",
                 "--trials", "20", "--out", str(out)]
            )
            assert rc == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]
