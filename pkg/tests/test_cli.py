import csv
import json
import math

import numpy as np
import pytest

from epd_gossip.cli import main


def read_csv(path):
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    return header, rows


class TestProfile:
    def test_emits_one_file_per_round(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"rounds": [5, 10]}))
        rc = main(["profile", "--config", str(cfg), "--out", str(tmp_path / "out")])
        assert rc == 0
        for n in (5, 10):
            header, rows = read_csv(tmp_path / "out" / f"profile_n{n}.csv")
            assert header == [
                "v",
                "x_n_simple",
                "heat_oracle",
                "x_n_jacobi",
                "epd_oracle",
                "epd_filtered",
            ]
            assert len(rows) == 2 * n + 1
            # mass columns sum to 1
            for col in (1, 3):
                assert sum(float(r[col]) for r in rows) == pytest.approx(1.0, abs=1e-9)

    def test_rejects_2d_filter(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"filter": "triangular", "rounds": [5]}))
        rc = main(["profile", "--config", str(cfg), "--out", str(tmp_path / "out")])
        assert rc == 2

    def test_gap_to_banded_oracle_shrinks_with_n(self, tmp_path):
        # max|x_n_jacobi - epd_filtered| falls by an order of magnitude from
        # n=15 to n=200 (the n^d-scaled l2 version of this trend is what the
        # acceptance battery checks; the n^d-scaled sup is dominated by the
        # boundary ripple and is not monotone)
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"rounds": [15, 200]}))
        rc = main(["profile", "--config", str(cfg), "--out", str(tmp_path / "out")])
        assert rc == 0
        gaps = {}
        for n in (15, 200):
            _, rows = read_csv(tmp_path / "out" / f"profile_n{n}.csv")
            gaps[n] = max(abs(float(r[3]) - float(r[5])) for r in rows)
        assert gaps[200] < gaps[15]


class TestShape2d:
    def test_grids_and_params(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"rounds": 12}))
        out = tmp_path / "out"
        rc = main(["shape2d", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        header, rows = read_csv(out / "shape2d_simple_n12.csv")
        assert header == ["v1", "v2", "value"]
        assert len(rows) == 25 * 25
        assert all(float(r[2]) >= 0.0 for r in rows)
        params = json.loads((out / "shape2d_params.json").read_text())
        assert params["t"] == 12
        np.testing.assert_allclose(
            params["covariance"], [[2 / 3, 1 / 3], [1 / 3, 2 / 3]]
        )

    def test_jacobi_more_even_than_simple(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"rounds": 30}))
        out = tmp_path / "out"
        assert main(["shape2d", "--config", str(cfg), "--out", str(out)]) == 0
        q_inv = np.linalg.inv(np.array([[2 / 3, 1 / 3], [1 / 3, 2 / 3]]))
        cov = {}
        for tag in ("simple", "jacobi"):
            _, rows = read_csv(out / f"shape2d_{tag}_n30.csv")
            vals = []
            for r in rows:
                v = np.array([float(r[0]), float(r[1])])
                if v @ q_inv @ v <= (0.8 * 30) ** 2:
                    vals.append(float(r[2]))
            vals = np.array(vals)
            cov[tag] = vals.std() / vals.mean()
        assert cov["jacobi"] < cov["simple"]


class TestAlphaSweep:
    def test_default_three_alphas(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"rounds": 60}))
        out = tmp_path / "out"
        rc = main(["alpha-sweep", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        for alpha in ("0.25", "0.5", "0.75"):
            header, rows = read_csv(out / f"alpha_sweep_a{alpha}_n60.csv")
            assert header == ["v", "x_n", "epd_oracle"]
            assert len(rows) == 121


class TestAlphaSweepGuards:
    def test_out_of_range_alpha_warns_and_guards_oracle(self, tmp_path, capsys):
        # alpha <= d/2 - 1/2 warns; alpha <= d/2 - 1 additionally has no
        # integrable density, so the oracle column is NaN
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"alphas": [-0.6, -0.25], "rounds": 20}))
        out = tmp_path / "out"
        rc = main(["alpha-sweep", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        err = capsys.readouterr().err
        assert err.count("outside the proven range") == 2
        _, rows = read_csv(out / "alpha_sweep_a-0.6_n20.csv")
        assert all(math.isnan(float(r[2])) for r in rows)
        _, rows = read_csv(out / "alpha_sweep_a-0.25_n20.csv")
        assert not any(math.isnan(float(r[2])) for r in rows)
        # iterates themselves still conserve mass
        assert sum(float(r[1]) for r in rows) == pytest.approx(1.0, abs=1e-9)


class TestRates:
    def test_rates_csv(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"filter": "lazy-1d", "rounds": 120}))
        out = tmp_path / "out"
        rc = main(["rates", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        header, rows = read_csv(out / "rates.csv")
        assert header == ["n", "l2_sq", "predicted", "ratio"]
        assert len(rows) == 120
        # final ratio near one, log-log slope near -1 over the last octave
        assert float(rows[-1][3]) == pytest.approx(1.0, abs=0.05)
        l2 = {int(r[0]): float(r[1]) for r in rows}
        slope = (math.log(l2[120]) - math.log(l2[60])) / (math.log(120) - math.log(60))
        assert slope == pytest.approx(-1.0, abs=0.1)


class TestOracleDump:
    def test_dump_columns(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps(
                {
                    "alpha": 0.5,
                    "dim": 1,
                    "covariance": [[0.5]],
                    "t": 10.0,
                    "box_radius": 12,
                }
            )
        )
        out = tmp_path / "out"
        rc = main(["oracle-dump", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        header, rows = read_csv(out / "oracle_dump.csv")
        assert header == ["index_1", "u", "u_filtered"]
        assert len(rows) == 25
        center = [r for r in rows if r[0] == "0"][0]
        assert float(center[1]) == pytest.approx(0.0707106, abs=1e-5)

    def test_missing_key_is_config_error(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"alpha": 0.5}))
        rc = main(["oracle-dump", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert rc == 2


class TestConfigHandling:
    def test_bad_json_exit_2(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{not json")
        assert main(["profile", "--config", str(cfg), "--out", str(tmp_path)]) == 2

    def test_byte_identical_reruns(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"rounds": [8]}))
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["profile", "--config", str(cfg), "--out", str(out1)]) == 0
        assert main(["profile", "--config", str(cfg), "--out", str(out2)]) == 0
        assert (out1 / "profile_n8.csv").read_bytes() == (
            out2 / "profile_n8.csv"
        ).read_bytes()


class TestVerifyAll:
    def test_subset_summary_passes(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps({"checks": ["schedule_cross_validation", "mehler_heine"]})
        )
        out = tmp_path / "out"
        rc = main(["verify-all", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        summary = json.loads((out / "verify_all.json").read_text())
        assert summary["passed"] is True
        # subsets run in battery order
        assert {c["name"] for c in summary["checks"]} == {
            "schedule_cross_validation",
            "mehler_heine",
        }
        assert "started" in summary["metadata"]

    def test_injected_periodic_filter_fails_with_offending_xi(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps(
                {
                    "checks": ["local_clt_triangular"],
                    "local_clt_filter": "standard-2d",
                }
            )
        )
        out = tmp_path / "out"
        rc = main(["verify-all", "--config", str(cfg), "--out", str(out)])
        assert rc == 1
        summary = json.loads((out / "verify_all.json").read_text())
        assert summary["passed"] is False
        check = summary["checks"][0]
        assert check["passed"] is False
        xi = check["details"]["offending_xi"]
        assert max(abs(abs(v) - math.pi) for v in xi) < 1e-9

    def test_unknown_check_is_config_error(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"checks": ["nonexistent"]}))
        rc = main(["verify-all", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert rc == 2

    def test_summary_payload_deterministic_across_runs(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"checks": ["mehler_heine", "alpha_sweep_shapes"]}))
        payloads = []
        for tag in ("a", "b"):
            out = tmp_path / tag
            assert main(["verify-all", "--config", str(cfg), "--out", str(out)]) == 0
            summary = json.loads((out / "verify_all.json").read_text())
            summary.pop("metadata")
            payloads.append(json.dumps(summary, sort_keys=True))
        assert payloads[0] == payloads[1]

    def test_missing_filter_file_is_config_error(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"filter": str(tmp_path / "nope.json")}))
        rc = main(["profile", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert rc == 2

    def test_threaded_subset_runs(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps({"checks": ["mehler_heine", "schedule_cross_validation"]})
        )
        out = tmp_path / "out"
        rc = main(
            ["verify-all", "--config", str(cfg), "--out", str(out), "--threads", "2"]
        )
        assert rc == 0
        summary = json.loads((out / "verify_all.json").read_text())
        assert summary["passed"] is True
        assert summary["metadata"]["threads"] == 2


class TestOracleDump2d:
    def test_dump_2d_grid(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps(
                {
                    "alpha": 1.0,
                    "dim": 2,
                    "covariance": [[2 / 3, 1 / 3], [1 / 3, 2 / 3]],
                    "t": 5.0,
                    "box_radius": 8,
                }
            )
        )
        out = tmp_path / "out"
        rc = main(["oracle-dump", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        header, rows = read_csv(out / "oracle_dump.csv")
        assert header == ["index_1", "index_2", "u", "u_filtered"]
        assert len(rows) == 17 * 17
        # interior constant of the alpha = d/2 solution
        center = [r for r in rows if r[0] == "0" and r[1] == "0"][0]
        expected = 1.0 / (math.pi * math.sqrt(1 / 3) * 25.0)
        assert float(center[2]) == pytest.approx(expected, rel=1e-10)
