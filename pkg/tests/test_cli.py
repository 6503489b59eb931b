import json
import os

import pytest

import causalkit as ck
from causalkit.cli import main


def run(args):
    return main(list(args))


class TestSimulate:
    def test_table3_row_count(self, tmp_path, capsys):
        out = tmp_path / "t3.csv"
        assert run(["simulate", "table3", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 717  # header + 716 rows
        assert lines[0] == "E,T,C"
        kinds = json.loads((tmp_path / "t3.csv.kinds.json").read_text())
        assert kinds["kinds"]["C"] == "discrete"

    def test_beams_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(["simulate", "beams", "--n", "500", "--seed", "7", "--out", str(a)]) == 0
        assert run(["simulate", "beams", "--n", "500", "--seed", "7", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert len(a.read_text().splitlines()) == 501

    def test_sem_spec(self, tmp_path):
        spec = tmp_path / "dgp.json"
        spec.write_text(json.dumps({
            "nodes": ["A", "B", "C", "D"],
            "edges": [
                {"from": "A", "to": "B", "coef": 0.8},
                {"from": "A", "to": "C", "coef": 0.7},
                {"from": "A", "to": "D", "coef": 0.9},
                {"from": "B", "to": "C", "coef": 0.6},
            ],
        }))
        out = tmp_path / "sem.csv"
        assert run(["simulate", "sem", "--spec", str(spec), "--n", "1000",
                    "--seed", "3", "--out", str(out)]) == 0
        assert out.read_text().splitlines()[0] == "A,B,C,D"
        assert len(out.read_text().splitlines()) == 1001

    def test_env_seed_fallback(self, tmp_path, monkeypatch):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        monkeypatch.setenv("CAUSALKIT_SEED", "11")
        run(["simulate", "beams", "--n", "100", "--out", str(a)])
        run(["simulate", "beams", "--n", "100", "--seed", "11", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_malformed_spec_exit_1(self, tmp_path, capsys):
        spec = tmp_path / "bad.json"
        spec.write_text(json.dumps({"nodes": ["A"], "edges": [{"oops": 1}]}))
        code = run(["simulate", "sem", "--spec", str(spec), "--out",
                    str(tmp_path / "x.csv")])
        assert code == 1
        assert "error" in capsys.readouterr().err


@pytest.fixture
def beams_csv(tmp_path):
    out = tmp_path / "beams.csv"
    run(["simulate", "beams", "--n", "500", "--seed", "7", "--out", str(out)])
    return out


@pytest.fixture
def table3_csv(tmp_path):
    out = tmp_path / "t3.csv"
    run(["simulate", "table3", "--out", str(out)])
    return out


class TestDiscover:
    def test_pc_raw_beams_dot(self, tmp_path, beams_csv):
        out = tmp_path / "g.dot"
        code = run(["discover", "--in", str(beams_csv), "--columns", "Z,fy,M",
                    "--algo", "pc", "--alpha", "0.05", "--out", str(out)])
        assert code == 0
        text = out.read_text()
        assert "Z -> M" in text
        assert "fy -> M" in text

    def test_fges_log_beams_json_report(self, tmp_path, beams_csv):
        out = tmp_path / "g.json"
        rep = tmp_path / "rep.json"
        code = run(["discover", "--in", str(beams_csv),
                    "--columns", "logZ,logfy,logM", "--algo", "fges",
                    "--format", "json", "--out", str(out), "--report", str(rep)])
        assert code == 0
        g = ck.graph_from_json(out.read_text())
        assert g.is_directed_edge("logZ", "logM")
        report = json.loads(rep.read_text())
        assert report["spec_version"] == "1"
        assert report["final_score_higher_better"] == -report["final_score_lower_better"]
        assert all(op["delta"] > 0 for op in report["operators"])

    def test_missing_input_exit_1(self, tmp_path, capsys):
        code = run(["discover", "--in", str(tmp_path / "nope.csv"), "--algo", "pc"])
        assert code == 1
        assert "nope.csv" in capsys.readouterr().err

    def test_bad_flags_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            run(["discover", "--algo", "pc"])  # --in missing
        assert exc.value.code == 2

    def test_knowledge_tiers_respected(self, tmp_path):
        data = tmp_path / "sp.csv"
        run(["simulate", "spalling", "--n", "400", "--seed", "11", "--out", str(data)])
        know = tmp_path / "know.json"
        know.write_text(json.dumps({
            "forbidden": [], "required": [],
            "tiers": [["b", "r", "f", "C", "P", "K"], ["SP"]],
            "within_tier_forbidden": True,
        }))
        out = tmp_path / "g.json"
        code = run(["discover", "--in", str(data), "--algo", "pc",
                    "--knowledge", str(know), "--mixed-policy", "as-continuous",
                    "--format", "json", "--out", str(out)])
        assert code == 0
        g = ck.graph_from_json(out.read_text())
        for i, j, ma, mb in g.edges():
            assert "SP" in (g.names[i], g.names[j])
            assert (ma, mb) == (ck.TAIL, ck.ARROW)

    def test_determinism_byte_identical(self, tmp_path, beams_csv):
        outs = []
        for name in ("g1.dot", "g2.dot"):
            out = tmp_path / name
            run(["discover", "--in", str(beams_csv), "--columns", "logZ,logfy,logM",
                 "--algo", "pc", "--out", str(out)])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_config_file_defaults(self, tmp_path, beams_csv):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"columns": "Z,fy,M", "algo": "pc"}))
        out = tmp_path / "g.dot"
        code = run(["discover", "--in", str(beams_csv), "--config", str(cfg),
                    "--out", str(out)])
        assert code == 0
        assert "Z -> M" in out.read_text()

    def test_pc_discrete_data_uses_g2(self, tmp_path, table3_csv):
        rep = tmp_path / "rep.json"
        out = tmp_path / "g.json"
        code = run(["discover", "--in", str(table3_csv), "--algo", "pc",
                    "--format", "json", "--out", str(out), "--report", str(rep)])
        assert code == 0
        g = ck.graph_from_json(out.read_text())
        assert set(g.names) == {"E", "T", "C"}
        assert json.loads(rep.read_text())["ci_tests_run"] > 0

    def test_discretize_policy(self, tmp_path):
        data = tmp_path / "sp.csv"
        run(["simulate", "spalling", "--n", "300", "--seed", "3", "--out", str(data)])
        out = tmp_path / "g.json"
        code = run(["discover", "--in", str(data), "--algo", "pc",
                    "--mixed-policy", "discretize", "--format", "json",
                    "--out", str(out)])
        assert code == 0

    def test_mixed_without_policy_exit_1(self, tmp_path, capsys):
        data = tmp_path / "sp.csv"
        run(["simulate", "spalling", "--n", "100", "--seed", "3", "--out", str(data)])
        code = run(["discover", "--in", str(data), "--algo", "pc"])
        assert code == 1
        assert "mixes" in capsys.readouterr().err


class TestInfer:
    def test_adjusted_ate(self, table3_csv, capsys):
        code = run(["infer", "--in", str(table3_csv), "--treatment", "T",
                    "--outcome", "C", "--adjust", "E", "--simpson-covariate", "E"])
        assert code == 0
        obj = json.loads(capsys.readouterr().out)
        assert round(obj["p_do"]["1"]["value"], 2) == 0.83
        assert round(obj["p_do"]["0"]["value"], 2) == 0.78
        assert abs(obj["ate"]["value"] - 0.05) <= 0.005
        assert obj["simpson_reversal"] is True

    def test_unadjusted_contrast(self, table3_csv, capsys):
        code = run(["infer", "--in", str(table3_csv), "--treatment", "T",
                    "--outcome", "C"])
        assert code == 0
        obj = json.loads(capsys.readouterr().out)
        assert abs(obj["ate"]["value"] + 0.05) <= 0.005

    def test_nonbinary_outcome_exit_1(self, tmp_path, capsys):
        data = tmp_path / "m.csv"
        data.write_text("t,y\n0,0\n1,1\n0,2\n1,1\n")
        kinds = tmp_path / "m.csv.kinds.json"
        kinds.write_text(json.dumps({"kinds": {"t": "discrete", "y": "discrete"}}))
        code = run(["infer", "--in", str(data), "--treatment", "t", "--outcome", "y"])
        assert code == 1
        assert "binary" in capsys.readouterr().err

    def test_positivity_violation_exit_1_unless_flag(self, tmp_path, capsys):
        data = tmp_path / "p.csv"
        data.write_text("z,t,y\n0,0,0\n0,1,1\n0,0,1\n0,1,1\n1,1,0\n1,1,1\n")
        kinds = tmp_path / "p.csv.kinds.json"
        kinds.write_text(json.dumps(
            {"kinds": {"z": "discrete", "t": "discrete", "y": "discrete"}}))
        code = run(["infer", "--in", str(data), "--treatment", "t",
                    "--outcome", "y", "--adjust", "z"])
        assert code == 1
        assert "positivity" in capsys.readouterr().err
        code = run(["infer", "--in", str(data), "--treatment", "t",
                    "--outcome", "y", "--adjust", "z", "--allow-empty-strata"])
        assert code == 0

    def test_laplace_smoothing_flag(self, table3_csv, capsys):
        run(["infer", "--in", str(table3_csv), "--treatment", "T",
             "--outcome", "C", "--adjust", "E", "--laplace", "1"])
        smoothed = json.loads(capsys.readouterr().out)
        run(["infer", "--in", str(table3_csv), "--treatment", "T",
             "--outcome", "C", "--adjust", "E"])
        plain = json.loads(capsys.readouterr().out)
        assert smoothed["p_do"]["1"]["value"] != plain["p_do"]["1"]["value"]
        # smoothing shrinks the extreme branch-A rate toward 1/2
        assert smoothed["strata_table"][0]["arms"]["1"]["rate"]["exact"] == "82/89"

    def test_backdoor_guard_flag(self, tmp_path, table3_csv, capsys):
        dag = ck.Dag(["E", "T", "C"], [("E", "T"), ("E", "C"), ("T", "C")])
        gpath = tmp_path / "dag.json"
        gpath.write_text(ck.graph_to_json(dag))
        code = run(["infer", "--in", str(table3_csv), "--treatment", "T",
                    "--outcome", "C", "--graph", str(gpath)])
        assert code == 1
        assert "backdoor" in capsys.readouterr().err
        code = run(["infer", "--in", str(table3_csv), "--treatment", "T",
                    "--outcome", "C", "--graph", str(gpath), "--force"])
        assert code == 0


class TestEvalAndExport:
    def test_identical_graphs_shd_zero(self, tmp_path, capsys):
        g = ck.Cpdag(["Z", "fy", "M"], directed=[("Z", "M"), ("fy", "M")])
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        p1.write_text(ck.graph_to_json(g))
        p2.write_text(ck.graph_to_json(g))
        assert run(["eval", "--truth", str(p1), "--learned", str(p2)]) == 0
        captured = capsys.readouterr()
        assert json.loads(captured.out)["shd"] == 0
        assert "shd=0" in captured.err

    def test_chain_vs_undirected_shd_two(self, tmp_path, capsys):
        truth = ck.Dag(["X", "Z", "Y"], [("X", "Z"), ("Z", "Y")])
        learned = ck.Cpdag(["X", "Z", "Y"], undirected=[("X", "Z"), ("Z", "Y")])
        p1, p2 = tmp_path / "t.json", tmp_path / "l.json"
        p1.write_text(ck.graph_to_json(truth))
        p2.write_text(ck.graph_to_json(learned))
        run(["eval", "--truth", str(p1), "--learned", str(p2)])
        obj = json.loads(capsys.readouterr().out)
        assert obj["shd"] == 2
        assert obj["arrowhead_precision"] is None

    def test_node_mismatch_exit_1(self, tmp_path, capsys):
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        p1.write_text(ck.graph_to_json(ck.Dag(["A", "B"], [("A", "B")])))
        p2.write_text(ck.graph_to_json(ck.Dag(["A", "C"], [("A", "C")])))
        assert run(["eval", "--truth", str(p1), "--learned", str(p2)]) == 1

    def test_export_roundtrip(self, tmp_path):
        g = ck.MixedGraph(["A", "B"], [("A", "B", ck.ARROW, ck.ARROW)])
        src = tmp_path / "g.json"
        src.write_text(ck.graph_to_json(g))
        dot = tmp_path / "g.dot"
        back = tmp_path / "back.json"
        assert run(["export", "--in", str(src), "--out", str(dot)]) == 0
        assert run(["export", "--in", str(dot), "--out", str(back)]) == 0
        assert ck.graph_from_json(back.read_text()) == g


class TestStats:
    def test_json_fields(self, beams_csv, capsys):
        assert run(["stats", "--in", str(beams_csv)]) == 0
        obj = json.loads(capsys.readouterr().out)
        assert set(obj["Z"]) == {"minimum", "maximum", "average", "std", "skewness"}
        assert obj["fy"]["minimum"] == 250.0

    def test_text_table(self, beams_csv, capsys):
        assert run(["stats", "--in", str(beams_csv), "--format", "text"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("column,")
        assert len(lines) == 7  # header + six columns

    def test_failed_write_leaves_no_partial_file(self, tmp_path, beams_csv):
        # unwritable output directory: command fails, target absent
        target_dir = tmp_path / "sub"
        target = target_dir / "g.dot"
        code = run(["discover", "--in", str(beams_csv), "--columns", "Z,fy,M",
                    "--algo", "pc", "--out", str(target)])
        assert code == 1
        assert not target.exists()
        assert not target_dir.exists() or not list(target_dir.iterdir())
