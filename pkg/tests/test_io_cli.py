import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from idealsim import cli, runner
from idealsim.algebra import AlgebraElement, IdealSpec, Polynomial
from idealsim.errors import NumericalFailure
from idealsim.io import Instance, ParseError, dump_json, instance_to_dict, load_instance, parse_instance

from conftest import cmat

EXACT_DOC = {
    "block_dims": [2, 2],
    "ideal_blocks": [1],
    "elements": [{"name": "a", "blocks": [
        [[0, 0], [5, 0], [0, 0], [0, 0]],
        [[[0, 0], [1, 0]], [[0, 0], [0, 0]]],
    ]}],
}


def write(tmp_path, doc, name="inst.json"):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return p


class TestInstanceFormat:
    def test_parse_exact_example(self):
        inst = parse_instance(EXACT_DOC)
        assert inst.ideal == IdealSpec.of([2, 2], [0])
        np.testing.assert_array_equal(inst.elements["a"].blocks[0], [[0, 5], [0, 0]])
        np.testing.assert_array_equal(inst.elements["a"].blocks[1], [[0, 1], [0, 0]])

    @given(st.integers(0, 2**31 - 1))
    def test_round_trip_is_bit_exact(self, seed):
        rng = np.random.default_rng(seed)
        dims = [int(d) for d in rng.integers(1, 4, int(rng.integers(1, 4)))]
        ideal = IdealSpec.of(dims, [0])
        el = AlgebraElement(ideal.signature, [cmat(rng, n) * 10.0 ** rng.integers(-20, 20) for n in dims])
        inst = Instance(ideal, {"x": el}, {"p": Polynomial(rng.standard_normal(3))}, [(1 / 3 + 0.1j, 2)])
        back = parse_instance(json.loads(dump_json(instance_to_dict(inst))))
        assert back.ideal == ideal
        for b1, b2 in zip(back.elements["x"].blocks, el.blocks):
            np.testing.assert_array_equal(b1, b2)
        assert back.polynomials["p"] == inst.polynomials["p"]
        assert back.factors == inst.factors

    @pytest.mark.parametrize("doc, where", [
        ({"ideal_blocks": []}, "block_dims"),
        ({"block_dims": [2], "ideal_blocks": [2]}, "ideal_blocks"),
        ({"block_dims": [1], "elements": [{"blocks": [[[1, 0], [2, 0]]]}]}, "elements[0].blocks[0]"),
        ({"block_dims": [1], "elements": [{"blocks": [[["x", 0]]]}]}, "elements[0].blocks[0][0]"),
        ({"block_dims": [1], "factors": [[[0, 0], 0]]}, "factors[0]"),
    ])
    def test_errors_carry_location(self, doc, where):
        with pytest.raises(ParseError) as exc:
            parse_instance(doc, "f.json")
        assert where in exc.value.location

    def test_json_syntax_error_has_line_and_column(self, tmp_path):
        p = write(tmp_path, '{\n  "block_dims": [1,\n}')
        with pytest.raises(ParseError) as exc:
            load_instance(p)
        assert exc.value.location.endswith(":3:1")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            load_instance(tmp_path / "nope.json")


class TestCli:
    def test_exact_example_passes(self, tmp_path, capsys):
        out = tmp_path / "r.json"
        code = cli.main(["formula", str(write(tmp_path, EXACT_DOC)), "--exact", "--out", str(out)])
        assert code == 0
        report = json.loads(out.read_text())
        assert report["passed"] is True
        assert report["targets"]["a"]["quotient_norm"] == 1.0
        assert abs(report["achieved"]["exact"]["norms"]["a"] - 1.0) <= 1e-8
        assert report["oracle"]["best_value"] >= 1.0 - 1e-9
        assert set(report) == {"meta", "instance", "targets", "achieved", "oracle", "checks", "passed"}
        assert all({"name", "bound", "value", "pass"} <= set(c) for c in report["checks"])
        assert "PASS" in capsys.readouterr().out

    def test_diagonal_triangularize(self, tmp_path):
        doc = {"block_dims": [2], "elements": [{"name": "T", "blocks": [[[2, 0], [0, 0], [0, 0], [5, 0]]]}]}
        out = tmp_path / "r.json"
        assert cli.main(["triangularize", str(write(tmp_path, doc)), "--out", str(out)]) == 0
        assert json.loads(out.read_text())["achieved"]["residual"] == 0.0

    @pytest.mark.parametrize("experiment", ["formula", "olsen", "approximate-olsen", "pair", "triangularize"])
    def test_generated_experiments_pass(self, experiment, capsys):
        assert cli.main([experiment, "--seed", "2", "--budget", "300", "--eps", "0.1,0.01"]) == 0

    def test_report_is_deterministic_and_replayable(self, tmp_path):
        paths = [tmp_path / f"r{k}.json" for k in range(3)]
        args = ["formula", "--seed", "7", "--budget", "300"]
        cli.main(args + ["--out", str(paths[0])])
        cli.main(args + ["--out", str(paths[1])])
        docs = [json.loads(p.read_text()) for p in paths[:2]]
        for d in docs:
            del d["meta"]["timings"]
        assert docs[0] == docs[1]
        replay = write(tmp_path, docs[0]["instance"], "replay.json")
        cli.main(["formula", str(replay), "--seed", "7", "--budget", "300", "--out", str(paths[2])])
        third = json.loads(paths[2].read_text())
        assert third["achieved"] == docs[0]["achieved"] and third["oracle"] == docs[0]["oracle"]

    def test_generator_flags(self, tmp_path):
        out = tmp_path / "r.json"
        code = cli.main(["formula", "--dims", "3,2", "--ideal", "1", "--count", "2", "--radius", "1.3",
                         "--quotient", "0.7", "--seed", "1", "--budget", "200", "--out", str(out)])
        assert code == 0
        inst = json.loads(out.read_text())["instance"]
        assert inst["block_dims"] == [3, 2] and inst["ideal_blocks"] == [1] and len(inst["elements"]) == 2

    def test_failed_check_exits_1(self):
        assert cli.main(["triangularize", "--seed", "3", "--tol", "0"]) == 1

    def test_parse_error_exits_2(self, tmp_path, capsys):
        assert cli.main(["formula", str(write(tmp_path, "{oops"))]) == 2
        assert "inst.json:1:2" in capsys.readouterr().err

    def test_bad_flag_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["formula", "--seed", "x"])
        assert exc.value.code == 2

    def test_precondition_exits_3(self, tmp_path, capsys):
        doc = {"block_dims": [2], "ideal_blocks": [1],
               "elements": [{"name": "T", "blocks": [[[1, 0], [1, 0], [0, 0], [1, 0]]]}]}
        assert cli.main(["formula", str(write(tmp_path, doc)), "--exact"]) == 3
        assert "attainment-unavailable" in capsys.readouterr().err

    def test_non_member_exits_3(self, tmp_path):
        doc = {"block_dims": [1, 2], "ideal_blocks": [1],
               "elements": [{"name": "T", "blocks": [[[3, 0]], [[1, 0], [0, 0], [0, 0], [2, 0]]]}]}
        assert cli.main(["olsen", str(write(tmp_path, doc))]) == 3

    def test_numerical_failure_exits_4(self, monkeypatch):
        def boom(cfg):
            raise NumericalFailure("diverged")
        monkeypatch.setattr(cli, "run_experiment", boom)
        assert cli.main(["formula"]) == 4

    def test_config_validation(self):
        with pytest.raises(Exception):
            runner.ExperimentConfig("formula", epsilons=(0.0,))
        with pytest.raises(Exception):
            runner.ExperimentConfig("bogus")

    def test_suite_subset(self, capsys):
        assert cli.main(["suite", "--criteria", "4,10", "--jobs", "2"]) == 0
        out = capsys.readouterr().out
        assert "criterion 4" in out and "criterion 10" in out
