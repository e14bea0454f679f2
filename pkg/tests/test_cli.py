import json

import pytest

from annealprep.cli import main
from annealprep.model import parse_ising_json, parse_qubo_text, write_ising_json
from annealprep.problems import trivial_ising
from annealprep.sampling import parse_samples_csv

from conftest import FIXTURES


@pytest.fixture
def model_file(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(write_ising_json(trivial_ising(8.0, rescaled=True)))
    return path


def test_reduce_iem(tmp_path, model_file):
    out = tmp_path / "reduced.json"
    code = main(
        ["reduce", "iem", "--model", str(model_file), "--bound", "2", "--out", str(out)]
    )
    assert code == 0
    obj = json.loads(out.read_text())
    assert len(obj["aux"]) == 3  # ceil(8/2) - 1
    reduced = parse_ising_json(out.read_text())
    assert max(abs(v) for _, _, v in obj["J"]) <= 2.0
    assert reduced.num_variables == 6


def test_reduce_bce(tmp_path, capsys):
    code = main(["reduce", "bce", "--lower", "0", "--upper", "191", "--mu", "64"])
    assert code == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["coefficients"] == [1, 2, 4, 8, 16, 32, 64, 64]


def test_reduce_alm(tmp_path):
    constraint = tmp_path / "g.json"
    constraint.write_text(json.dumps({"terms": {"1": 1.0, "2": 1.0, "3": 1.0}, "constant": 1.0}))
    out = tmp_path / "penalty.qubo"
    code = main(
        ["reduce", "alm", "--constraint", str(constraint), "--lam", "1.0",
         "--epsilon", "0.3", "--out", str(out)]
    )
    assert code == 0
    q = parse_qubo_text(out.read_text())
    assert q.energy({1: 0, 2: 0, 3: 0}) == pytest.approx(1.6, abs=1e-12)


def test_embed_with_chain_length(tmp_path, model_file):
    out = tmp_path / "embedded.json"
    code = main(
        ["embed", "--model", str(model_file), "--chain-length", "2",
         "--chain-strength", "3", "--out", str(out)]
    )
    assert code == 0
    obj = json.loads(out.read_text())
    assert obj["chain_strength"] == 3.0
    assert len(obj["chains"]) == 3
    assert len(obj["intra_chain_edges"]) == 3


def test_embed_with_files(tmp_path, model_file):
    emb = tmp_path / "emb.json"
    hw = tmp_path / "hw.json"
    out = tmp_path / "embedded.json"
    assert main(
        ["embed", "--model", str(model_file), "--chain-length", "2", "--chain-strength", "1",
         "--out", str(out), "--write-embedding", str(emb), "--write-hardware", str(hw)]
    ) == 0
    code = main(
        ["embed", "--model", str(model_file), "--embedding", str(emb), "--hardware", str(hw),
         "--chain-strength", "1", "--out", str(out)]
    )
    assert code == 0


def test_sample_roundtrip(tmp_path, model_file):
    out = tmp_path / "samples.csv"
    code = main(
        ["sample", "--model", str(model_file), "--reads", "10", "--sweeps", "100",
         "--seed", "4", "--out", str(out)]
    )
    assert code == 0
    samples = parse_samples_csv(out.read_text())
    assert samples.total_occurrences == 10


def test_sample_with_noise(tmp_path, model_file):
    out = tmp_path / "samples.csv"
    code = main(
        ["sample", "--model", str(model_file), "--reads", "5", "--sweeps", "50",
         "--noise-sigma-j", "0.03", "--out", str(out)]
    )
    assert code == 0
    assert parse_samples_csv(out.read_text()).total_occurrences == 5


def _sweep_config(tmp_path, model_file, **extra):
    cfg = {
        "model": str(model_file),
        "chain_length": 2,
        "instance": "trivial",
        "method": "iem",
        "param": "8",
        "oracle": True,
        "chain_strength_grid": [1.0, 3.0],
        "embedding_seeds": [0, 1],
        "reads_per_cell": 6,
        "sampler": {"kind": "sa", "sweeps": 80, "seed": 2},
    }
    cfg.update(extra)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def test_sweep_byte_identical(tmp_path, model_file):
    cfg = _sweep_config(tmp_path, model_file)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["sweep", "--config", str(cfg), "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    header = out1.read_text().splitlines()[0]
    assert header == (
        "instance,method,param,embedding_seed,chain_strength,avg_energy,p_opt,"
        "feasibility_rate,best_objective,mean_objective,chain_break_rate"
    )


def test_sweep_select_argmin(tmp_path, model_file, capsys):
    cfg = _sweep_config(tmp_path, model_file)
    code = main(["sweep", "--config", str(cfg), "--select", "argmin_energy",
                 "--out", str(tmp_path / "m.csv")])
    assert code == 0
    assert "selected chain strength" in capsys.readouterr().out


def test_sweep_no_plateau_exit_code(tmp_path, model_file):
    cfg = _sweep_config(tmp_path, model_file, plateau_threshold=1e9)
    code = main(["sweep", "--config", str(cfg), "--select", "plateau",
                 "--out", str(tmp_path / "m.csv")])
    assert code == 3


def test_survey(tmp_path, model_file):
    instances = tmp_path / "instances.json"
    instances.write_text(
        json.dumps(
            [
                {"name": "chained", "path": str(model_file), "chain_length": 2},
                {"name": "big", "path": str(model_file)},
            ]
        )
    )
    out = tmp_path / "survey.csv"
    assert main(["survey", "--instances", str(instances), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 3
    assert lines[1].startswith("chained,3,")


def test_check_qap(tmp_path):
    samples = tmp_path / "samples.csv"
    ids = " ".join(str(i) for i in range(1, 26))
    perm_bits = ["+1" if (i % 6 == 0) else "-1" for i in range(25)]  # identity permutation
    samples.write_text(
        f"# variables: {ids}\n"
        "assignment,energy,occurrences,chain_broken\n"
        + "".join(perm_bits) + ",0.0,2,0\n"
    )
    out = tmp_path / "check.csv"
    code = main(
        ["check", "--format", "qap", "--instance", str(FIXTURES / "nug5.qap"),
         "--samples", str(samples), "--out", str(out)]
    )
    assert code == 0
    line = out.read_text().splitlines()[1]
    assert line.endswith(",2,1,66.0")  # identity permutation cost on the fixture


def test_check_mkp(tmp_path):
    inst = FIXTURES / "weing1_shape.mkp"
    ids = " ".join(str(i) for i in range(1, 29))
    samples = tmp_path / "samples.csv"
    samples.write_text(
        f"# variables: {ids}\n"
        "assignment,energy,occurrences,chain_broken\n"
        + "-1" * 28 + ",0.0,1,0\n"
    )
    out = tmp_path / "check.csv"
    assert main(
        ["check", "--format", "mkp", "--instance", str(inst),
         "--samples", str(samples), "--out", str(out)]
    ) == 0
    assert out.read_text().splitlines()[1].endswith(",1,1,0")


class TestExitCodes:
    def test_usage_error_is_one(self):
        with pytest.raises(SystemExit) as exc:
            main(["reduce", "iem"])  # missing required arguments
        assert exc.value.code == 1

    def test_invalid_embedding_is_two(self, tmp_path, model_file):
        emb = tmp_path / "emb.json"
        hw = tmp_path / "hw.json"
        emb.write_text(json.dumps({"1": [10], "2": [12], "3": [13]}))
        hw.write_text(json.dumps({"nodes": [10, 11, 12, 13], "edges": [[10, 11], [12, 13]]}))
        code = main(
            ["embed", "--model", str(model_file), "--embedding", str(emb),
             "--hardware", str(hw), "--chain-strength", "1", "--out", str(tmp_path / "o.json")]
        )
        assert code == 2

    def test_bad_value_is_one(self, model_file):
        code = main(["reduce", "iem", "--model", str(model_file), "--bound", "-1"])
        assert code == 1

    def test_missing_file_is_two(self):
        code = main(["sample", "--model", "no_such_model.json"])
        assert code == 2

    def test_malformed_model_is_two(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken")
        assert main(["sample", "--model", str(bad)]) == 2
