import json
import logging

import pytest

from forensic_lr import Database, LocusCounts, summarize
from forensic_lr.cli import PriorConfig, dumps, main
from forensic_lr.profiles import read_database_csv, write_database_csv


def write(path, text):
    path.write_text(text)
    return str(path)


def profile_csv(tmp_path, name, states):
    header = ",".join(f"locus_{i + 1}" for i in range(len(states)))
    return write(tmp_path / name, header + "\n" + ",".join(map(str, states)) + "\n")


def prior_json(tmp_path, data):
    return write(tmp_path / "prior.json", json.dumps(data))


def run(capsys, argv):
    code = main(argv)
    return code, capsys.readouterr().out


@pytest.fixture
def case(tmp_path):
    s = profile_csv(tmp_path, "s.csv", (1, 1, 1))
    c = profile_csv(tmp_path, "c.csv", (1, 1, 1))
    return tmp_path, s, c


class TestDumps:
    def test_layout(self):
        text = dumps({"a": 1, "b": [0.1, float("inf")], "c": {"d": float("-inf")}})
        assert text == '{\n  "a": 1,\n  "b": [0.10000000000000001, "inf"],\n  "c": {\n    "d": "-inf"\n  }\n}\n'

    def test_round_trip_digits(self):
        x = 0.1 + 0.2
        assert float(json.loads(dumps([x]))[0]) == x


class TestPriorConfig:
    def test_named(self):
        assert PriorConfig.from_dict({"named": "Jeffreys"}).priors(2)[0].tag.value == "jeffreys"

    def test_structure_broadcast(self):
        priors = PriorConfig.from_dict({"structure": {"p": 0.2, "theta": 0.02}}).priors(3)
        assert len(priors) == 3 and priors[0] == priors[2]

    def test_natural_arrays(self):
        priors = PriorConfig.from_dict({"natural": {"alpha": [1, 2], "beta": 3}}).priors(2)
        assert (priors[1].alpha, priors[1].beta) == (2.0, 3.0)

    @pytest.mark.parametrize("data", [
        {},
        {"named": "laplace", "natural": {"alpha": 1, "beta": 1}},
        {"named": "uniform"},
        {"structure": {"p": 0.2}},
        {"structure": {"p": 0.2, "theta": [0.1]}},
        {"natural": {"alpha": "x", "beta": 1}},
        {"natural": {"alpha": [], "beta": 1}},
        [1, 2],
    ])
    def test_rejects(self, data):
        from forensic_lr import ValidationError
        with pytest.raises(ValidationError):
            PriorConfig.from_dict(data)


class TestCompute:
    def test_full_bayes_empty_database(self, capsys, case):
        _, s, c = case
        code, out = run(capsys, ["compute", "--suspect", s, "--perpetrator", c, "--recipe", "full-bayes"])
        assert code == 0
        report = json.loads(out)
        assert report["per_locus_lr"] == [1.0, 1.0, 1.0]
        assert report["total_lr"] == 1.0 and report["log10_total"] == 0.0
        assert report["database_size"] == 0

    def test_plugin(self, capsys, case):
        tmp, s, c = case
        prior = prior_json(tmp, {"structure": {"p": [0.2, 0.1, 0.05], "theta": 0.01}})
        code, out = run(capsys, ["compute", "--suspect", s, "--perpetrator", c,
                                 "--prior", prior, "--recipe", "plugin"])
        assert code == 0
        report = json.loads(out)
        # 1 / ((1 - theta) p + theta) per locus
        expected = 1 / (0.99 * 0.2 + 0.01) / (0.99 * 0.1 + 0.01) / (0.99 * 0.05 + 0.01)
        assert report["total_lr"] == pytest.approx(expected, rel=1e-12)
        assert report["log10_total"] == pytest.approx(2.8699932013680653, rel=1e-12)

    def test_plugin_ignores_database(self, capsys, caplog, case):
        tmp, s, c = case
        prior = prior_json(tmp, {"structure": {"p": [0.2, 0.1, 0.05], "theta": 0.01}})
        db = tmp / "db.csv"
        write_database_csv(Database([(1, 1, 1), (0, 1, 0)]), db)
        argv = ["compute", "--suspect", s, "--perpetrator", c, "--prior", prior, "--recipe", "plugin"]
        _, without = run(capsys, argv)
        with caplog.at_level(logging.WARNING):
            code, with_db = run(capsys, argv + ["--database", str(db)])
        assert code == 0 and with_db == without
        assert "ignores the database" in caplog.text

    def test_mismatch(self, capsys, tmp_path):
        s = profile_csv(tmp_path, "s.csv", (1, 0))
        c = profile_csv(tmp_path, "c.csv", (1, 1))
        code, out = run(capsys, ["compute", "--suspect", s, "--perpetrator", c, "--prior-prob", "0.5"])
        assert code == 0
        report = json.loads(out)
        assert report["total_lr"] == 0.0 and report["log10_total"] == "-inf"
        assert report["posterior_odds"] == 0.0 and report["posterior_prob_hp"] == 0.0

    def test_custom_with_database(self, capsys, tmp_path):
        s = profile_csv(tmp_path, "s.csv", (1, 0))
        db = tmp_path / "db.csv"
        write_database_csv(Database([(1, 1), (0, 0), (0, 1)]), db)
        prior = prior_json(tmp_path, {"named": "laplace"})
        code, out = run(capsys, ["compute", "--suspect", s, "--perpetrator", s, "--database", str(db),
                                 "--prior", prior, "--recipe", "custom", "--likelihoods"])
        assert code == 0
        report = json.loads(out)
        # n = (1, 2), L = 3: (a + b + L + 1) / (a + n + 1) and / (b + L + 1 - n)
        assert report["per_locus_lr"] == pytest.approx([6 / 3, 6 / 3], rel=1e-15)
        assert report["prosecution_likelihood"] / report["defence_likelihood"] == pytest.approx(4.0, rel=1e-12)

    def test_full_bayes_warns_on_prior(self, capsys, caplog, case):
        tmp, s, c = case
        prior = prior_json(tmp, {"named": "laplace"})
        with caplog.at_level(logging.WARNING):
            code, out = run(capsys, ["compute", "--suspect", s, "--perpetrator", c, "--prior", prior])
        assert code == 0 and json.loads(out)["total_lr"] == 1.0
        assert "Haldane" in caplog.text

    def test_deterministic_output(self, capsys, case):
        tmp, s, c = case
        db = tmp / "db.csv"
        write_database_csv(Database([(1, 0, 1), (0, 0, 1), (1, 1, 1)]), db)
        argv = ["compute", "--suspect", s, "--perpetrator", c, "--database", str(db), "--prior-prob", "0.01"]
        assert run(capsys, argv)[1] == run(capsys, argv)[1]

    def test_key_order(self, capsys, case):
        _, s, c = case
        _, out = run(capsys, ["compute", "--suspect", s, "--perpetrator", c, "--prior-prob", "0.2"])
        assert list(json.loads(out)) == ["recipe", "num_loci", "database_size", "per_locus_lr", "total_lr",
                                         "log10_total", "prior_prob_hp", "posterior_odds", "posterior_prob_hp"]

    def test_haldane_likelihoods_without_data(self, capsys, case):
        _, s, c = case
        code, _ = run(capsys, ["compute", "--suspect", s, "--perpetrator", c, "--likelihoods"])
        assert code == 3

    @pytest.mark.parametrize("extra", [
        ["--prior-prob", "1.0"],
        ["--prior-prob", "0"],
        ["--recipe", "plugin"],
        ["--recipe", "custom"],
    ])
    def test_validation_errors(self, capsys, case, extra):
        _, s, c = case
        assert run(capsys, ["compute", "--suspect", s, "--perpetrator", c] + extra)[0] == 2

    def test_bad_profile_files(self, capsys, tmp_path):
        s = profile_csv(tmp_path, "s.csv", (1, 0))
        c = profile_csv(tmp_path, "c.csv", (1, 0, 1))
        bad = write(tmp_path / "bad.csv", "locus_1\n2\n")
        assert run(capsys, ["compute", "--suspect", s, "--perpetrator", c])[0] == 2
        assert run(capsys, ["compute", "--suspect", bad, "--perpetrator", bad])[0] == 2
        assert run(capsys, ["compute", "--suspect", str(tmp_path / "none.csv"), "--perpetrator", s])[0] == 2

    def test_bad_prior_values(self, capsys, case):
        tmp, s, c = case
        prior = prior_json(tmp, {"natural": {"alpha": -1, "beta": 1}})
        assert run(capsys, ["compute", "--suspect", s, "--perpetrator", c, "--prior", prior,
                            "--recipe", "custom"])[0] == 2
        prior = prior_json(tmp, {"structure": {"p": 0.2, "theta": 0}})
        assert run(capsys, ["compute", "--suspect", s, "--perpetrator", c, "--prior", prior,
                            "--recipe", "plugin"])[0] == 2

    def test_database_width(self, capsys, case):
        tmp, s, c = case
        db = tmp / "db.csv"
        write_database_csv(Database([(1, 0)]), db)
        assert run(capsys, ["compute", "--suspect", s, "--perpetrator", c, "--database", str(db)])[0] == 2

    def test_unknown_recipe(self, case):
        _, s, c = case
        with pytest.raises(SystemExit) as exc:
            main(["compute", "--suspect", s, "--perpetrator", c, "--recipe", "magic"])
        assert exc.value.code == 2


class TestVerify:
    def test_default_passes(self, capsys):
        code, out = run(capsys, ["verify"])
        assert code == 0
        report = json.loads(out)
        assert report["passed"] and report["haldane"]["passed"]
        assert report["max_rel_discrepancy"] <= 1e-9
        assert report["grid"] == {"alphas": [0.25, 0.5, 1.0, 2.0, 5.0], "max_L": 20}

    def test_impossible_tolerance_fails(self, capsys):
        code, out = run(capsys, ["verify", "--rel-tol", "1e-15"])
        assert code == 1
        assert not json.loads(out)["passed"]

    def test_haldane_table(self, capsys):
        code, out = run(capsys, ["verify", "--grid", "1:3", "--haldane-eps", "1e-4,1e-6,1e-8"])
        assert code == 0
        table = json.loads(out)["haldane"]["table"]
        assert len(table) == sum(2 * (L + 1) for L in range(4))
        row = next(r for r in table if (r["n"], r["L"], r["s"]) == (0, 3, 1))
        assert row["limit"] == 4.0
        assert row["lr"] == sorted(row["lr"])

    def test_grid_table_file(self, capsys, tmp_path):
        path = tmp_path / "grid.csv"
        code, out = run(capsys, ["verify", "--grid", "0.5,2:2", "--table", str(path)])
        assert code == 0
        lines = path.read_text().splitlines()
        assert lines[0].startswith("quantity,alpha,beta,n,L,r,s")
        assert len(lines) - 1 == json.loads(out)["num_points"]

    @pytest.mark.parametrize("argv", [
        ["verify", "--grid", "0,1:3"],
        ["verify", "--grid", "x:3"],
        ["verify", "--grid", "1:-1"],
        ["verify", "--haldane-eps", "2"],
    ])
    def test_bad_arguments(self, capsys, argv):
        assert run(capsys, argv)[0] == 2


class TestSimulate:
    def test_empty(self, capsys, tmp_path):
        out = tmp_path / "db.csv"
        code, text = run(capsys, ["simulate", "--q", "0.2,0.7", "--num", "0", "--seed", "1", "--out", str(out)])
        assert code == 0
        assert out.read_text() == "locus_1,locus_2\n"
        assert json.loads(text)["counts"] == [0, 0]

    def test_reproducible(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(capsys, ["simulate", "--q", "0.3,0.6,0.9", "--num", "200", "--seed", "42", "--out", str(a)])
        run(capsys, ["simulate", "--q", "0.3,0.6,0.9", "--num", "200", "--seed", "42", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_frequencies_and_counts(self, capsys, tmp_path):
        out = tmp_path / "db.csv"
        qfile = write(tmp_path / "q.json", "[0.5, 0.5]")
        code, text = run(capsys, ["simulate", "--q", qfile, "--num", "1000", "--seed", "7", "--out", str(out)])
        assert code == 0
        db = read_database_csv(out)
        counts = summarize(db)
        assert all(450 <= n <= 550 for n in counts.n)
        assert json.loads(text)["counts"] == list(counts.n)
        assert counts == LocusCounts(tuple(json.loads(text)["counts"]), 1000)

    @pytest.mark.parametrize("q, num, seed", [("0,0.5", "5", "1"), ("0.5,1", "5", "1"), ("0.5", "-1", "1"),
                                              ("0.5", "5", "-1"), ("abc", "5", "1")])
    def test_bad_arguments(self, capsys, tmp_path, q, num, seed):
        out = tmp_path / "db.csv"
        assert run(capsys, ["simulate", "--q", q, "--num", num, "--seed", seed, "--out", str(out)])[0] == 2
