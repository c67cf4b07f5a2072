import json
import tempfile
from pathlib import Path

import numpy as np
import pytest

from hodoiod.cli import (
    EXIT_CONFIG,
    EXIT_NUMERIC,
    EXIT_OK,
    ConfigError,
    load_montecarlo_config,
    load_simulate_config,
    main,
    observations_to_csv,
    read_observations,
)
from hodoiod.montecarlo import SUMMARY_FIELDS, read_summary_csv

from conftest import REF_HEADINGS

CONFIGS = Path(__file__).resolve().parents[1] / "configs" / "lunar"


def _simulate_doc(**extra):
    doc = {
        "schema_version": 1,
        "mu_km3_s2": 4902.8,
        "elements": {"a_km": 2173.4, "e": 0.15, "inc_deg": 65.0, "raan_deg": 70.0, "argp_deg": 20.0},
        "true_anomalies_deg": [5.0, 70.0, 140.0, 235.0],
    }
    doc.update(extra)
    return doc


def _write_json(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def test_simulate_then_solve(tmp_path):
    cfg = _write_json(tmp_path / "sim.json", _simulate_doc())
    obs = tmp_path / "obs.csv"
    assert main(["simulate", cfg, "-o", str(obs)]) == EXIT_OK
    text = obs.read_bytes().decode()
    assert text.startswith("t_sec,sx,sy,sz\n") and "\r" not in text
    out = tmp_path / "sol.json"
    assert main(["solve", str(obs), "--mu", "4902.8", "-o", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == 1 and doc["converged"]
    assert doc["elements"]["a_km"] == pytest.approx(2173.4, rel=1e-9)
    assert doc["elements"]["inc_deg"] == pytest.approx(65.0, abs=1e-8)
    assert doc["elements"]["periapsis_defined"] is True


def test_simulate_is_byte_reproducible(tmp_path):
    cfg = _write_json(tmp_path / "sim.json", _simulate_doc(noise_sigma_deg=0.5, seed=4))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["simulate", cfg, "-o", str(a)])
    main(["simulate", cfg, "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_observation_csv_round_trip_is_exact(lunar_el):
    from hodoiod.hodograph import MOON
    from hodoiod.simulate import Scenario, generate_observations
    obs = generate_observations(Scenario(lunar_el, MOON, (5.0, 70.0), noise_sigma_deg=1.0, seed=1))
    path = Path(tempfile.mkdtemp()) / "o.csv"
    path.write_text(observations_to_csv(obs))
    for a, b in zip(obs, read_observations(str(path))):
        assert a.t == b.t
        np.testing.assert_array_equal(a.s, b.s)


def test_solve_reference_file(tmp_path, capsys):
    out = tmp_path / "sol.json"
    code = main(["solve", str(CONFIGS / "reference_observations.csv"), "--mu", "4902.8",
                 "-o", str(out), "--echo-iterations"])
    assert code == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["iterations"] == 5
    assert doc["R_km_s"] == pytest.approx(1.5191, abs=1e-3)
    assert len(doc["residual_history_s2"]) == 6
    printed = capsys.readouterr().out.splitlines()
    assert len(printed) == 7 and printed[0].split()[0] == "m"


def test_solve_nonconvergence_writes_best_estimate(tmp_path):
    out = tmp_path / "sol.json"
    code = main(["solve", str(CONFIGS / "reference_observations.csv"), "--mu", "4902.8",
                 "-o", str(out), "--max-iter", "1"])
    assert code == EXIT_NUMERIC
    assert json.loads(out.read_text())["converged"] is False


@pytest.mark.parametrize("content,fragment", [
    ("t,sx,sy,sz\n0,1,0,0\n", "header"),
    ("t_sec,sx,sy,sz\n0,1,0,x\n", "non-numeric"),
    ("t_sec,sx,sy,sz\n0,2,0,0\n", "unit-norm"),
    ("t_sec,sx,sy,sz\n0,1,0\n", "4 finite"),
])
def test_bad_observation_files(tmp_path, capsys, content, fragment):
    p = tmp_path / "o.csv"
    p.write_text(content)
    assert main(["solve", str(p), "--mu", "4902.8", "-o", str(tmp_path / "x.json")]) == EXIT_CONFIG
    assert fragment in capsys.readouterr().err


def test_solve_rejects_short_and_duplicate_input(tmp_path, capsys):
    rows = "".join(f"{t},{float(s[0])!r},{float(s[1])!r},{float(s[2])!r}\n"
                   for t, s in zip([0, 60, 60, 120], REF_HEADINGS / np.linalg.norm(REF_HEADINGS, axis=1)[:, None]))
    p = tmp_path / "o.csv"
    p.write_text("t_sec,sx,sy,sz\n" + rows)
    assert main(["solve", str(p), "--mu", "4902.8", "-o", str(tmp_path / "x.json")]) == EXIT_CONFIG
    assert "duplicate" in capsys.readouterr().err
    p.write_text("t_sec,sx,sy,sz\n" + "".join(rows.splitlines(True)[:3]))
    assert main(["solve", str(p), "--mu", "4902.8", "-o", str(tmp_path / "x.json")]) == EXIT_CONFIG


def test_solve_degenerate_geometry(tmp_path):
    p = tmp_path / "o.csv"
    p.write_text("t_sec,sx,sy,sz\n0,1,0,0\n1,-1,0,0\n2,1,0,0\n3,-1,0,0\n")
    assert main(["solve", str(p), "--mu", "4902.8", "-o", str(tmp_path / "x.json")]) == EXIT_NUMERIC


def test_bad_mu(tmp_path):
    assert main(["solve", str(CONFIGS / "reference_observations.csv"), "--mu", "-1",
                 "-o", str(tmp_path / "x.json")]) == EXIT_CONFIG


@pytest.mark.parametrize("mutate,fragment", [
    (lambda d: d.update(schema_version=2), "schema_version"),
    (lambda d: d.update(colour="red"), "unknown field(s) colour"),
    (lambda d: d["elements"].update(ecc=0.1), "config.elements: unknown field(s) ecc"),
    (lambda d: d["elements"].pop("e"), "missing field(s) e"),
    (lambda d: d["elements"].update(e=1.2), "config.elements"),
    (lambda d: d.update(times_s=[1.0, 2.0]), "exactly one"),
    (lambda d: d.update(true_anomalies_deg=[10.0, 5.0]), "increasing"),
    (lambda d: d.update(mu_km3_s2="big"), "config.mu_km3_s2"),
    (lambda d: d.update(seed=1.5), "config.seed"),
])
def test_simulate_config_errors(mutate, fragment):
    doc = _simulate_doc()
    mutate(doc)
    with pytest.raises(ConfigError, match=fragment.replace("(", r"\(").replace(")", r"\)")):
        load_simulate_config(doc)


def test_config_error_exit_code(tmp_path, capsys):
    cfg = _write_json(tmp_path / "sim.json", _simulate_doc(schema_version=0))
    assert main(["simulate", cfg, "-o", str(tmp_path / "o.csv")]) == EXIT_CONFIG
    assert "schema_version" in capsys.readouterr().err
    assert main(["simulate", str(tmp_path / "missing.json"), "-o", "x"]) == EXIT_CONFIG
    (tmp_path / "bad.json").write_text("{")
    assert main(["simulate", str(tmp_path / "bad.json"), "-o", "x"]) == EXIT_CONFIG
    assert main(["nonsense"]) == EXIT_CONFIG


def test_shipped_configs_load():
    sc = load_simulate_config(json.loads((CONFIGS / "simulate_four.json").read_text()))
    assert sc.n_observations == 4
    studies, workers = load_montecarlo_config(json.loads((CONFIGS / "montecarlo_2000.json").read_text()))
    assert [name for name, _ in studies] == ["four", "ten"]
    assert studies[1][1].scenario.n_observations == 10
    assert studies[0][1].trials == 2000 and workers == 1


def test_montecarlo_command(tmp_path):
    doc = json.loads((CONFIGS / "montecarlo_2000.json").read_text())
    doc["trials"] = 6
    cfg = _write_json(tmp_path / "mc.json", doc)
    out = tmp_path / "summary.csv"
    assert main(["montecarlo", cfg, "-o", str(out)]) == EXIT_OK
    rows = read_summary_csv(out.read_text())
    assert len(rows) == 6 and list(rows[0]) == list(SUMMARY_FIELDS)
    trials = (tmp_path / "summary_trials.csv").read_text().splitlines()
    assert len(trials) == 1 + 6 * 6
    out2 = tmp_path / "summary2.csv"
    assert main(["montecarlo", cfg, "-o", str(out2), "--workers", "2",
                 "--trials-output", str(tmp_path / "t2.csv")]) == EXIT_OK
    assert out.read_bytes() == out2.read_bytes()
