"""End-to-end checks of the command-line front end.

Everything goes through cli.main() so exit codes, stdout tables, and
on-disk artifacts are exercised exactly as a shell user sees them.
"""

import json
import math
import os

import numpy as np
import pytest

from ineqlab import cli, functional, spectra, verify
from ineqlab.lattice import integral, make_lattice
from ineqlab.operators import build_laplacian


# ---------------------------------------------------------------------------
# constants subcommand


def test_constants_table_exact_lines(capsys):
    rc = cli.main(["constants", "--hardy", "1,3", "--al-factor", "1,2,1.5",
                   "--exponents", "1,1.5"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.splitlines() == [
        "hardy_C(s=1, d=3)     0.25",
        "al_factor(1, 2, 1.5)  2.285714285714",
        "q                     3.333333333333",
        "theta                 0.6",
    ]


def test_constants_lieb_bound_and_json_out(tmp_path, capsys):
    K = (4.0 * math.pi) ** -1.5
    path = tmp_path / "constants.json"
    rc = cli.main(["constants", "--lieb-bound", f"{K!r},1.5", "--out", str(path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "lieb_L" in out and "lieb_a_star" in out
    assert "0.115621917414" in out
    assert "0.247218905" in out

    payload = json.loads(path.read_text())
    ref = functional.lieb_bound_from_K(K, 1.5)
    # 17-significant-digit serialization round-trips binary64 exactly
    assert payload["lieb_bound"]["value"] == ref.value
    assert payload["lieb_bound"]["K"] == K
    assert payload["lieb_bound"]["a_star"] == pytest.approx(ref.a_star, rel=1e-12)


def test_constants_exit_codes(capsys):
    # no flags at all is a usage error
    assert cli.main(["constants"]) == 2
    assert "config error" in capsys.readouterr().err
    # domain violation (d <= 2s) surfaces as exit 2, not a traceback
    assert cli.main(["constants", "--hardy", "1,1"]) == 2
    assert "error" in capsys.readouterr().err
    # wrong arity and non-numeric input are config errors
    assert cli.main(["constants", "--hardy", "1"]) == 2
    capsys.readouterr()
    assert cli.main(["constants", "--exponents", "a,b"]) == 2
    capsys.readouterr()


# ---------------------------------------------------------------------------
# verify subcommand

TINY_CONFIG = {
    "schema": 1,
    "scenarios": [
        {
            "id": "tiny-a",
            "lattice": {"d": 1, "extents": [8], "h": 1.0, "bc": "dirichlet"},
            "operator": {"family": "laplacian"},
            "exponents": {"kappa": 1.5},
            "potential": {"seed": 5, "sigmas": [1.0], "draws": 1},
            "checks": ["CLR"],
            "seed": 1,
        },
        {
            "id": "tiny-b",
            "lattice": {"d": 1, "extents": [6], "h": 1.0, "bc": "dirichlet"},
            "operator": {"family": "laplacian"},
            "exponents": {"kappa": 2.0, "gamma_tilde": 1.5},
            "potential": {"seed": 9, "sigmas": [0.5], "draws": 2},
            "checks": ["CLR", "momentIdentity"],
            "seed": 2,
        },
    ],
}


def _write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_verify_tiny_config_artifacts(tmp_path, capsys):
    cfg_path = _write_config(tmp_path, TINY_CONFIG)
    out1 = tmp_path / "run1"
    rc = cli.main(["verify", "--config", cfg_path, "--out", str(out1), "--jobs", "1"])
    assert rc == 0
    stdout = capsys.readouterr().out
    assert "tiny-a:" in stdout and "tiny-b:" in stdout
    assert "wrote" in stdout

    report_path = out1 / "report.json"
    csv_path = out1 / "report.csv"
    payload = json.loads(report_path.read_text())
    assert payload["schema"] == 1
    assert payload["suite"]["n_scenarios"] == 2
    assert payload["suite"]["all_passed"] is True
    assert [r["scenario_id"] for r in payload["results"]] == ["tiny-a", "tiny-b"]

    csv_bytes = csv_path.read_bytes()
    assert b"\r" not in csv_bytes
    lines = csv_bytes.decode().splitlines()
    assert lines[0] == "scenario_id,theorem_tag,lhs,rhs,margin,pass,assumption_status"
    n_reports = sum(len(r["reports"]) for r in payload["results"])
    assert len(lines) == 1 + n_reports
    for line in lines[1:]:
        cols = line.split(",")
        assert len(cols) == 7
        assert cols[5] in ("true", "false")

    # rerun into a second directory: artifacts must be byte-identical
    out2 = tmp_path / "run2"
    rc = cli.main(["verify", "--config", cfg_path, "--out", str(out2), "--jobs", "1"])
    capsys.readouterr()
    assert rc == 0
    assert (out2 / "report.json").read_bytes() == report_path.read_bytes()
    assert (out2 / "report.csv").read_bytes() == csv_bytes


def test_verify_seed_override_changes_draws(tmp_path, capsys):
    cfg_path = _write_config(tmp_path, TINY_CONFIG)
    out1, out2 = tmp_path / "s1", tmp_path / "s2"
    assert cli.main(["verify", "--config", cfg_path, "--out", str(out1),
                     "--jobs", "1", "--seed", "123"]) == 0
    assert cli.main(["verify", "--config", cfg_path, "--out", str(out2),
                     "--jobs", "1", "--seed", "124"]) == 0
    capsys.readouterr()
    a = json.loads((out1 / "report.json").read_text())
    b = json.loads((out2 / "report.json").read_text())
    lhs_a = [r["lhs"] for res in a["results"] for r in res["reports"]]
    lhs_b = [r["lhs"] for res in b["results"] for r in res["reports"]]
    assert lhs_a != lhs_b


def test_verify_invalid_configs_exit_2(tmp_path, capsys):
    assert cli.main(["verify", "--config", str(tmp_path / "missing.json")]) == 2
    assert "config error" in capsys.readouterr().err

    bad = dict(TINY_CONFIG, schema=2)
    assert cli.main(["verify", "--config", _write_config(tmp_path, bad, "bad1.json"),
                     "--out", str(tmp_path / "o1")]) == 2
    assert "schema" in capsys.readouterr().err

    bad = json.loads(json.dumps(TINY_CONFIG))
    bad["scenarios"][0]["exponents"]["kappa"] = 0.9
    assert cli.main(["verify", "--config", _write_config(tmp_path, bad, "bad2.json"),
                     "--out", str(tmp_path / "o2")]) == 2
    assert "kappa" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# sweep subcommand

SWEEP_INSTANCE = {
    "lattice": {"d": 2, "extents": [3, 3], "h": 1.0, "bc": "dirichlet"},
    "operator": {"family": "laplacian"},
    "potential": {"values": [0.5, 1.25, 0.5, 3.0, 1.25, 0.5, 1.25, 3.0, 0.5]},
    "profile": {"kind": "hinge", "a": 1.0},
}


def _sweep_config(axis, values, instance=None):
    return {"schema": 1, "sweep": {"axis": axis, "values": values,
                                   "instance": instance or dict(SWEEP_INSTANCE)}}


def _read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = [dict(zip(header, line.split(","))) for line in lines[1:]]
    return header, rows


def test_sweep_trotter_axis(tmp_path, capsys):
    cfg = _sweep_config("trotter_n", [1, 2, 4])
    out = tmp_path / "trotter.csv"
    rc = cli.main(["sweep", "--config", _write_config(tmp_path, cfg),
                   "--out", str(out)])
    capsys.readouterr()
    assert rc == 0
    header, rows = _read_csv(out)
    assert header == ["n", "estimate", "exact", "bound", "rel_error", "n_panels",
                      "tail_ok"]
    assert [r["n"] for r in rows] == ["1", "2", "4"]
    assert all(r["tail_ok"] == "true" for r in rows)
    exact = {float(r["exact"]) for r in rows}
    assert len(exact) == 1
    errs = [float(r["rel_error"]) for r in rows]
    assert errs[2] < errs[1] < errs[0]
    for r in rows:
        assert float(r["bound"]) >= float(r["estimate"]) >= float(r["exact"])
    # the product formula with a single slice coincides with its own bound
    assert float(rows[0]["estimate"]) == float(rows[0]["bound"])


def test_sweep_coupling_axis(tmp_path, capsys):
    inst = {
        "lattice": {"d": 1, "extents": [10], "h": 1.0, "bc": "dirichlet"},
        "operator": {"family": "laplacian"},
        "potential": {"values": [0.5, 1.5, 2.5, 0.5, 3.5, 1.0, 0.25, 2.0, 0.75, 1.25]},
        "kappa": 1.5,
    }
    cfg = _sweep_config("coupling", [0.25, 1.0, 4.0, 16.0], inst)
    out = tmp_path / "coupling.csv"
    assert cli.main(["sweep", "--config", _write_config(tmp_path, cfg),
                     "--out", str(out)]) == 0
    capsys.readouterr()
    header, rows = _read_csv(out)
    assert header == ["c", "count", "integral", "ratio"]
    counts = [int(r["count"]) for r in rows]
    assert counts == sorted(counts)
    assert counts[-1] > counts[0]

    space = make_lattice(1, [10])
    T = build_laplacian(space)
    V0 = np.asarray(inst["potential"]["values"])
    for r in rows:
        c = float(r["c"])
        assert int(r["count"]) == spectra.count_below(T, c * V0, 0.0).n
        iv = integral(c * V0, 1.5, space, measure=T.measure)
        assert float(r["integral"]) == pytest.approx(iv, rel=1e-10)


def test_sweep_flux_axis(tmp_path, capsys):
    inst = {
        "lattice": {"d": 2, "extents": [3, 3], "h": 1.0, "bc": "dirichlet"},
        "operator": {"family": "laplacian"},
        "potential": {"values": [0.5, 1.25, 0.5, 3.0, 1.25, 0.5, 1.25, 3.0, 0.5]},
    }
    cfg = _sweep_config("flux", [0.0, math.pi / 2], inst)
    out = tmp_path / "flux.csv"
    assert cli.main(["sweep", "--config", _write_config(tmp_path, cfg),
                     "--out", str(out)]) == 0
    capsys.readouterr()
    header, rows = _read_csv(out)
    assert header == ["flux", "count_magnetic", "count_nonmagnetic"]
    base = {r["count_nonmagnetic"] for r in rows}
    assert len(base) == 1
    # zero flux is gauge-equivalent to the plain operator
    assert rows[0]["count_magnetic"] == rows[0]["count_nonmagnetic"]
    # the magnetic count never exceeds the non-magnetic one (domination)
    for r in rows:
        assert int(r["count_magnetic"]) <= int(r["count_nonmagnetic"])


def test_sweep_tau_axis(tmp_path, capsys):
    cfg = _sweep_config("tau", [0.0, 0.1, 1.0, 10.0])
    out = tmp_path / "tau.csv"
    assert cli.main(["sweep", "--config", _write_config(tmp_path, cfg),
                     "--out", str(out)]) == 0
    capsys.readouterr()
    header, rows = _read_csv(out)
    assert header == ["tau", "count"]
    counts = [int(r["count"]) for r in rows]
    assert counts == sorted(counts, reverse=True)


def test_sweep_empty_values_header_only(tmp_path, capsys):
    cfg = _sweep_config("trotter_n", [])
    out = tmp_path / "empty.csv"
    assert cli.main(["sweep", "--config", _write_config(tmp_path, cfg),
                     "--out", str(out)]) == 0
    capsys.readouterr()
    assert out.read_text() == "n,estimate,exact,bound,rel_error,n_panels,tail_ok\n"


def test_sweep_unknown_axis_exit_2(tmp_path, capsys):
    cfg = _sweep_config("bogus", [1, 2])
    assert cli.main(["sweep", "--config", _write_config(tmp_path, cfg),
                     "--out", str(tmp_path / "x.csv")]) == 2
    assert "axis" in capsys.readouterr().err


def test_bundled_configs_resolve():
    suite = cli._load_config("paper-suite")
    verify.validate_config(suite)
    assert len(suite["scenarios"]) >= 10
    sweep = cli._load_config("trotter-sweep")
    assert sweep["sweep"]["axis"] == "trotter_n"
    assert sweep["sweep"]["values"] == [1, 2, 4, 8, 16, 32]


# ---------------------------------------------------------------------------
# golden pin of the bundled suite


def _structural_rows(payload):
    rows = []
    for res in payload["results"]:
        for r in res["reports"]:
            rows.append([r["scenario_id"], r["tag"], r["status"],
                         format(float(r["lhs"]), ".6g"),
                         format(float(r["rhs"]), ".6g")])
    return rows


def test_bundled_suite_matches_golden(suite_run):
    golden_path = os.path.join(os.path.dirname(__file__), "data",
                               "paper_suite_golden.json")
    golden = json.loads(open(golden_path).read())
    payload = suite_run["report"]
    assert payload["suite"] == golden["suite"]
    assert _structural_rows(payload) == golden["rows"]
