"""End-to-end tests for the command line interface.

Every test drives cli.main(argv) in-process. Grids are kept small so the
whole module stays fast; numerical claims at these resolutions are limited
to exit codes, file schema, and determinism.
"""

import json
import math

import pytest

from umbilic import cli

SMALL = ["--grid", "64x64", "--depth", "4"]

SQUASHED_BALL = """\
[surface]
name = squashed_ball
x = sin(u)*cos(v)
y = sin(u)*sin(v)
z = k*cos(u)
u_range = 0, pi
v_range = 0, 2*pi
periodic_v = true
singular_margin = 1e-3
closed = true

[params]
k = 0.6
"""


def run(argv, out_dir):
    return cli.main(argv + ["--out", str(out_dir)])


def read_json(out_dir, stem):
    with open(out_dir / f"{stem}_report.json") as fh:
        return json.load(fh)


def read_csv_lines(out_dir, stem):
    return (out_dir / f"{stem}_rows.csv").read_text().splitlines()


# -- list-presets ------------------------------------------------------------------


def test_list_presets(capsys):
    assert cli.main(["list-presets"]) == 0
    out = capsys.readouterr().out
    for name in ("sphere", "torus", "ellipsoid_rev", "graph_bump"):
        assert name in out
    assert "closed" in out and "open" in out


def test_list_presets_rejects_extras():
    assert cli.main(["list-presets", "--r", "2"]) == 2


# -- identities --------------------------------------------------------------------


def test_identities_pass(tmp_path, capsys):
    assert run(["identities", "--preset", "sphere", "--n", "200"] + SMALL, tmp_path) == 0
    assert "identities: PASS" in capsys.readouterr().out
    payload = read_json(tmp_path, "identities")
    assert payload["verdict"] == "PASS"
    names = [r["identity"] for r in payload["rows"]]
    assert names == ["codazzi", "div", "smo", "norm", "bochner"]
    for row in payload["rows"]:
        assert set(row) == {"identity", "max_residual", "mean_residual", "tolerance", "passed"}
        assert row["passed"] is True
    # relation residual bound stays two orders below the curvature one
    tols = {r["identity"]: r["tolerance"] for r in payload["rows"]}
    assert tols["bochner"] == pytest.approx(100.0 * tols["codazzi"])


def test_identities_fail_on_absurd_tolerance(tmp_path):
    # residuals sit near 1e-10, so 1e-16 must flag codazzi/div/bochner
    code = run(
        ["identities", "--preset", "sphere", "--n", "200", "--tol", "1e-16"] + SMALL,
        tmp_path,
    )
    assert code == 1
    payload = read_json(tmp_path, "identities")
    assert payload["verdict"] == "FAIL"
    assert not all(r["passed"] for r in payload["rows"])


# -- verify ------------------------------------------------------------------------


def test_verify_sphere_report_schema(tmp_path, capsys):
    code = run(["verify", "--preset", "sphere", "--eps", "0.5,0.1"] + SMALL, tmp_path)
    assert code == 0
    assert "verify: PASS" in capsys.readouterr().out
    payload = read_json(tmp_path, "verify")
    assert set(payload) == {
        "config", "surface", "chi", "H_sup", "C_const",
        "rows", "verdict", "errors", "timestamp",
    }
    assert payload["verdict"] == "PASS"
    assert payload["chi"]["rounded"] == 2
    assert payload["surface"]["name"] == "sphere"
    assert payload["surface"]["closed"] is True
    assert payload["H_sup"] == pytest.approx(2.0, rel=1e-6)
    assert payload["C_const"] == pytest.approx(3.0, rel=1e-6)
    for row in payload["rows"]:
        # sphere is totally umbilic: both integral terms are numerical dust
        assert abs(row["term1"]) < 1e-40 and abs(row["term2"]) < 1e-40
        assert row["margin"] == pytest.approx(4.0 * math.pi, rel=1e-3)


def test_verify_csv_layout(tmp_path):
    assert run(["verify", "--preset", "torus", "--eps", "0.05"] + SMALL, tmp_path) == 0
    lines = read_csv_lines(tmp_path, "verify")
    comments = [l for l in lines if l.startswith("# ")]
    body = [l for l in lines if not l.startswith("# ")]
    assert any(l.startswith("# command=verify") for l in comments)
    assert any(l.startswith("# surface=torus") for l in comments)
    assert any(l.startswith("# seed=") for l in comments)
    assert body[0] == ",".join(cli.VERIFY_CSV_COLUMNS)
    # torus at eps=0.05 has an empty sublevel region: data columns all zero
    fields = body[1].split(",")
    assert len(fields) == len(cli.VERIFY_CSV_COLUMNS)
    assert float(fields[0]) == 0.05
    for value in fields[1:7]:  # vol, term1, term2, lhs, rhs
        assert float(value) == 0.0


def test_verify_fail_exit_code(tmp_path):
    # fixed tiny tolerance exposes the coarse-grid margin defect near the
    # sharpness regime instead of absorbing it
    code = run(
        ["verify", "--preset", "ellipsoid_rev", "--a", "1", "--b", "2",
         "--eps", "0.05", "--tol", "1e-9"] + SMALL,
        tmp_path,
    )
    assert code == 1
    assert read_json(tmp_path, "verify")["verdict"] == "FAIL"


def test_verify_with_sufficiency_check(tmp_path):
    code = run(
        ["verify", "--preset", "sphere", "--eps", "0.5", "--eps0", "0.5"] + SMALL,
        tmp_path,
    )
    assert code == 0
    payload = read_json(tmp_path, "verify")
    cor = payload["corollary"]
    assert cor["cond1_holds"] is True
    assert cor["cond2_holds"] is True
    assert cor["cond3_trend"] == "plateau"
    assert "Vol" in cor["verdict"]


def test_verify_param_override_reaches_report(tmp_path):
    assert run(["verify", "--preset", "sphere", "--r", "2", "--eps", "0.5"] + SMALL, tmp_path) == 0
    payload = read_json(tmp_path, "verify")
    assert payload["surface"]["params"] == {"r": 2.0}
    assert payload["H_sup"] == pytest.approx(1.0, rel=1e-6)


def test_verify_format_selects_outputs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["verify", "--preset", "sphere", "--eps", "0.5", "--format", "json"] + SMALL, a) == 0
    assert run(["verify", "--preset", "sphere", "--eps", "0.5", "--format", "csv"] + SMALL, b) == 0
    assert (a / "verify_report.json").exists() and not (a / "verify_rows.csv").exists()
    assert (b / "verify_rows.csv").exists() and not (b / "verify_report.json").exists()


def test_verify_reruns_are_byte_identical(tmp_path):
    argv = ["verify", "--preset", "ellipsoid_rev", "--a", "1", "--b", "2",
            "--eps", "0.5,0.1"] + SMALL
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(argv, a) == 0
    assert run(argv, b) == 0
    assert (a / "verify_rows.csv").read_bytes() == (b / "verify_rows.csv").read_bytes()

    def stripped(path):
        return [l for l in (path / "verify_report.json").read_text().splitlines()
                if '"timestamp"' not in l]

    assert stripped(a) == stripped(b)


# -- sweep -------------------------------------------------------------------------


def test_sweep_decreasing_exit_zero(tmp_path, capsys):
    code = run(
        ["sweep", "--preset", "ellipsoid_rev", "--a", "1", "--b", "1.05"] + SMALL,
        tmp_path,
    )
    assert code == 0
    assert "decreasing" in capsys.readouterr().out
    payload = read_json(tmp_path, "sweep")
    assert payload["verdict"] == "decreasing"
    gaps = [abs(r["normalized_gap"]) for r in payload["rows"]]
    assert gaps[-1] < gaps[0]
    lines = read_csv_lines(tmp_path, "sweep")
    body = [l for l in lines if not l.startswith("# ")]
    assert body[0] == "eps,sharp_gap,normalized_gap,trend"


def test_sweep_non_decreasing_exit_one(tmp_path):
    # at 128x128 the tail of the gap ladder loses monotonicity; restricting
    # the sweep to that tail forces a non-decreasing verdict deterministically
    code = run(
        ["sweep", "--preset", "ellipsoid_rev", "--a", "1", "--b", "2",
         "--eps", "0.1,0.05", "--grid", "128x128"],
        tmp_path,
    )
    assert code == 1
    assert read_json(tmp_path, "sweep")["verdict"] == "increasing"


def test_sweep_rejects_near_spherical(tmp_path, capsys):
    code = run(
        ["sweep", "--preset", "ellipsoid_rev", "--a", "1", "--b", "1.0001"] + SMALL,
        tmp_path,
    )
    assert code == 2
    assert "error:" in capsys.readouterr().err


# -- convergence -------------------------------------------------------------------


def test_convergence_sphere_area(tmp_path, capsys):
    code = run(
        ["convergence", "--preset", "sphere", "--grid", "128x128", "--levels", "3"],
        tmp_path,
    )
    assert code == 0
    assert "order=" in capsys.readouterr().out
    payload = read_json(tmp_path, "convergence")
    assert len(payload["rows"]) == 3
    assert payload["rows"][0]["grid"] == "32x32"
    assert payload["rows"][-1]["grid"] == "128x128"
    assert payload["rows"][-1]["value"] == pytest.approx(4.0 * math.pi, rel=1e-3)
    assert float(payload["verdict"]) == pytest.approx(2.0, abs=0.2)
    lines = read_csv_lines(tmp_path, "convergence")
    body = [l for l in lines if not l.startswith("# ")]
    assert body[0] == "grid,value,estimated_order,error_estimate"
    assert len(body) == 4


def test_convergence_rejects_indivisible_grid(tmp_path, capsys):
    code = run(
        ["convergence", "--preset", "sphere", "--grid", "66x66", "--levels", "3"],
        tmp_path,
    )
    assert code == 2
    assert "divisible" in capsys.readouterr().err


# -- definition files --------------------------------------------------------------


def test_verify_from_definition_file(tmp_path):
    path = tmp_path / "ball.ini"
    path.write_text(SQUASHED_BALL)
    code = run(["verify", "--file", str(path), "--eps", "0.3,0.1"] + SMALL, tmp_path)
    assert code == 0
    payload = read_json(tmp_path, "verify")
    assert payload["surface"]["name"] == "squashed_ball"
    assert payload["surface"]["params"] == {"k": 0.6}
    assert payload["chi"]["rounded"] == 2
    assert payload["config"]["source"] == f"file:{path}"


def test_definition_file_param_override(tmp_path):
    path = tmp_path / "ball.ini"
    path.write_text(SQUASHED_BALL)
    code = run(["verify", "--file", str(path), "--k", "0.8", "--eps", "0.3"] + SMALL, tmp_path)
    assert code == 0
    assert read_json(tmp_path, "verify")["surface"]["params"] == {"k": 0.8}


def test_ambient_override_revalidates(tmp_path):
    code = run(["verify", "--preset", "sphere", "--c", "1.0", "--eps", "0.5"] + SMALL, tmp_path)
    assert code == 0
    payload = read_json(tmp_path, "verify")
    assert payload["surface"]["c"] == 1.0
    # unit sphere in the c=1 model has H != 2
    assert abs(payload["H_sup"] - 2.0) > 1e-3


# -- error handling ----------------------------------------------------------------


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--preset", "klein_bottle", "--eps", "0.5"],
        ["verify", "--preset", "sphere", "--bogus", "3", "--eps", "0.5"],
        ["verify", "--preset", "sphere", "--r", "--eps", "0.5"],
        ["verify", "--preset", "sphere", "--r", "abc", "--eps", "0.5"],
        ["verify", "--preset", "sphere", "--eps", "0.1,0.5"],
        ["verify", "--preset", "sphere", "--eps", "0.5", "--grid", "64"],
        ["verify", "--preset", "sphere", "--eps", "0.5", "--tol", "-1"],
        ["verify", "--file", "/nonexistent/surface.ini", "--eps", "0.5"],
    ],
    ids=[
        "unknown-preset", "unknown-param", "unpaired-override", "non-numeric",
        "increasing-ladder", "bad-grid", "bad-tol", "missing-file",
    ],
)
def test_usage_errors_exit_two(argv, tmp_path, capsys):
    assert run(argv, tmp_path) == 2
    assert "error:" in capsys.readouterr().err


def test_missing_surface_selector(tmp_path, capsys):
    assert run(["verify", "--eps", "0.5"], tmp_path) == 2
    assert "--preset or --file" in capsys.readouterr().err
