import math
from dataclasses import replace

import pytest

from umbilic import verifier as V
from umbilic.errors import VerifierInputError
from umbilic.quadrature import GridSpec
from umbilic.surfaces import preset

G128 = GridSpec(128, 128, 6)
G256 = GridSpec(256, 256, 6)

CLOSED = [
    ("sphere", {"r": 1.0}),
    ("ellipsoid_rev", {"a": 1.0, "b": 2.0}),
    ("ellipsoid_tri", {"a": 1.0, "b": 1.3, "c3": 1.7}),
    ("torus", {"R": 2.0, "r": 1.0}),
    ("centered_sphere_spaceform", {"rho": 0.5, "c": 1.0}),
    ("centered_sphere_spaceform", {"rho": 0.5, "c": -1.0}),
]


# -- input validation ---------------------------------------------------------


def test_ladder_validation():
    sph = preset("sphere")
    with pytest.raises(VerifierInputError):
        V.verify_prel(sph, [], G128)
    with pytest.raises(VerifierInputError):
        V.verify_prel(sph, [1.5], G128)  # constant invalid above 1
    with pytest.raises(VerifierInputError):
        V.verify_prel(sph, [0.1, 0.5], G128)
    with pytest.raises(VerifierInputError):
        V.verify_prel(sph, [0.5, 0.5], G128)
    with pytest.raises(VerifierInputError):
        V.verify_prel(sph, [0.5, -0.1], G128)


def test_open_chart_rejected():
    with pytest.raises(VerifierInputError):
        V.verify_prel(preset("graph_bump"), [0.5], G128)


def test_eps0_validation():
    with pytest.raises(VerifierInputError):
        V.corollary_check(preset("sphere"), 0.0, G128)
    with pytest.raises(VerifierInputError):
        V.corollary_check(preset("sphere"), 1.2, G128)


def test_sharpness_guards():
    with pytest.raises(VerifierInputError):
        V.sharpness_gap(preset("ellipsoid_rev", {"a": 1.0, "b": 1.0001}), [0.4], G128)
    with pytest.raises(VerifierInputError):
        V.sharpness_gap(preset("torus"), [0.4], G128)  # no (a, b) semi-axes


# -- inequality anchors --------------------------------------------------------


def test_sphere_report_values():
    # [DERIVED] totally umbilic: both hring-weighted terms vanish,
    # lhs = 3 * 4 pi, rhs = 8 pi, margin = 4 pi
    rep = V.verify_prel(preset("sphere"), [0.5, 0.1], G256)
    assert rep.verdict == "PASS"
    assert rep.chi_rounded == 2
    assert rep.H_sup == pytest.approx(2.0, abs=1e-9)
    assert rep.C_const == pytest.approx(3.0, abs=1e-9)
    for r in rep.rows:
        assert abs(r.term1) < 1e-12
        assert abs(r.term2) < 1e-12
        assert r.lhs == pytest.approx(12 * math.pi, rel=1e-4)
        assert r.rhs == pytest.approx(8 * math.pi, rel=1e-12)
        assert r.margin == pytest.approx(4 * math.pi, rel=0.01)
        assert r.passed
        assert r.c_min_empirical == pytest.approx(2.0, rel=1e-3)


def test_sphere_radius_changes_constant_not_verdict():
    # [DERIVED] sphere(r): H_sup = 2/r, lhs = (2/r^2 + 1) 4 pi r^2, rhs = 8 pi
    rep = V.verify_prel(preset("sphere", {"r": 2.0}), [0.5], G128)
    assert rep.H_sup == pytest.approx(1.0, abs=1e-9)
    assert rep.C_const == pytest.approx(1.5, abs=1e-9)
    assert rep.rows[0].margin == pytest.approx(1.5 * 16 * math.pi - 8 * math.pi, rel=0.01)
    assert rep.verdict == "PASS"


def test_torus_small_eps_exact_equality():
    # [DERIVED] empty sublevel region and chi = 0: every row field is zero
    rep = V.verify_prel(preset("torus"), [0.05], G128)
    r = rep.rows[0]
    assert rep.verdict == "PASS"
    assert rep.chi_rounded == 0
    for value in (r.vol_omega_c, r.term1, r.term2, r.lhs, r.rhs, r.margin,
                  r.cond3_value, r.sharp_gap, r.tol_margin):
        assert abs(value) <= 1e-12
    assert r.c_min_empirical is None


@pytest.mark.parametrize("name,params", CLOSED)
def test_all_closed_presets_pass(name, params):
    # the inequality is a theorem: margins clear -tol on every surface
    rep = V.verify_prel(preset(name, params), [0.5, 0.25, 0.1, 0.05], G128)
    assert rep.verdict == "PASS"
    for r in rep.rows:
        assert r.margin >= -r.tol_margin


def test_ellipsoid_report_shape():
    rep = V.verify_prel(preset("ellipsoid_rev"), [0.5, 0.25, 0.1, 0.05], G256)
    assert rep.verdict == "PASS"
    assert rep.chi_rounded == 2
    # [DERIVED] sup |H| = 4 at the poles, approached from grid nodes
    assert 3.95 < rep.H_sup <= 4.0
    assert rep.C_const == pytest.approx(0.5 * rep.H_sup**2 + 1.0, rel=1e-12)
    vols = [r.vol_omega_c for r in rep.rows]
    assert all(b < a for a, b in zip(vols, vols[1:]))
    # gap column shrinks in magnitude along the ladder
    gaps = [abs(r.sharp_gap) for r in rep.rows]
    assert gaps[-1] < gaps[0]
    # rhs/lhs bookkeeping is internally consistent
    for r in rep.rows:
        assert r.rhs == pytest.approx(r.term1 - r.term2 + 8 * math.pi, rel=1e-12)
        assert r.margin == pytest.approx(r.lhs - r.rhs, abs=1e-12)
        assert r.sharp_gap == pytest.approx(r.term2 - r.term1 - 8 * math.pi, rel=1e-12)


def test_h_sup_override_and_fixed_tol():
    rep = V.verify_prel(
        preset("sphere"), [0.5], G128, h_sup_override=5.0, tol_margin=1e-6
    )
    assert rep.H_sup == 5.0
    assert rep.h_sup_measured == pytest.approx(2.0, abs=1e-9)
    assert rep.C_const == pytest.approx(13.5)
    assert rep.rows[0].tol_margin == 1e-6
    assert any("override" in w for w in rep.warnings)


def test_coarse_grid_flags_unstable_h_sup():
    # pole curvature is still moving between 64^2 and 128^2 nodes
    rep = V.verify_prel(preset("ellipsoid_rev"), [0.5], G128)
    assert any("sup|H|" in w for w in rep.warnings)
    assert rep.verdict == "PASS"


def test_report_determinism():
    a = V.verify_prel(preset("ellipsoid_rev"), [0.5, 0.1], G128)
    b = V.verify_prel(preset("ellipsoid_rev"), [0.5, 0.1], G128)
    assert a == b


def test_spaceform_margin_includes_ambient_term():
    # c enters through 4|c| in the constant; both signs pass
    for c in (1.0, -1.0):
        rep = V.verify_prel(
            preset("centered_sphere_spaceform", {"rho": 0.5, "c": c}), [0.5], G128
        )
        assert rep.verdict == "PASS"
        h = rep.H_sup
        assert rep.C_const == pytest.approx(0.5 * h * h + 4.0 + 1.0, rel=1e-12)
        r = rep.rows[0]
        assert r.vol_omega_c == pytest.approx(rep.rows[0].lhs / rep.C_const, rel=1e-12)
        assert abs(r.term1) < 1e-12 and abs(r.term2) < 1e-12


# -- corollary ------------------------------------------------------------------


def test_corollary_sphere_all_conditions_hold():
    rec = V.corollary_check(preset("sphere"), 0.5, G128)
    assert rec.chi_rounded == 2
    assert rec.cond1_holds and rec.cond1_max_gradH2 < 1e-10
    assert rec.cond2_holds
    assert rec.cond3_supported and rec.cond3_trend == "plateau"
    assert rec.verdict == "implies Vol(Omega_c_0) > 0"


def test_corollary_ellipsoid_cond3_fails():
    # [DERIVED] measure-zero umbilic set: the 1/eps^2 integral must exceed
    # 8 pi in the limit; the ladder rises well past it
    rec = V.corollary_check(preset("ellipsoid_rev"), 0.4, G256)
    assert not rec.cond1_holds
    assert not rec.cond2_holds
    assert not rec.cond3_supported
    assert rec.cond3_trend == "increasing"
    values = [v for _, v in rec.cond3_rows]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert values[-1] > 8 * math.pi * 0.9
    assert rec.cond3_rows[-1][0] == pytest.approx(0.05)
    assert rec.verdict == "no condition verified"


def test_corollary_refuses_wrong_topology():
    with pytest.raises(VerifierInputError, match="not 2"):
        V.corollary_check(preset("torus"), 0.5, G128)


def test_corollary_open_chart_reports_values_only():
    rec = V.corollary_check(preset("graph_bump", {"A": 0.3, "s": 1.0}), 0.5, G128)
    assert rec.chi_rounded is None
    assert any("not closed" in n for n in rec.notes)
    assert len(rec.cond3_rows) == 4


def test_corollary_vacuous_on_empty_region():
    open_torus = replace(preset("torus"), is_closed=False)
    rec = V.corollary_check(open_torus, 0.05, G128)
    assert rec.cond1_max_gradH2 is None
    assert rec.cond1_holds and rec.cond2_holds
    assert any("vacuously" in n for n in rec.notes)


# -- sharpness -------------------------------------------------------------------


def test_sharpness_ladder_shrinks():
    # [DERIVED] the equality case: normalized gap decreases along the ladder
    rows = V.sharpness_gap(preset("ellipsoid_rev"), [0.4, 0.2, 0.1, 0.05], G256)
    ngs = [abs(r.normalized_gap) for r in rows]
    assert all(b < a for a, b in zip(ngs, ngs[1:]))
    assert ngs[-1] < ngs[0] / 2
    for r in rows:
        assert abs(r.normalized_gap) < 1.0


def test_sharpness_matches_report_rows():
    ladder = [0.4, 0.1]
    rep = V.verify_prel(preset("ellipsoid_rev"), ladder, G128)
    rows = V.sharpness_gap(preset("ellipsoid_rev"), ladder, G128)
    for rr, sr in zip(rep.rows, rows):
        assert sr.sharp_gap == pytest.approx(rr.sharp_gap, rel=1e-12)


# -- trend classifier --------------------------------------------------------------


def test_classify_trend():
    assert V.classify_trend([10.0, 5.0, 2.0]) == "decreasing"
    assert V.classify_trend([2.0, 5.0, 10.0]) == "increasing"
    assert V.classify_trend([5.0, 5.01, 4.99]) == "plateau"
    assert V.classify_trend([0.0, 0.0, 0.0]) == "plateau"
    assert V.classify_trend([1.0]) == "plateau"
    assert V.classify_trend([0.0, 1.0]) == "increasing"
