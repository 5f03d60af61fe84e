"""Sublevel-volume inequality checks and their sharpness diagnostics.

Builds per-threshold report rows combining the region integrals with the
explicit constant C = H_sup^2/2 + 4|c| + 1 (valid for thresholds <= 1) and
the exact topological term 4 pi chi. Limit-type quantities are reported as
ladders with a trend classification; a finite sample cannot certify a
limit, so no row ever claims one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from . import quadrature as quad
from .errors import VerifierInputError
from .quadrature import CHUNK, GridSpec
from .surfaces import ImmersionSpec, interior_axes

FOUR_PI = 4.0 * math.pi
EIGHT_PI = 8.0 * math.pi

__all__ = [
    "CorollaryRecord",
    "EpsRow",
    "SharpnessRow",
    "TheoremReport",
    "classify_trend",
    "corollary_check",
    "sharpness_gap",
    "verify_prel",
]


@dataclass(frozen=True)
class EpsRow:
    """One threshold row of the volume inequality.

    lhs = C * vol_omega_c, rhs = term1 - term2 + 4 pi chi_rounded,
    margin = lhs - rhs (the inequality asserts margin >= 0 exactly).
    c_min_empirical = rhs / vol_omega_c, the smallest constant that would
    make this row hold; informational, None when the region is empty.
    """

    eps: float
    vol_omega_c: float
    term1: float
    term2: float
    lhs: float
    rhs: float
    margin: float
    cond3_value: float
    sharp_gap: float
    tol_margin: float
    passed: bool
    c_min_empirical: float | None


@dataclass(frozen=True)
class TheoremReport:
    surface: str
    params: tuple
    ambient_c: float
    grid: GridSpec
    chi_estimate: float
    chi_rounded: int
    H_sup: float
    h_sup_measured: float
    C_const: float
    rows: tuple
    verdict: str
    warnings: tuple


@dataclass(frozen=True)
class CorollaryRecord:
    surface: str
    params: tuple
    eps0: float
    grid: GridSpec
    chi_estimate: float | None
    chi_rounded: int | None
    cond1_max_gradH2: float | None
    cond1_holds: bool
    cond2_max_excess: float | None
    cond2_holds: bool
    cond3_rows: tuple
    cond3_trend: str
    cond3_supported: bool
    verdict: str
    notes: tuple


@dataclass(frozen=True)
class SharpnessRow:
    eps: float
    sharp_gap: float
    normalized_gap: float


def _params_of(spec):
    return tuple(sorted((k, float(v)) for k, v in spec.params.items()))


def _check_ladder(values):
    vals = [float(e) for e in values]
    if not vals:
        raise VerifierInputError("threshold ladder must not be empty")
    for e in vals:
        if not 0.0 < e <= 1.0:
            raise VerifierInputError(
                f"threshold {e} rejected: the explicit constant is valid only for"
                " thresholds in (0, 1]"
            )
    if any(b >= a for a, b in zip(vals, vals[1:])):
        raise VerifierInputError("threshold ladder must be strictly decreasing")
    return vals


def _require_closed(spec):
    if not spec.is_closed:
        raise VerifierInputError(
            f"'{spec.name}' is not closed; the inequality's topological term"
            " needs a closed surface"
        )


def classify_trend(values, rel_tol=0.05) -> str:
    """Coarse trend of a ladder: decreasing, increasing, or plateau.

    Compares first and last against the larger magnitude; changes within
    rel_tol count as plateau.
    """
    vals = [float(v) for v in values]
    if len(vals) < 2:
        return "plateau"
    scale = max(abs(vals[0]), abs(vals[-1]))
    if scale < 1e-14:
        return "plateau"
    change = (vals[-1] - vals[0]) / scale
    if change < -rel_tol:
        return "decreasing"
    if change > rel_tol:
        return "increasing"
    return "plateau"


def _study_grids(grid: GridSpec):
    n0u = max(16, grid.nu // 4)
    n0v = max(16, grid.nv // 4)
    return (
        GridSpec(n0u, n0v, grid.adaptive_depth),
        GridSpec(2 * n0u, 2 * n0v, grid.adaptive_depth),
        GridSpec(4 * n0u, 4 * n0v, grid.adaptive_depth),
    )


def _chi(total_R):
    est = total_R / FOUR_PI
    return est, int(round(est))


def verify_prel(
    spec: ImmersionSpec,
    eps_ladder,
    grid: GridSpec,
    *,
    h_sup_override: float | None = None,
    tol_margin: float | None = None,
) -> TheoremReport:
    """Check C * vol_omega_c >= term1 - term2 + 4 pi chi on a threshold ladder.

    tol_margin, when not given, is set per row to 3x the Richardson error
    estimate of the row's dominant term (grids at 1/4, 1/2, and full
    resolution). h_sup_override replaces the measured node max in C.
    """
    _require_closed(spec)
    ladder = _check_ladder(eps_ladder)

    integrals = quad.region_integrals(spec, ladder, grid)
    chi_est, chi_round = _chi(integrals[0].total_R)
    warnings = []
    if abs(chi_est - chi_round) > 0.05:
        warnings.append(
            f"Euler characteristic estimate {chi_est:.4f} is far from an integer;"
            " refine the grid"
        )

    h_measured = integrals[0].H_sup
    coarse = GridSpec(max(16, grid.nu // 2), max(16, grid.nv // 2), grid.adaptive_depth)
    h_coarse = quad.h_sup_estimate(spec, coarse)
    if abs(h_measured - h_coarse) > 1e-3 * max(h_measured, h_coarse, 1e-300):
        warnings.append(
            f"sup|H| estimate moved {h_coarse:.6g} -> {h_measured:.6g} between grid"
            " levels; treat C as unreliable or pass an override"
        )
    h_eff = float(h_sup_override) if h_sup_override is not None else h_measured
    if h_sup_override is not None:
        warnings.append(
            f"using sup|H| override {h_eff:.6g} (measured {h_measured:.6g})"
        )
    c_const = 0.5 * h_eff * h_eff + 4.0 * abs(spec.ambient_c) + 1.0

    rows = []
    for ri in integrals:
        eps = ri.eps
        term1 = (2.0 / eps**4) * ri.I_grad_hring
        term2 = (1.0 / eps**4) * ri.I_grad_H
        lhs = c_const * ri.vol_omega_c
        rhs = term1 - term2 + FOUR_PI * chi_round
        margin = lhs - rhs
        if tol_margin is not None:
            tol = float(tol_margin)
        else:
            s1, s2 = 2.0 / eps**4, 1.0 / eps**4
            candidates = (
                (abs(lhs), lambda pg: c_const),
                (abs(term1), lambda pg: s1 * pg.nabla_hring_norm2 * pg.hring_norm2),
                (abs(term2), lambda pg: s2 * pg.gradH_norm2 * pg.hring_norm2),
            )
            _, field = max(candidates, key=lambda t: t[0])
            study = quad.convergence_study(spec, field, quad.sublevel(eps), _study_grids(grid))
            tol = 3.0 * study.error_estimate
        rows.append(
            EpsRow(
                eps=eps,
                vol_omega_c=ri.vol_omega_c,
                term1=term1,
                term2=term2,
                lhs=lhs,
                rhs=rhs,
                margin=margin,
                cond3_value=(1.0 / eps**2) * ri.I_grad_H_plain,
                sharp_gap=term2 - term1 - FOUR_PI * chi_round,
                tol_margin=tol,
                passed=margin >= -tol,
                c_min_empirical=(rhs / ri.vol_omega_c) if ri.vol_omega_c > 0 else None,
            )
        )

    return TheoremReport(
        surface=spec.name,
        params=_params_of(spec),
        ambient_c=spec.ambient_c,
        grid=grid,
        chi_estimate=chi_est,
        chi_rounded=chi_round,
        H_sup=h_eff,
        h_sup_measured=h_measured,
        C_const=c_const,
        rows=tuple(rows),
        verdict="PASS" if all(r.passed for r in rows) else "FAIL",
        warnings=tuple(warnings),
    )


def _node_values(spec, grid):
    """(|hring|^2, |grad H|^2, |grad hring|^2) at the base midpoint nodes."""
    us, vs = interior_axes(spec, grid.nu, grid.nv)
    U, V = np.meshgrid(us, vs, indexing="ij")
    uu, vv = U.ravel(), V.ravel()
    n2s, gh2s, gu2s = [], [], []
    for i in range(0, uu.size, CHUNK):
        pg = geometry.point_geometry(spec, uu[i : i + CHUNK], vv[i : i + CHUNK])
        n2s.append(pg.hring_norm2)
        gh2s.append(pg.gradH_norm2)
        gu2s.append(pg.nabla_hring_norm2)
    return (np.concatenate(n2s), np.concatenate(gh2s), np.concatenate(gu2s))


def corollary_check(
    spec: ImmersionSpec, eps0: float, grid: GridSpec, *, cond_tol: float = 1e-10
) -> CorollaryRecord:
    """Evaluate the three sufficient conditions at threshold eps0.

    1. H constant on the sublevel region: max |grad H|^2 < cond_tol there.
    2. |grad H|^2 <= 2 |grad hring|^2 on the region (within cond_tol).
    3. (1/eps^2) integral of |grad H|^2 over the region stays below 8 pi
       along the ladder eps0 / 2^k, k = 0..3, reported with its trend.

    Closed surfaces must have chi = 2; open charts are evaluated for their
    measured values only, with a note that the topological gate was skipped.
    """
    eps0 = float(eps0)
    if not 0.0 < eps0 <= 1.0:
        raise VerifierInputError(f"eps0 must lie in (0, 1], got {eps0}")

    ladder = [eps0 / 2.0**k for k in range(4)]
    integrals = quad.region_integrals(spec, ladder, grid)
    notes = []
    if spec.is_closed:
        chi_est, chi_round = _chi(integrals[0].total_R)
        if chi_round != 2:
            raise VerifierInputError(
                f"Euler characteristic is {chi_round}, not 2: the sufficient"
                " conditions apply to immersed spheres only"
            )
    else:
        chi_est = chi_round = None
        notes.append("chart is not closed; topological gate skipped, values informational")

    n2, grad_h2, grad_u2 = _node_values(spec, grid)
    mask = n2 < eps0 * eps0
    if mask.any():
        cond1_max = float(np.max(grad_h2[mask]))
        cond2_max = float(np.max(grad_h2[mask] - 2.0 * grad_u2[mask]))
        cond1 = cond1_max < cond_tol
        cond2 = cond2_max <= cond_tol
    else:
        cond1_max = cond2_max = None
        cond1 = cond2 = True
        notes.append(f"sublevel region empty at eps0={eps0}: conditions 1-2 hold vacuously")

    cond3_rows = tuple(
        (ri.eps, (1.0 / ri.eps**2) * ri.I_grad_H_plain) for ri in integrals
    )
    trend = classify_trend([v for _, v in cond3_rows])
    cond3 = cond3_rows[-1][1] < EIGHT_PI and trend != "increasing"
    notes.append(
        "condition 3 is a limit statement; the ladder trend is evidence, not a certificate"
    )

    holds = cond1 or cond2 or cond3
    return CorollaryRecord(
        surface=spec.name,
        params=_params_of(spec),
        eps0=eps0,
        grid=grid,
        chi_estimate=chi_est,
        chi_rounded=chi_round,
        cond1_max_gradH2=cond1_max,
        cond1_holds=cond1,
        cond2_max_excess=cond2_max,
        cond2_holds=cond2,
        cond3_rows=cond3_rows,
        cond3_trend=trend,
        cond3_supported=cond3,
        verdict="implies Vol(Omega_c_0) > 0" if holds else "no condition verified",
        notes=tuple(notes),
    )


def sharpness_gap(spec: ImmersionSpec, eps_ladder, grid: GridSpec):
    """Gap between term2 - term1 and 8 pi on a non-spherical revolution ellipsoid.

    Returns one SharpnessRow per threshold; the claimed limit equality
    shows up as normalized_gap -> 0 along the ladder.
    """
    _require_closed(spec)
    a = spec.params.get("a")
    b = spec.params.get("b")
    if a is None or b is None:
        raise VerifierInputError(
            f"'{spec.name}' has no (a, b) semi-axes; the sharpness check targets"
            " ellipsoids of revolution"
        )
    if abs(float(a) - float(b)) < 1e-3:
        raise VerifierInputError(
            f"semi-axes a={a}, b={b} are degenerate (near-spherical): every gap"
            " term vanishes and the normalized gap is 0/0"
        )
    ladder = _check_ladder(eps_ladder)
    rows = []
    for ri in quad.region_integrals(spec, ladder, grid):
        term1 = (2.0 / ri.eps**4) * ri.I_grad_hring
        term2 = (1.0 / ri.eps**4) * ri.I_grad_H
        gap = term2 - term1 - EIGHT_PI
        if term2 == 0.0:
            raise VerifierInputError(
                f"no nodes fall in the sublevel region at eps={ri.eps}; the grid"
                " cannot resolve the umbilic neighborhood"
            )
        rows.append(SharpnessRow(eps=ri.eps, sharp_gap=gap, normalized_gap=gap / term2))
    return tuple(rows)
