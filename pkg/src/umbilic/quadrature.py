"""Midpoint quadrature on immersed surfaces, with sublevel-set adaptivity.

All integrals are taken against the induced area element dA = sqrt(det g)
du dv on the chart rectangle (singular margins shaved off non-periodic
axes). The sublevel region at a threshold eps collects the points with
|hring| < eps, strictly; boundary ties count as outside. Cells crossed by
the |hring| = eps interface are subdivided recursively and leaf cells are
classified by their center value.

Summation uses a fixed traversal order (base cells row-major, then refined
children level by level) with numpy's pairwise reduction, so identical
inputs give bit-identical results.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import geometry
from .surfaces import ImmersionSpec

# nodes per evaluation batch; bounds peak memory of the jet pipeline
CHUNK = 32768

__all__ = [
    "ALL",
    "CHUNK",
    "ConvergenceRow",
    "ConvergenceStudy",
    "GridSpec",
    "Region",
    "RegionIntegrals",
    "convergence_study",
    "euler_characteristic",
    "h_sup_estimate",
    "integrate",
    "region_integrals",
    "sublevel",
    "superlevel",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform base grid: nu x nv cells, one midpoint node per cell.

    adaptive_depth bounds the recursive subdivision of cells straddling
    the region interface; 0 disables refinement (straddling cells are then
    classified by their center like any other leaf).
    """

    nu: int = 256
    nv: int = 256
    adaptive_depth: int = 6

    def __post_init__(self):
        if self.nu < 16 or self.nv < 16:
            raise ValueError(f"grid must be at least 16x16 cells, got {self.nu}x{self.nv}")
        if not 0 <= self.adaptive_depth <= 12:
            raise ValueError(f"adaptive_depth must lie in [0, 12], got {self.adaptive_depth}")

    def doubled(self) -> "GridSpec":
        return GridSpec(2 * self.nu, 2 * self.nv, self.adaptive_depth)


@dataclass(frozen=True)
class Region:
    kind: str
    eps: float | None = None

    def __post_init__(self):
        if self.kind not in ("all", "sublevel", "superlevel"):
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.kind == "all":
            if self.eps is not None:
                raise ValueError("region 'all' takes no threshold")
        elif self.eps is None or not self.eps > 0:
            raise ValueError(f"region {self.kind!r} needs a positive threshold")


ALL = Region("all")


def sublevel(eps: float) -> Region:
    """Points with |hring| strictly below eps."""
    return Region("sublevel", float(eps))


def superlevel(eps: float) -> Region:
    """Points with |hring| >= eps (the complement; ties land here)."""
    return Region("superlevel", float(eps))


@dataclass(frozen=True)
class RegionIntegrals:
    """Sublevel-region integrals at one threshold, plus surface globals.

    vol_omega_c     area of the region {|hring| < eps}
    I_grad_hring    integral of |nabla hring|^2 |hring|^2 over the region
    I_grad_H        integral of |nabla H|^2 |hring|^2 over the region
    I_grad_H_plain  integral of |nabla H|^2 over the region
    area, total_R   whole-surface area and integral of R
    H_sup           max |H| over every midpoint node the traversal touched
    """

    eps: float
    vol_omega_c: float
    I_grad_hring: float
    I_grad_H: float
    I_grad_H_plain: float
    area: float
    total_R: float
    H_sup: float


@dataclass(frozen=True)
class ConvergenceRow:
    grid: GridSpec
    value: float
    estimated_order: object  # None (first two levels), float, or "unstable"


@dataclass(frozen=True)
class ConvergenceStudy:
    rows: tuple
    value: float
    error_estimate: float
    order: object


# -- node evaluation ------------------------------------------------------------


def _axes(spec: ImmersionSpec, grid: GridSpec):
    # same shaving convention as surfaces.interior_axes
    u0, u1 = spec.u_range
    v0, v1 = spec.v_range
    m = spec.singular_margin
    if not spec.periodic_u:
        u0, u1 = u0 + m, u1 - m
    if not spec.periodic_v:
        v0, v1 = v0 + m, v1 - m
    return u0, v0, (u1 - u0) / grid.nu, (v1 - v0) / grid.nv


def _lattice(u0, v0, du, dv, nu, nv, *, centers):
    off = 0.5 if centers else 0.0
    n_u, n_v = (nu, nv) if centers else (nu + 1, nv + 1)
    us = u0 + (np.arange(n_u) + off) * du
    vs = v0 + (np.arange(n_v) + off) * dv
    U, V = np.meshgrid(us, vs, indexing="ij")
    return U.ravel(), V.ravel()


def _eval_class(spec, us, vs):
    """Chunked (|hring|^2, |H|) at arbitrary nodes."""
    if us.size == 0:
        return np.zeros(0), np.zeros(0)
    n2s, ahs = [], []
    for i in range(0, us.size, CHUNK):
        n2, ah = geometry.classification_values(spec, us[i : i + CHUNK], vs[i : i + CHUNK])
        n2s.append(n2)
        ahs.append(ah)
    if len(n2s) == 1:
        return n2s[0], ahs[0]
    return np.concatenate(n2s), np.concatenate(ahs)


_FIELD_KEYS = ("w", "n2", "gh", "gH", "gHp", "R", "absH")


def _node_fields(spec, us, vs):
    """Chunked full-geometry integrand bundle at arbitrary nodes."""
    parts = {k: [] for k in _FIELD_KEYS}
    for i in range(0, us.size, CHUNK):
        pg = geometry.point_geometry(spec, us[i : i + CHUNK], vs[i : i + CHUNK])
        parts["w"].append(pg.sqrt_detg)
        parts["n2"].append(pg.hring_norm2)
        parts["gh"].append(pg.nabla_hring_norm2 * pg.hring_norm2)
        parts["gH"].append(pg.gradH_norm2 * pg.hring_norm2)
        parts["gHp"].append(pg.gradH_norm2)
        parts["R"].append(pg.R)
        parts["absH"].append(np.abs(pg.H))
    if not parts["w"]:
        return {k: np.zeros(0) for k in _FIELD_KEYS}
    return {k: (v[0] if len(v) == 1 else np.concatenate(v)) for k, v in parts.items()}


def _weighted_field(spec, field, us, vs):
    """field(pg) * sqrt(det g) at each node, chunked."""
    if us.size == 0:
        return np.zeros(0)
    outs = []
    for i in range(0, us.size, CHUNK):
        pg = geometry.point_geometry(spec, us[i : i + CHUNK], vs[i : i + CHUNK])
        outs.append(np.asarray(field(pg), dtype=float) * pg.sqrt_detg)
    return outs[0] if len(outs) == 1 else np.concatenate(outs)


# -- sublevel-set cell classification --------------------------------------------


def _base_split(inside_corner, inside_center):
    """Uniform-in / uniform-out / straddling masks over base cells."""
    c00 = inside_corner[:-1, :-1]
    c10 = inside_corner[1:, :-1]
    c01 = inside_corner[:-1, 1:]
    c11 = inside_corner[1:, 1:]
    all_in = c00 & c10 & c01 & c11 & inside_center
    all_out = ~(c00 | c10 | c01 | c11 | inside_center)
    straddle = ~(all_in | all_out)
    corners = tuple(a.ravel() for a in (c00, c10, c01, c11))
    return all_in.ravel(), all_out.ravel(), straddle.ravel(), corners


def _refined_leaves(spec, eps, state, du, dv, depth):
    """Subdivide straddling cells; yield (us, vs, cell_area, inside) leaves.

    state holds the straddling base cells: lower corners (u0s, v0s) plus the
    inside-booleans of their four corners and center. Each level evaluates
    only the 8 new probe points per cell (edge midpoints, child centers);
    cells whose five probes agree become leaves immediately, the rest
    recurse. Cells still straddling at max depth are classified by center.
    Traversal order is fixed, so the caller's accumulation is deterministic.
    """
    u0s, v0s, c00, c10, c01, c11, cc = state
    eps2 = eps * eps
    DU, DV = du, dv
    for _ in range(depth):
        if u0s.size == 0:
            return
        hu, hv = DU / 2.0, DV / 2.0
        qu, qv = DU / 4.0, DV / 4.0
        # probe order: edge midpoints L10 L01 L21 L12, child centers M00 M10 M01 M11
        pu = np.concatenate(
            [u0s + hu, u0s, u0s + DU, u0s + hu, u0s + qu, u0s + 3 * qu, u0s + qu, u0s + 3 * qu]
        )
        pv = np.concatenate(
            [v0s, v0s + hv, v0s + hv, v0s + DV, v0s + qv, v0s + qv, v0s + 3 * qv, v0s + 3 * qv]
        )
        n2, _ = _eval_class(spec, pu, pv)
        ins = n2 < eps2
        L10, L01, L21, L12, M00, M10, M01, M11 = np.split(ins, 8)
        lattice = {
            (0, 0): c00, (1, 0): L10, (2, 0): c10,
            (0, 1): L01, (1, 1): cc, (2, 1): L21,
            (0, 2): c01, (1, 2): L12, (2, 2): c11,
        }
        centers = {(0, 0): M00, (1, 0): M10, (0, 1): M01, (1, 1): M11}
        next_parts = []
        for a, b in ((0, 0), (0, 1), (1, 0), (1, 1)):
            k00 = lattice[(a, b)]
            k10 = lattice[(a + 1, b)]
            k01 = lattice[(a, b + 1)]
            k11 = lattice[(a + 1, b + 1)]
            kc = centers[(a, b)]
            all_in = k00 & k10 & k01 & k11 & kc
            uniform = all_in | ~(k00 | k10 | k01 | k11 | kc)
            cu0 = u0s + a * hu
            cv0 = v0s + b * hv
            if uniform.any():
                yield cu0[uniform] + qu, cv0[uniform] + qv, hu * hv, all_in[uniform]
            st = ~uniform
            next_parts.append(
                (cu0[st], cv0[st], k00[st], k10[st], k01[st], k11[st], kc[st])
            )
        u0s, v0s, c00, c10, c01, c11, cc = (
            np.concatenate([p[k] for p in next_parts]) for k in range(7)
        )
        DU, DV = hu, hv
    # max-depth leaves: classified by their center value
    if u0s.size:
        yield u0s + DU / 2.0, v0s + DV / 2.0, DU * DV, cc


# -- public operations -----------------------------------------------------------


def integrate(spec: ImmersionSpec, field, grid: GridSpec, region: Region = ALL) -> float:
    """Midpoint-rule integral of field(pg) dA over the chosen region.

    field maps a PointGeometry batch to a scalar array (or a constant).
    """
    u0, v0, du, dv = _axes(spec, grid)
    base_area = du * dv
    uc, vc = _lattice(u0, v0, du, dv, grid.nu, grid.nv, centers=True)
    if region.kind == "all":
        return float(np.sum(_weighted_field(spec, field, uc, vc))) * base_area

    want_inside = region.kind == "sublevel"
    eps = float(region.eps)
    n2_center, _ = _eval_class(spec, uc, vc)
    ug, vg = _lattice(u0, v0, du, dv, grid.nu, grid.nv, centers=False)
    n2_corner, _ = _eval_class(spec, ug, vg)
    inside_corner = (n2_corner < eps * eps).reshape(grid.nu + 1, grid.nv + 1)
    inside_center = (n2_center < eps * eps).reshape(grid.nu, grid.nv)
    all_in, all_out, straddle, corners = _base_split(inside_corner, inside_center)

    total = 0.0
    sel = all_in if want_inside else all_out
    if sel.any():
        total += float(np.sum(_weighted_field(spec, field, uc[sel], vc[sel]))) * base_area

    cu0 = ug.reshape(grid.nu + 1, grid.nv + 1)[:-1, :-1].ravel()
    cv0 = vg.reshape(grid.nu + 1, grid.nv + 1)[:-1, :-1].ravel()
    state = (
        cu0[straddle],
        cv0[straddle],
        corners[0][straddle],
        corners[1][straddle],
        corners[2][straddle],
        corners[3][straddle],
        inside_center.ravel()[straddle],
    )
    for lus, lvs, cell_area, inside in _refined_leaves(
        spec, eps, state, du, dv, grid.adaptive_depth
    ):
        pick = inside if want_inside else ~inside
        if pick.any():
            total += float(np.sum(_weighted_field(spec, field, lus[pick], lvs[pick]))) * cell_area
    return total


def region_integrals(spec: ImmersionSpec, eps_list, grid: GridSpec):
    """One RegionIntegrals per threshold, sharing a single base-grid pass.

    eps_list must be strictly decreasing within (0, 1]. Full geometry is
    evaluated once at every base midpoint; per-threshold classification
    reuses the cached |hring|^2 values, and only refinement probes near
    each interface cost extra evaluations.
    """
    eps_values = [float(e) for e in eps_list]
    if not eps_values:
        raise ValueError("eps_list must not be empty")
    for e in eps_values:
        if not 0.0 < e <= 1.0:
            raise ValueError(f"thresholds must lie in (0, 1], got {e}")
    if any(b >= a for a, b in zip(eps_values, eps_values[1:])):
        raise ValueError("thresholds must be strictly decreasing")

    u0, v0, du, dv = _axes(spec, grid)
    base_area = du * dv
    uc, vc = _lattice(u0, v0, du, dv, grid.nu, grid.nv, centers=True)
    base = _node_fields(spec, uc, vc)
    area = float(np.sum(base["w"])) * base_area
    total_R = float(np.sum(base["R"] * base["w"])) * base_area
    h_sup = float(np.max(base["absH"]))

    ug, vg = _lattice(u0, v0, du, dv, grid.nu, grid.nv, centers=False)
    n2_corner, _ = _eval_class(spec, ug, vg)
    cu0 = ug.reshape(grid.nu + 1, grid.nv + 1)[:-1, :-1].ravel()
    cv0 = vg.reshape(grid.nu + 1, grid.nv + 1)[:-1, :-1].ravel()

    pending = []
    for eps in eps_values:
        inside_corner = (n2_corner < eps * eps).reshape(grid.nu + 1, grid.nv + 1)
        inside_center = (base["n2"] < eps * eps).reshape(grid.nu, grid.nv)
        all_in, _, straddle, corners = _base_split(inside_corner, inside_center)

        sums = dict.fromkeys(("vol", "gh", "gH", "gHp"), 0.0)
        if all_in.any():
            w = base["w"][all_in]
            sums["vol"] += float(np.sum(w)) * base_area
            sums["gh"] += float(np.sum(base["gh"][all_in] * w)) * base_area
            sums["gH"] += float(np.sum(base["gH"][all_in] * w)) * base_area
            sums["gHp"] += float(np.sum(base["gHp"][all_in] * w)) * base_area

        state = (
            cu0[straddle],
            cv0[straddle],
            corners[0][straddle],
            corners[1][straddle],
            corners[2][straddle],
            corners[3][straddle],
            inside_center.ravel()[straddle],
        )
        for lus, lvs, cell_area, inside in _refined_leaves(
            spec, eps, state, du, dv, grid.adaptive_depth
        ):
            if not inside.any():
                continue
            sub = _node_fields(spec, lus[inside], lvs[inside])
            h_sup = max(h_sup, float(np.max(sub["absH"])))
            sums["vol"] += float(np.sum(sub["w"])) * cell_area
            sums["gh"] += float(np.sum(sub["gh"] * sub["w"])) * cell_area
            sums["gH"] += float(np.sum(sub["gH"] * sub["w"])) * cell_area
            sums["gHp"] += float(np.sum(sub["gHp"] * sub["w"])) * cell_area
        pending.append((eps, sums))

    return tuple(
        RegionIntegrals(
            eps=eps,
            vol_omega_c=s["vol"],
            I_grad_hring=s["gh"],
            I_grad_H=s["gH"],
            I_grad_H_plain=s["gHp"],
            area=area,
            total_R=total_R,
            H_sup=h_sup,
        )
        for eps, s in pending
    )


def euler_characteristic(spec: ImmersionSpec, grid: GridSpec):
    """(chi_estimate, chi_rounded) from the total curvature integral.

    chi_estimate = (integral of R dA) / 4 pi. Warns when the estimate is
    not within 0.05 of an integer, which signals an under-resolved grid
    (topology makes the exact value an integer).
    """
    if not spec.is_closed:
        raise ValueError(
            f"'{spec.name}' is not closed; the Euler characteristic needs a closed surface"
        )
    chi = integrate(spec, lambda pg: pg.R, grid, ALL) / (4.0 * math.pi)
    rounded = int(round(chi))
    if abs(chi - rounded) > 0.05:
        warnings.warn(
            f"Euler characteristic estimate {chi:.4f} is far from an integer; "
            "the grid is likely too coarse for this surface",
            RuntimeWarning,
            stacklevel=2,
        )
    return chi, rounded


def h_sup_estimate(spec: ImmersionSpec, grid: GridSpec) -> float:
    """Max |H| over the base midpoint nodes (cheap low-order pass)."""
    u0, v0, du, dv = _axes(spec, grid)
    uc, vc = _lattice(u0, v0, du, dv, grid.nu, grid.nv, centers=True)
    _, abs_h = _eval_class(spec, uc, vc)
    return float(np.max(abs_h))


def convergence_study(spec: ImmersionSpec, field, region: Region, grids) -> ConvergenceStudy:
    """Observed-order diagnostics across a ladder of doubling grids.

    Needs at least three levels, each doubling nu and nv. The order at
    level k comes from the consecutive-difference ratio; non-monotone
    differences report "unstable" instead of a number. The error estimate
    for the finest value is |v_k - v_{k-1}| / (2^p - 1) with the last
    observed order p (p = 1 assumed when unstable).
    """
    grids = tuple(grids)
    if len(grids) < 3:
        raise ValueError("convergence study needs at least 3 grid levels")
    for a, b in zip(grids, grids[1:]):
        if b.nu != 2 * a.nu or b.nv != 2 * a.nv:
            raise ValueError(
                f"grid levels must double: {a.nu}x{a.nv} followed by {b.nu}x{b.nv}"
            )
    values = [integrate(spec, field, g, region) for g in grids]
    rows = []
    for k, (g, v) in enumerate(zip(grids, values)):
        if k < 2:
            rows.append(ConvergenceRow(g, v, None))
            continue
        d_prev = values[k - 1] - values[k - 2]
        d_last = v - values[k - 1]
        if d_last == 0.0:
            order = math.inf
        elif abs(d_last) >= abs(d_prev):
            order = "unstable"
        else:
            order = math.log2(abs(d_prev) / abs(d_last))
        rows.append(ConvergenceRow(g, v, order))
    last_order = rows[-1].estimated_order
    d_last = abs(values[-1] - values[-2])
    if last_order == math.inf:
        err = 0.0
    elif isinstance(last_order, float):
        err = d_last / (2.0 ** last_order - 1.0)
    else:
        err = d_last
    return ConvergenceStudy(
        rows=tuple(rows), value=values[-1], error_estimate=err, order=last_order
    )
