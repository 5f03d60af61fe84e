"""Curvature of an immersed surface chart in a constant-curvature ambient space.

The ambient space of curvature ``c`` is realized as (a subset of) R^3 with
the conformal metric lambda(x)^2 * Euclidean, lambda = 1/(1 + (c/4)|x|^2).
One code path covers flat, spherical, and hyperbolic ambients; c = 0 makes
lambda identically 1 and every ambient correction vanish exactly.

Evaluation runs in two stages. Stage one works in jet arithmetic and
produces the raw parameter-space partials of the first and second
fundamental forms (and of H, the trace-free part, and its squared norm)
through the order the caller needs. Stage two is plain numpy tensor
algebra on those arrays: Christoffel symbols, covariant derivatives,
norms, curvature, and the residuals of the identities under test.

Index conventions for the stored arrays (batch axes lead, tensor axes
trail): ``dg[..., k, i, j]`` is the raw partial d_k g_ij, and
``d2g[..., l, k, i, j]`` is d_l d_k g_ij; likewise for h. Christoffels
are ``gamma[..., k, i, j]`` = Gamma^k_ij. H is the full trace g^{ij} h_ij
(the sum of principal curvatures, not their average) and every formula
in this module is calibrated to that convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jets
from .errors import SingularEvaluationError
from .jets import Jet2, derivative
from .surfaces import ImmersionSpec, evaluate_chart

_EINS = dict(optimize=True)


# -- stage one: jets -> raw partial arrays -------------------------------------


@dataclass
class PointGeometry:
    """All curvature data at a (batch of) parameter point(s).

    Raw-partial fields are filled by `fundamental_forms`; everything from
    `detg` down is filled in place by `covariant_data`. Second-derivative
    fields (d2h, d2H, ...) are present only for order-4 evaluations.
    """

    u: np.ndarray
    v: np.ndarray
    order: int
    ambient_c: float
    batch_shape: tuple

    g: np.ndarray = None
    dg: np.ndarray = None
    d2g: np.ndarray = None
    h: np.ndarray = None
    dh: np.ndarray = None
    d2h: np.ndarray = None
    H: np.ndarray = None
    dH: np.ndarray = None
    d2H: np.ndarray = None
    hring: np.ndarray = None
    dhring: np.ndarray = None
    d2hring: np.ndarray = None
    hring_norm2: np.ndarray = None
    d_hring_norm2: np.ndarray = None
    d2_hring_norm2: np.ndarray = None

    detg: np.ndarray = None
    sqrt_detg: np.ndarray = None
    ginv: np.ndarray = None
    gamma: np.ndarray = None
    nabla_hring: np.ndarray = None
    nabla_hring_norm2: np.ndarray = None
    gradH_norm2: np.ndarray = None
    hring_up: np.ndarray = None
    trace_hring: np.ndarray = None
    R: np.ndarray = None


def _annotate(err: SingularEvaluationError, u, v) -> SingularEvaluationError:
    if err.point is not None:
        return err
    shape = np.broadcast_shapes(np.shape(u), np.shape(v))
    if not shape:
        return err.with_context(point=(float(u), float(v)))
    if err.index is not None:
        uu = np.broadcast_to(u, shape).ravel()
        vv = np.broadcast_to(v, shape).ravel()
        return err.with_context(point=(float(uu[err.index]), float(vv[err.index])))
    return err


def _val(j: Jet2, shape):
    return np.broadcast_to(np.asarray(j.value, dtype=np.float64), shape)


def _d1(j: Jet2, k: int, shape):
    p = j.partial(1, 0) if k == 0 else j.partial(0, 1)
    return np.broadcast_to(np.asarray(p, dtype=np.float64), shape)


def _d2(j: Jet2, l: int, k: int, shape):
    du = (l == 0) + (k == 0)
    dv = (l == 1) + (k == 1)
    return np.broadcast_to(np.asarray(j.partial(du, dv), dtype=np.float64), shape)


def _sym_matrix_arrays(m00, m01, m11, shape, max_d: int):
    """Values/partials of a symmetric 2x2 jet matrix as stacked arrays."""
    jmat = ((m00, m01), (m01, m11))
    val = np.empty(shape + (2, 2))
    d1 = np.empty(shape + (2, 2, 2))
    d2 = np.empty(shape + (2, 2, 2, 2)) if max_d >= 2 else None
    for i in range(2):
        for j in range(2):
            val[..., i, j] = _val(jmat[i][j], shape)
            for k in range(2):
                d1[..., k, i, j] = _d1(jmat[i][j], k, shape)
            if max_d >= 2:
                for l in range(2):
                    for k in range(2):
                        d2[..., l, k, i, j] = _d2(jmat[i][j], l, k, shape)
    return val, d1, d2


def _dot3(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def fundamental_forms(spec: ImmersionSpec, u, v, order: int = 3) -> PointGeometry:
    """Raw partials of g, h, H, the trace-free part, and |hring|^2 at (u, v).

    order 3 provides first partials of h (enough for all first covariant
    derivatives); order 4 additionally provides the second partials needed
    by the Laplacian-level residuals. u, v may be arrays (one batch).
    """
    if order not in (3, 4):
        raise ValueError(f"jet order must be 3 or 4, got {order}")
    c = spec.ambient_c
    shape = np.broadcast_shapes(np.shape(u), np.shape(v))
    try:
        f = evaluate_chart(spec, u, v, order)
        fu = tuple(derivative(comp, du=1) for comp in f)
        fv = tuple(derivative(comp, dv=1) for comp in f)
        fd = (fu, fv)
        fdd = {
            (0, 0): tuple(derivative(comp, du=2) for comp in f),
            (0, 1): tuple(derivative(comp, du=1, dv=1) for comp in f),
            (1, 1): tuple(derivative(comp, dv=2) for comp in f),
        }

        if c != 0.0:
            lam = 1.0 / (1.0 + (c / 4.0) * _dot3(f, f))
            lam2 = lam * lam
            # p_k = d(log lambda)/dx^k along the chart
            p = tuple(f[k] * lam * (-c / 2.0) for k in range(3))
            p_dot_fd = (_dot3(p, fu), _dot3(p, fv))

        def metric_entry(i, j):
            e = _dot3(fd[i], fd[j])
            return lam2 * e if c != 0.0 else e

        g00, g01, g11 = metric_entry(0, 0), metric_entry(0, 1), metric_entry(1, 1)

        # ambient Hessian of the chart: coordinate second derivative plus
        # the conformal Christoffel correction (absent when c = 0)
        def shape_vec(i, j):
            base = fdd[(min(i, j), max(i, j))]
            if c == 0.0:
                return base
            euc = _dot3(fd[i], fd[j])
            return tuple(
                base[k] + fd[i][k] * p_dot_fd[j] + fd[j][k] * p_dot_fd[i] - euc * p[k]
                for k in range(3)
            )

        nx = fu[1] * fv[2] - fu[2] * fv[1]
        ny = fu[2] * fv[0] - fu[0] * fv[2]
        nz = fu[0] * fv[1] - fu[1] * fv[0]
        n = (nx, ny, nz)
        inv_norm = 1.0 / jets.sqrt(_dot3(n, n))

        def form_entry(i, j):
            e = _dot3(shape_vec(i, j), n) * inv_norm
            return lam * e if c != 0.0 else e

        h00, h01, h11 = form_entry(0, 0), form_entry(0, 1), form_entry(1, 1)

        det = g00 * g11 - g01 * g01
        inv_det = 1.0 / det
        # 2x2 inverse, entries as jets
        gi00 = g11 * inv_det
        gi01 = -1.0 * g01 * inv_det
        gi11 = g00 * inv_det
        Hj = gi00 * h00 + 2.0 * (gi01 * h01) + gi11 * h11

        hr00 = h00 - 0.5 * (Hj * g00)
        hr01 = h01 - 0.5 * (Hj * g01)
        hr11 = h11 - 0.5 * (Hj * g11)
        # raise both indices: hring^{ij} = g^{ik} g^{jl} hring_kl
        up00 = gi00 * (gi00 * hr00 + gi01 * hr01) + gi01 * (gi00 * hr01 + gi01 * hr11)
        up01 = gi00 * (gi01 * hr00 + gi11 * hr01) + gi01 * (gi01 * hr01 + gi11 * hr11)
        up11 = gi01 * (gi01 * hr00 + gi11 * hr01) + gi11 * (gi01 * hr01 + gi11 * hr11)
        norm2 = up00 * hr00 + 2.0 * (up01 * hr01) + up11 * hr11
    except SingularEvaluationError as err:
        raise _annotate(err, u, v) from None

    pg = PointGeometry(
        u=np.asarray(u, dtype=np.float64),
        v=np.asarray(v, dtype=np.float64),
        order=order,
        ambient_c=float(c),
        batch_shape=shape,
    )
    with_second = order >= 4
    pg.g, pg.dg, pg.d2g = _sym_matrix_arrays(g00, g01, g11, shape, max_d=2)
    pg.h, pg.dh, pg.d2h = _sym_matrix_arrays(h00, h01, h11, shape, 2 if with_second else 1)
    pg.H = _val(Hj, shape)
    pg.dH = np.stack([_d1(Hj, k, shape) for k in range(2)], axis=-1)
    pg.hring_norm2 = _val(norm2, shape)
    pg.d_hring_norm2 = np.stack([_d1(norm2, k, shape) for k in range(2)], axis=-1)
    pg.hring, pg.dhring, pg.d2hring = _sym_matrix_arrays(
        hr00, hr01, hr11, shape, 2 if with_second else 1
    )
    if with_second:
        pg.d2H = np.empty(shape + (2, 2))
        pg.d2_hring_norm2 = np.empty(shape + (2, 2))
        for l in range(2):
            for k in range(2):
                pg.d2H[..., l, k] = _d2(Hj, l, k, shape)
                pg.d2_hring_norm2[..., l, k] = _d2(norm2, l, k, shape)
    return pg


# -- stage two: covariant completion -------------------------------------------


def covariant_data(pg: PointGeometry) -> PointGeometry:
    """Fill Christoffels, covariant derivatives, norms, and R in place."""
    g, dg, h = pg.g, pg.dg, pg.h
    detg = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
    if np.any(detg <= 0):
        bad = int(np.argmax(np.ravel(detg <= 0)))
        raise SingularEvaluationError(
            "induced metric is degenerate", value=float(np.ravel(detg)[bad]), index=bad
        )
    ginv = np.empty_like(g)
    ginv[..., 0, 0] = g[..., 1, 1] / detg
    ginv[..., 1, 1] = g[..., 0, 0] / detg
    ginv[..., 0, 1] = ginv[..., 1, 0] = -g[..., 0, 1] / detg

    # Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
    A = dg                                   # A[..., i, j, l] = d_i g_jl
    B = np.swapaxes(dg, -3, -2)              # d_j g_il
    C = np.moveaxis(dg, -3, -1)              # d_l g_ij
    gamma = 0.5 * np.einsum("...kl,...ijl->...kij", ginv, A + B - C, **_EINS)

    hring, dhring = pg.hring, pg.dhring
    nabla_hring = (
        dhring
        - np.einsum("...lki,...lj->...kij", gamma, hring, **_EINS)
        - np.einsum("...lkj,...il->...kij", gamma, hring, **_EINS)
    )

    pg.detg = detg
    pg.sqrt_detg = np.sqrt(detg)
    pg.ginv = ginv
    pg.gamma = gamma
    pg.nabla_hring = nabla_hring
    pg.gradH_norm2 = np.einsum("...ij,...i,...j->...", ginv, pg.dH, pg.dH, **_EINS)
    pg.hring_up = np.einsum("...ik,...jl,...kl->...ij", ginv, ginv, hring, **_EINS)
    pg.trace_hring = np.einsum("...ij,...ij->...", ginv, hring, **_EINS)
    pg.nabla_hring_norm2 = _norm3_sq(nabla_hring, ginv)
    pg.R = 0.5 * pg.H**2 - pg.hring_norm2 + 2.0 * pg.ambient_c
    return pg


def point_geometry(spec: ImmersionSpec, u, v, order: int = 3) -> PointGeometry:
    return covariant_data(fundamental_forms(spec, u, v, order))


def _raise3(T, ginv):
    t = np.einsum("...kl,...lab->...kab", ginv, T, **_EINS)
    t = np.einsum("...ia,...kab->...kib", ginv, t, **_EINS)
    return np.einsum("...jb,...kib->...kij", ginv, t, **_EINS)


def _norm3_sq(T, ginv):
    return np.maximum(np.einsum("...kij,...kij->...", _raise3(T, ginv), T, **_EINS), 0.0)


def _norm3(T, ginv):
    return np.sqrt(_norm3_sq(T, ginv))


def _norm2_sq(T, ginv):
    up = np.einsum("...ik,...jl,...kl->...ij", ginv, ginv, T, **_EINS)
    return np.maximum(np.einsum("...ij,...ij->...", up, T, **_EINS), 0.0)


def _norm2t(T, ginv):
    return np.sqrt(_norm2_sq(T, ginv))


def _norm1(V, ginv):
    q = np.einsum("...ij,...i,...j->...", ginv, V, V, **_EINS)
    return np.sqrt(np.maximum(q, 0.0))


# -- identity residuals ----------------------------------------------------------


@dataclass
class IdentityResiduals:
    """Raw residual norms and per-identity magnitude scales (same batch shape).

    The scale for each identity is the sum of the norms of its constituent
    terms, so ``r / (1 + s)`` is a dimensionless defect measure that stays
    meaningful both near umbilics (terms tiny) and on strongly bent charts.
    """

    r_codazzi: np.ndarray
    s_codazzi: np.ndarray
    r_div: np.ndarray
    s_div: np.ndarray
    r_smo: np.ndarray
    s_smo: np.ndarray
    r_norm: np.ndarray
    s_norm: np.ndarray

    def normalized(self) -> dict:
        return {
            "codazzi": self.r_codazzi / (1.0 + self.s_codazzi),
            "div": self.r_div / (1.0 + self.s_div),
            "smo": self.r_smo / (1.0 + self.s_smo),
            "norm": self.r_norm / (1.0 + self.s_norm),
        }


def identity_residuals(pg: PointGeometry) -> IdentityResiduals:
    """Defects of the trace-free Codazzi relation, its divergence trace,
    the Smoczyk-type gradient identity, and the |nabla h|^2 splitting."""
    ginv, g, dH = pg.ginv, pg.g, pg.dH
    nh = pg.nabla_hring

    # nabla_k hring_ij - nabla_j hring_ik = 1/2 (nabla_j H g_ik - nabla_k H g_ij)
    T1 = nh
    T2 = np.swapaxes(nh, -3, -1)  # nabla_j hring_ik as [k, i, j]
    T3 = 0.5 * np.einsum("...j,...ik->...kij", dH, g, **_EINS)
    T4 = 0.5 * np.einsum("...k,...ij->...kij", dH, g, **_EINS)
    r_codazzi = _norm3(T1 - T2 - T3 + T4, ginv)
    s_codazzi = _norm3(T1, ginv) + _norm3(T2, ginv) + _norm3(T3, ginv) + _norm3(T4, ginv)

    # g^{jk} nabla_k hring_ij = 1/2 nabla_i H
    D = np.einsum("...jk,...kij->...i", ginv, nh, **_EINS)
    r_div = _norm1(D - 0.5 * dH, ginv)
    s_div = _norm1(D, ginv) + 0.5 * _norm1(dH, ginv)

    # 2|hring|^2 (|nabla hring|^2 - 1/2 |nabla H|^2)
    #   = 4 |nabla|hring||^2 |hring|^2 - 2 hring^{ij} nabla_i|hring|^2 nabla_j H
    # with nabla_i |hring|^2 = 2 hring^{kl} nabla_i hring_kl and
    # |nabla|hring||^2 |hring|^2 = 1/4 |nabla(|hring|^2)|^2 (smooth at umbilics)
    n2 = pg.hring_norm2
    dn2 = 2.0 * np.einsum("...kl,...ikl->...i", pg.hring_up, nh, **_EINS)
    grad_n2_sq = np.einsum("...ij,...i,...j->...", ginv, dn2, dn2, **_EINS)
    cross = np.einsum("...ij,...i,...j->...", pg.hring_up, dn2, dH, **_EINS)
    t_a = 2.0 * n2 * (pg.nabla_hring_norm2 - 0.5 * pg.gradH_norm2)
    t_b = grad_n2_sq
    t_c = 2.0 * cross
    r_smo = np.abs(t_a - t_b + t_c)
    s_smo = (
        2.0 * n2 * pg.nabla_hring_norm2
        + n2 * pg.gradH_norm2
        + np.abs(t_b)
        + np.abs(t_c)
    )

    # |nabla h|^2 = |nabla hring|^2 + 1/2 |nabla H|^2, with nabla h assembled
    # independently from the raw partials of h
    nabla_h = (
        pg.dh
        - np.einsum("...lki,...lj->...kij", pg.gamma, pg.h, **_EINS)
        - np.einsum("...lkj,...il->...kij", pg.gamma, pg.h, **_EINS)
    )
    nh_sq = _norm3_sq(nabla_h, ginv)
    r_norm = np.abs(nh_sq - pg.nabla_hring_norm2 - 0.5 * pg.gradH_norm2)
    s_norm = nh_sq + pg.nabla_hring_norm2 + 0.5 * pg.gradH_norm2

    return IdentityResiduals(r_codazzi, s_codazzi, r_div, s_div, r_smo, s_smo, r_norm, s_norm)


# -- second-order (Laplacian) residuals --------------------------------------------


def _dginv_dgamma(pg: PointGeometry):
    ginv, dg, d2g = pg.ginv, pg.dg, pg.d2g
    dginv = -np.einsum("...ia,...mab,...bj->...mij", ginv, dg, ginv, **_EINS)
    A = dg
    B = np.swapaxes(dg, -3, -2)
    C = np.moveaxis(dg, -3, -1)
    dA = d2g                                  # [..., m, i, j, l] = d_m d_i g_jl
    dB = np.swapaxes(d2g, -3, -2)
    dC = np.moveaxis(d2g, -3, -1)
    dgamma = 0.5 * (
        np.einsum("...mkl,...ijl->...mkij", dginv, A + B - C, **_EINS)
        + np.einsum("...kl,...mijl->...mkij", ginv, dA + dB - dC, **_EINS)
    )
    return dginv, dgamma


@dataclass
class BochnerResidual:
    """Defects of the two Laplacian-level identities (tensor and scalar form)."""

    r_tensor: np.ndarray
    s_tensor: np.ndarray
    r_scalar: np.ndarray
    s_scalar: np.ndarray

    def normalized(self) -> np.ndarray:
        return np.maximum(
            self.r_tensor / (1.0 + self.s_tensor), self.r_scalar / (1.0 + self.s_scalar)
        )

    @property
    def value(self) -> np.ndarray:
        return np.maximum(self.r_tensor, self.r_scalar)


def bochner_residual(spec: ImmersionSpec, u, v) -> BochnerResidual:
    """Evaluate the Laplacian identities at (u, v) from order-4 jet data.

    Tensor form: Delta hring_ij = R hring_ij + nabla_i nabla_j H - 1/2 Delta H g_ij.
    Scalar form: 1/2 Delta|hring|^2 |hring|^2 = 2|nabla|hring||^2|hring|^2
      - hring^{ij} nabla_i|hring|^2 nabla_j H + 1/2 |nabla H|^2 |hring|^2
      + R |hring|^4 + hring^{ij} nabla_i nabla_j H |hring|^2,
    with |nabla|hring||^2 |hring|^2 written as 1/4 |nabla(|hring|^2)|^2.
    """
    pg = point_geometry(spec, u, v, order=4)
    ginv, gamma, hring = pg.ginv, pg.gamma, pg.hring
    nh, dhring = pg.nabla_hring, pg.dhring
    _, dgamma = _dginv_dgamma(pg)

    # d_l (nabla_k hring_ij)
    dnab = (
        pg.d2hring
        - np.einsum("...lmki,...mj->...lkij", dgamma, hring, **_EINS)
        - np.einsum("...mki,...lmj->...lkij", gamma, dhring, **_EINS)
        - np.einsum("...lmkj,...im->...lkij", dgamma, hring, **_EINS)
        - np.einsum("...mkj,...lim->...lkij", gamma, dhring, **_EINS)
    )
    nabla2 = (
        dnab
        - np.einsum("...mlk,...mij->...lkij", gamma, nh, **_EINS)
        - np.einsum("...mli,...kmj->...lkij", gamma, nh, **_EINS)
        - np.einsum("...mlj,...kim->...lkij", gamma, nh, **_EINS)
    )
    lap_hring = np.einsum("...kl,...lkij->...ij", ginv, nabla2, **_EINS)

    hessH = pg.d2H - np.einsum("...kij,...k->...ij", gamma, pg.dH, **_EINS)
    lapH = np.einsum("...ij,...ij->...", ginv, hessH, **_EINS)

    T = (
        lap_hring
        - pg.R[..., None, None] * hring
        - hessH
        + 0.5 * lapH[..., None, None] * pg.g
    )
    r_tensor = _norm2t(T, ginv)
    s_tensor = (
        _norm2t(lap_hring, ginv)
        + np.abs(pg.R) * _norm2t(hring, ginv)
        + _norm2t(hessH, ginv)
        + 0.5 * np.abs(lapH) * np.sqrt(2.0)
    )

    n2, dn2 = pg.hring_norm2, pg.d_hring_norm2
    hess_n2 = pg.d2_hring_norm2 - np.einsum(
        "...kij,...k->...ij", gamma, dn2, **_EINS
    )
    lap_n2 = np.einsum("...ij,...ij->...", ginv, hess_n2, **_EINS)
    grad_n2_sq = np.einsum("...ij,...i,...j->...", ginv, dn2, dn2, **_EINS)
    cross = np.einsum("...ij,...i,...j->...", pg.hring_up, dn2, pg.dH, **_EINS)
    hring_hessH = np.einsum("...ij,...ij->...", pg.hring_up, hessH, **_EINS)

    t1 = 0.5 * lap_n2 * n2
    t2 = 0.5 * grad_n2_sq          # = 2 |nabla|hring||^2 |hring|^2
    t3 = cross
    t4 = 0.5 * pg.gradH_norm2 * n2
    t5 = pg.R * n2 * n2
    t6 = hring_hessH * n2
    r_scalar = np.abs(t1 - t2 + t3 - t4 - t5 - t6)
    s_scalar = np.abs(t1) + np.abs(t2) + np.abs(t3) + np.abs(t4) + np.abs(t5) + np.abs(t6)

    return BochnerResidual(r_tensor, s_tensor, r_scalar, s_scalar)


# -- intrinsic curvature cross-check ------------------------------------------------


def intrinsic_scalar_curvature(pg: PointGeometry) -> np.ndarray:
    """Scalar curvature from (g, dg, d2g) alone, via the Ricci tensor of the
    Levi-Civita connection. Independent of h; used to cross-check the traced
    Gauss relation R = 1/2 H^2 - |hring|^2 + 2c."""
    if pg.d2g is None:
        raise ValueError("needs d2g (evaluate with order >= 3)")
    if pg.gamma is None:
        covariant_data(pg)
    gamma, ginv = pg.gamma, pg.ginv
    _, dgamma = _dginv_dgamma(pg)
    e1 = np.einsum("...kkij->...ij", dgamma, **_EINS)          # d_k Gamma^k_ij
    e2 = np.einsum("...ikkj->...ij", dgamma, **_EINS)          # d_i Gamma^k_kj
    tr_gamma = np.einsum("...kka->...a", gamma, **_EINS)
    e3 = np.einsum("...a,...aij->...ij", tr_gamma, gamma, **_EINS)
    e4 = np.einsum("...kia,...akj->...ij", gamma, gamma, **_EINS)
    ric = e1 - e2 + e3 - e4
    return np.einsum("...ij,...ij->...", ginv, ric, **_EINS)


# -- cheap classification fields ------------------------------------------------


def classification_values(spec: ImmersionSpec, u, v):
    """(|hring|^2, |H|) from a minimal order-2 evaluation.

    Used by the quadrature layer at cell corners, where only the sublevel
    classification (and the H envelope) is needed.
    """
    c = spec.ambient_c
    try:
        f = evaluate_chart(spec, u, v, 2)
        fu = tuple(derivative(comp, du=1) for comp in f)
        fv = tuple(derivative(comp, dv=1) for comp in f)
        fd = (fu, fv)
        fdd = {
            (0, 0): tuple(derivative(comp, du=2) for comp in f),
            (0, 1): tuple(derivative(comp, du=1, dv=1) for comp in f),
            (1, 1): tuple(derivative(comp, dv=2) for comp in f),
        }
        if c != 0.0:
            lam = 1.0 / (1.0 + (c / 4.0) * _dot3(f, f))
            p = tuple(f[k] * lam * (-c / 2.0) for k in range(3))
            p_dot_fd = (_dot3(p, fu), _dot3(p, fv))

        def gent(i, j):
            e = _dot3(fd[i], fd[j])
            return (lam * lam) * e if c != 0.0 else e

        def svec(i, j):
            base = fdd[(min(i, j), max(i, j))]
            if c == 0.0:
                return base
            euc = _dot3(fd[i], fd[j])
            return tuple(
                base[k] + fd[i][k] * p_dot_fd[j] + fd[j][k] * p_dot_fd[i] - euc * p[k]
                for k in range(3)
            )

        n = (
            fu[1] * fv[2] - fu[2] * fv[1],
            fu[2] * fv[0] - fu[0] * fv[2],
            fu[0] * fv[1] - fu[1] * fv[0],
        )
        inv_norm = 1.0 / jets.sqrt(_dot3(n, n))

        def hent(i, j):
            e = _dot3(svec(i, j), n) * inv_norm
            return lam * e if c != 0.0 else e

        shape = np.broadcast_shapes(np.shape(u), np.shape(v))
        g00, g01, g11 = (np.broadcast_to(gent(*ij).value, shape) for ij in ((0, 0), (0, 1), (1, 1)))
        h00, h01, h11 = (np.broadcast_to(hent(*ij).value, shape) for ij in ((0, 0), (0, 1), (1, 1)))
    except SingularEvaluationError as err:
        raise _annotate(err, u, v) from None
    det = g00 * g11 - g01 * g01
    H = (g11 * h00 - 2.0 * g01 * h01 + g00 * h11) / det
    hr00 = h00 - 0.5 * H * g00
    hr01 = h01 - 0.5 * H * g01
    hr11 = h11 - 0.5 * H * g11
    # |hring|^2 for a 2x2 symmetric tensor against g
    gi00, gi01, gi11 = g11 / det, -g01 / det, g00 / det
    up00 = gi00 * (gi00 * hr00 + gi01 * hr01) + gi01 * (gi00 * hr01 + gi01 * hr11)
    up01 = gi00 * (gi01 * hr00 + gi11 * hr01) + gi01 * (gi01 * hr01 + gi11 * hr11)
    up11 = gi01 * (gi01 * hr00 + gi11 * hr01) + gi11 * (gi01 * hr01 + gi11 * hr11)
    norm2 = up00 * hr00 + 2.0 * up01 * hr01 + up11 * hr11
    return np.maximum(norm2, 0.0), np.abs(H)
