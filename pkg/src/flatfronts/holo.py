"""Discrete holomorphic maps on quad grids.

A complex vertex function g is holomorphic when the cross ratio of every
face factorizes over a real edge labelling,

    cr(g_i, g_j, g_k, g_l) = a_ij / a_jk,

with cr(z_i,z_j,z_k,z_l) = (dg_ij/dg_jk)(dg_kl/dg_li) and dg_ij = z_j - z_i.
Regularity additionally requires cr outside {0, 1, inf} and nonzero edge
derivatives.  This module provides the cross ratio, two generators, the
validator that is the source of truth for all generated maps, the dual map
g* with dg* = a / conj(dg), and the real vertex function r that factorizes
|dg|^2 / a over edges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateQuad, Inconsistent, PoleOnVertex, RegularityViolation
from .grid import EdgeForm, EdgeLabelling, QuadGrid, derivative_form, face_sums, integrate_edge_form

#: Relative threshold below which a cross-ratio denominator counts as zero.
EPS_DEG = 1e-12

#: Default tolerance on the factorized cross-ratio residual |cr * a_jk - a_ij|.
TAU_CR = 1e-10


def cross_ratio(z_i, z_j, z_k, z_l):
    """Cross ratio (dg_ij/dg_jk)(dg_kl/dg_li) of four complex numbers.

    Accepts scalars or broadcastable arrays.  Raises DegenerateQuad when a
    denominator difference vanishes relative to the quad scale.
    """
    z_i, z_j, z_k, z_l = map(np.asarray, (z_i, z_j, z_k, z_l))
    d_ij = z_j - z_i
    d_jk = z_k - z_j
    d_kl = z_l - z_k
    d_li = z_i - z_l
    scale = np.maximum(1.0, np.max(np.stack(np.broadcast_arrays(
        np.abs(z_i), np.abs(z_j), np.abs(z_k), np.abs(z_l))), axis=0))
    if np.any(np.abs(d_jk) <= EPS_DEG * scale) or np.any(np.abs(d_li) <= EPS_DEG * scale):
        raise DegenerateQuad("cross-ratio denominator vanishes")
    result = (d_ij * d_kl) / (d_jk * d_li)
    return result[()] if result.ndim == 0 else result


@dataclass(frozen=True)
class HolomorphicMap:
    """A complex vertex function with its factorizing edge labelling."""

    grid: QuadGrid
    labelling: EdgeLabelling
    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "g", np.asarray(self.g, dtype=complex))
        if self.g.shape != self.grid.vertex_shape:
            raise ValueError("vertex values do not match grid shape")
        self.labelling.check_grid(self.grid)

    def dg(self) -> EdgeForm:
        return derivative_form(self.g)

    def face_cross_ratios(self) -> np.ndarray:
        g = self.g
        return cross_ratio(g[:-1, :-1], g[1:, :-1], g[1:, 1:], g[:-1, 1:])

    def validate(self, tol: float = TAU_CR) -> "HolomorphicReport":
        return validate_holomorphic(self.g, self.labelling, tol)


@dataclass(frozen=True)
class HolomorphicReport:
    """Per-face residuals and regularity flags produced by the validator."""

    residuals: np.ndarray
    max_residual: float
    degenerate_faces: list
    zero_edges: list
    tol: float

    @property
    def regular(self) -> bool:
        return not self.degenerate_faces and not self.zero_edges

    @property
    def passed(self) -> bool:
        return self.regular and self.max_residual <= self.tol

    def offending_faces(self, tol: float | None = None) -> list:
        tol = self.tol if tol is None else tol
        return [tuple(map(int, f)) for f in np.argwhere(self.residuals > tol)]


def validate_holomorphic(g: np.ndarray, labelling: EdgeLabelling, tol: float = TAU_CR) -> HolomorphicReport:
    """Check the factorized cross-ratio condition face by face.

    The residual per face is |cr * a_jk - a_ij|.  Faces whose cross ratio
    lands within EPS_DEG of {0, 1} and edges with vanishing derivative are
    flagged separately; those faces get an infinite residual instead of a
    spurious small one.
    """
    g = np.asarray(g, dtype=complex)
    dg = derivative_form(g)
    # Edge degeneracy relative to the local vertex values: a derivative that
    # is negligible against its endpoints has no usable digits even if it is
    # far from the global scale.
    scale_h = np.abs(g[:-1, :]) + np.abs(g[1:, :])
    scale_v = np.abs(g[:, :-1]) + np.abs(g[:, 1:])
    zero_edges = [("h", int(m), int(n)) for m, n in np.argwhere(np.abs(dg.h) <= EPS_DEG * scale_h)]
    zero_edges += [("v", int(m), int(n)) for m, n in np.argwhere(np.abs(dg.v) <= EPS_DEG * scale_v)]

    num = dg.h[:, :-1] * (-dg.h[:, 1:])
    den = dg.v[1:, :] * (-dg.v[:-1, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        cr = np.where(den != 0, num / np.where(den != 0, den, 1.0), np.inf)
    degenerate = (np.abs(cr) <= EPS_DEG) | (np.abs(cr - 1.0) <= EPS_DEG) | ~np.isfinite(cr)
    residuals = np.abs(cr * labelling.v() - labelling.h())
    residuals = np.where(degenerate, np.inf, residuals)
    finite = residuals[np.isfinite(residuals)]
    max_residual = float(np.max(finite)) if finite.size else np.inf
    if degenerate.any():
        max_residual = np.inf
    return HolomorphicReport(
        residuals=residuals,
        max_residual=max_residual,
        degenerate_faces=[tuple(map(int, f)) for f in np.argwhere(degenerate)],
        zero_edges=zero_edges,
        tol=tol,
    )


def make_linear(grid: QuadGrid, alpha: float, beta: float) -> HolomorphicMap:
    """The map g(m,n) = m*alpha + i*n*beta with labels (alpha^2, -beta^2).

    Every face has cross ratio -alpha^2/beta^2 = a_ij/a_jk exactly.
    """
    if alpha == 0 or beta == 0:
        raise ValueError("linear map parameters must be nonzero")
    m = np.arange(grid.rows)[:, None]
    n = np.arange(grid.cols)[None, :]
    g = m * alpha + 1j * n * beta
    labelling = EdgeLabelling.constant(grid, alpha**2, -(beta**2))
    return HolomorphicMap(grid, labelling, g)


def make_moebius(h: HolomorphicMap, a: complex, b: complex, c: complex, d: complex) -> HolomorphicMap:
    """Apply the fractional linear map z -> (az+b)/(cz+d) to the vertices.

    Cross ratios are invariant under fractional linear maps, so the result
    is holomorphic with the unchanged labelling; this is verified rather
    than trusted.  Raises PoleOnVertex when cz+d vanishes at a vertex and
    RegularityViolation when the image fails regularity.
    """
    if a * d - b * c == 0:
        raise ValueError("coefficients must satisfy ad - bc != 0")
    denom = c * h.g + d
    scale = np.maximum(1.0, np.abs(c * h.g)) + abs(d)
    if np.any(np.abs(denom) <= EPS_DEG * scale):
        vertex = tuple(map(int, np.argwhere(np.abs(denom) <= EPS_DEG * scale)[0]))
        raise PoleOnVertex(f"vertex {vertex} maps to infinity")
    out = HolomorphicMap(h.grid, h.labelling, (a * h.g + b) / denom)
    report = out.validate()
    if not report.regular:
        raise RegularityViolation(
            f"image map is irregular: {len(report.degenerate_faces)} degenerate faces, "
            f"{len(report.zero_edges)} zero edges"
        )
    return out


def dual_form(h: HolomorphicMap) -> EdgeForm:
    """The edge form a_ij / conj(dg_ij) whose integral is the dual map."""
    dg = h.dg()
    return EdgeForm(h=h.labelling.h() / np.conj(dg.h), v=h.labelling.v() / np.conj(dg.v))


def christoffel_dual(
    h: HolomorphicMap, root: tuple[int, int] = (0, 0), root_value: complex = 0.0
) -> tuple[np.ndarray, float]:
    """Integrate dg* = a / conj(dg) to the dual vertex function g*.

    Closedness of the dual form is equivalent to holomorphicity of g, so a
    NotClosed error signals invalid input.  Returns (g*, residual) where
    residual is the worst face sum relative to the form scale.
    """
    form = dual_form(h)
    gstar = integrate_edge_form(h.grid, form, root=root, root_value=root_value)
    residual = float(np.max(np.abs(face_sums(form)))) / max(1.0, form.max_abs())
    return gstar, residual


def factorize_r(h: HolomorphicMap, r_root: float = 1.0, tol: float = 1e-8) -> np.ndarray:
    """Solve r_i * r_j = |dg_ij|^2 / a_ij for a real vertex function r.

    The value at (0,0) is r_root; propagation runs down the first column and
    then along rows.  Multiplicative consistency around every face and the
    defining relation on every edge are checked afterwards (Inconsistent on
    failure); the residual is relative to the edge target |dg|^2 / a.
    Signs are whatever the propagation produces: the target may be negative
    on edges of either direction, so r genuinely changes sign across the
    grid's bipartite classes.
    """
    if r_root == 0:
        raise ValueError("r_root must be nonzero")
    dg = h.dg()
    target_h = np.abs(dg.h) ** 2 / h.labelling.h()
    target_v = np.abs(dg.v) ** 2 / h.labelling.v()

    rows, cols = h.grid.vertex_shape
    r = np.empty((rows, cols))
    r[0, 0] = r_root
    for m in range(1, rows):
        r[m, 0] = target_h[m - 1, 0] / r[m - 1, 0]
    for n in range(1, cols):
        r[:, n] = target_v[:, n - 1] / r[:, n - 1]

    # Face closure of the multiplicative relation; the products are positive
    # by construction, so the ratio-to-1 residual is meaningful.
    closure = (target_h[:, :-1] * target_h[:, 1:]) / (target_v[1:, :] * target_v[:-1, :])
    face_res = np.abs(closure - 1.0)
    worst = np.unravel_index(np.argmax(face_res), face_res.shape)
    if face_res[worst] > tol:
        raise Inconsistent((int(worst[0]), int(worst[1])), float(face_res[worst]))
    edge_res = max(
        float(np.max(np.abs(r[:-1, :] * r[1:, :] - target_h) / np.abs(target_h))),
        float(np.max(np.abs(r[:, :-1] * r[:, 1:] - target_v) / np.abs(target_v))),
    )
    if edge_res > tol:
        raise Inconsistent((-1, -1), edge_res)
    return r


def koenigs_diagonal_check(h: HolomorphicMap, gstar: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Residual of the dual diagonal relation per face.

    For the dual pair (g*, r) the face diagonals satisfy
    dgstar_ik * dr_jl + dg_jl * d(1/r)_ik = 0; the returned array is the
    absolute value of the left-hand side.
    """
    g = h.g
    gstar = np.asarray(gstar)
    r = np.asarray(r)
    d_gstar_ik = gstar[1:, 1:] - gstar[:-1, :-1]
    d_r_jl = r[:-1, 1:] - r[1:, :-1]
    d_g_jl = g[:-1, 1:] - g[1:, :-1]
    d_rinv_ik = 1.0 / r[1:, 1:] - 1.0 / r[:-1, :-1]
    return np.abs(d_gstar_ik * d_r_jl + d_g_jl * d_rinv_ik)


@dataclass(frozen=True)
class DualData:
    """Christoffel dual vertices and the factorizing function, bundled."""

    gstar: np.ndarray
    r: np.ndarray


def compute_dual(h: HolomorphicMap, root_value: complex = 0.0, r_root: float = 1.0) -> DualData:
    gstar, _ = christoffel_dual(h, root_value=root_value)
    return DualData(gstar=gstar, r=factorize_r(h, r_root=r_root))
