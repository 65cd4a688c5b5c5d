"""Recovery of Weierstrass data from a Darboux pair.

Given the two legs of a Darboux pair as homogeneous lifts, the matrix
F' = (h+, h-) is made unimodular per vertex, the transition matrices
W'_ij = (F'_i)^{-1} F'_j are read off, and their entries are constrained by
unimodularity plus the edge cross-ratio condition:

    u y - v x = 1,   -v x = t b   =>   x = -t b / v,   y = (1 - t b) / u.

The remaining per-vertex freedom diag(w, 1/w) of the lifts is deliberately
not normalized away: the gauge w is solved from the difference equation
w_j = sqrt(1 - t b_ij) / u_ij * w_i, whose integrability is exactly the
multiplicative face compatibility of u.  The recovered derivative

    dg_ij = v_ij / (w_i w_j sqrt(1 - t b_ij))

is closed and integrates to a holomorphic potential g with labelling
a = -b / (1 - t b), which regenerates the pair through the forward
construction up to a global scale (from the free w root) and a translation
(from the free g root).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoincidentPoints, EntryMismatch, NotIntegrable, RegularityViolation
from .frame import inv2
from .gauss import DarbouxPair, a_of, det2v
from .grid import EdgeForm, EdgeLabelling, QuadGrid, integrate_edge_form
from .holo import EPS_DEG, HolomorphicMap

TAU_ENTRY = 1e-8


def normalize_lifts(pair: DarbouxPair) -> np.ndarray:
    """Unimodular per-vertex matrices F' = (h+, h-) / sqrt(det).

    The square root uses the principal branch.  CoincidentPoints is raised
    where the two legs are projectively equal (zero determinant).
    """
    dets = det2v(pair.hplus, pair.hminus)
    scale = np.linalg.norm(pair.hplus, axis=-1) * np.linalg.norm(pair.hminus, axis=-1)
    bad = np.abs(dets) <= EPS_DEG * scale
    if bad.any():
        raise CoincidentPoints(tuple(map(int, np.argwhere(bad)[0])))
    fprime = np.stack([pair.hplus, pair.hminus], axis=-1)
    return fprime / np.sqrt(dets.astype(complex))[..., None, None]


@dataclass(frozen=True)
class RawConnection:
    """Entries of the transition matrices W' = [[u, v], [x, y]] per edge."""

    grid: QuadGrid
    b: EdgeLabelling
    t: float
    u_h: np.ndarray
    v_h: np.ndarray
    x_h: np.ndarray
    y_h: np.ndarray
    u_v: np.ndarray
    v_v: np.ndarray
    x_v: np.ndarray
    y_v: np.ndarray
    entry_residual: float


def connection_entries(fprime: np.ndarray, b: EdgeLabelling, t: float, tol: float = TAU_ENTRY) -> RawConnection:
    """Read off W'_ij = (F'_i)^{-1} F'_j and verify the edge relations.

    x = -t b / v and y = (1 - t b) / u are consequences of unimodularity and
    the prescribed edge cross ratio, not assumptions; their worst relative
    deviation is checked against tol and raises EntryMismatch when the input
    is not a genuine Darboux pair.
    """
    rows, cols = fprime.shape[:2]
    grid = QuadGrid(rows, cols)
    b.check_grid(grid)
    finv = inv2(fprime)
    w_h = finv[:-1, :] @ fprime[1:, :]
    w_v = finv[:, :-1] @ fprime[:, 1:]

    def split(w):
        return w[..., 0, 0], w[..., 0, 1], w[..., 1, 0], w[..., 1, 1]

    u_h, v_h, x_h, y_h = split(w_h)
    u_v, v_v, x_v, y_v = split(w_v)

    def direction_residual(u, v, x, y, tb):
        scale = np.max(np.abs(np.stack([u, v, x, y])), axis=0)
        res_x = np.abs(x * v + tb) / np.maximum(scale**2, 1.0)
        res_y = np.abs(y * u - (1.0 - tb)) / np.maximum(scale**2, 1.0)
        return np.maximum(res_x, res_y)

    res_h = direction_residual(u_h, v_h, x_h, y_h, t * b.h())
    res_v = direction_residual(u_v, v_v, x_v, y_v, t * b.v())
    residual = max(float(np.max(res_h)), float(np.max(res_v)))
    if residual > tol:
        if np.max(res_h) >= np.max(res_v):
            worst = np.unravel_index(np.argmax(res_h), res_h.shape)
            edge = ("h", int(worst[0]), int(worst[1]))
        else:
            worst = np.unravel_index(np.argmax(res_v), res_v.shape)
            edge = ("v", int(worst[0]), int(worst[1]))
        raise EntryMismatch(edge, residual)
    return RawConnection(
        grid=grid, b=b, t=float(t),
        u_h=u_h, v_h=v_h, x_h=x_h, y_h=y_h,
        u_v=u_v, v_v=v_v, x_v=x_v, y_v=y_v,
        entry_residual=residual,
    )


@dataclass(frozen=True)
class CompatibilityReport:
    """Per-face residuals of the three compatibility relations of W'."""

    single_equation: np.ndarray   # b_jk v_ij / v_jk - b_ij v_il / v_lk
    diagonal_product: np.ndarray  # u_ij u_jk - u_il u_lk
    off_diagonal: np.ndarray      # four-term off-diagonal flatness relation

    @property
    def max_residual(self) -> float:
        return max(
            float(np.max(self.single_equation)),
            float(np.max(self.diagonal_product)),
            float(np.max(self.off_diagonal)),
        )


def check_compatibility(raw: RawConnection) -> CompatibilityReport:
    """Evaluate the face relations that make W' a flat connection.

    For a genuine pair the factorized cross ratios reduce to the single
    equation b_jk v_ij / v_jk = b_ij v_il / v_lk, and the flatness of W'
    yields the product relation on u and a four-term relation mixing u and
    v; all three are returned as scale-relative per-face residuals.
    """
    b_ij = raw.b.h()
    b_jk = raw.b.v()
    v_ij = raw.v_h[:, :-1]
    v_lk = raw.v_h[:, 1:]
    v_jk = raw.v_v[1:, :]
    v_il = raw.v_v[:-1, :]
    u_ij = raw.u_h[:, :-1]
    u_lk = raw.u_h[:, 1:]
    u_jk = raw.u_v[1:, :]
    u_il = raw.u_v[:-1, :]
    t = raw.t

    term1 = b_jk * v_ij / v_jk
    term2 = b_ij * v_il / v_lk
    crv = np.abs(term1 - term2) / np.maximum(1.0, np.maximum(np.abs(term1), np.abs(term2)))

    prod1 = u_ij * u_jk
    prod2 = u_il * u_lk
    mc11 = np.abs(prod1 - prod2) / np.maximum(1.0, np.maximum(np.abs(prod1), np.abs(prod2)))

    lhs = v_ij * (1.0 - t * b_jk) / u_jk + v_jk * u_ij
    rhs = v_il * (1.0 - t * b_ij) / u_lk + v_lk * u_il
    mc12 = np.abs(lhs - rhs) / np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    return CompatibilityReport(single_equation=crv, diagonal_product=mc11, off_diagonal=mc12)


@dataclass(frozen=True)
class GaugeResult:
    """Per-vertex gauge with the closure defect of its difference equation."""

    w: np.ndarray
    closure_residual: float
    negative_branch: bool


def _sqrt_one_minus_tb(raw: RawConnection) -> tuple[np.ndarray, np.ndarray, bool]:
    arg_h = 1.0 - raw.t * raw.b.h()
    arg_v = 1.0 - raw.t * raw.b.v()
    negative = bool(np.any(arg_h < 0) or np.any(arg_v < 0))
    # Principal branch throughout; negative arguments are legitimate for
    # pairs outside the default real-branch range and are flagged upstream.
    return np.sqrt(arg_h.astype(complex)), np.sqrt(arg_v.astype(complex)), negative


def solve_gauge(raw: RawConnection, w_root: complex = 1.0, tol: float = TAU_ENTRY) -> GaugeResult:
    """Solve w_j = sqrt(1 - t b_ij) / u_ij * w_i from the root vertex.

    Propagation runs down the first column and then along rows; the
    recursion on the remaining edges must close (its integrability is
    equivalent to the diagonal product relation), and the worst relative
    defect raises NotIntegrable beyond tol.
    """
    if w_root == 0:
        raise ValueError("w_root must be nonzero")
    sq_h, sq_v, negative = _sqrt_one_minus_tb(raw)
    ratio_h = sq_h / raw.u_h
    ratio_v = sq_v / raw.u_v
    rows, cols = raw.grid.vertex_shape
    w = np.empty((rows, cols), dtype=complex)
    w[0, 0] = w_root
    for m in range(1, rows):
        w[m, 0] = ratio_h[m - 1, 0] * w[m - 1, 0]
    for n in range(1, cols):
        w[:, n] = ratio_v[:, n - 1] * w[:, n - 1]

    defect_h = np.abs(w[1:, :] - ratio_h * w[:-1, :]) / np.abs(w[1:, :])
    defect_v = np.abs(w[:, 1:] - ratio_v * w[:, :-1]) / np.abs(w[:, 1:])
    residual = max(float(np.max(defect_h)), float(np.max(defect_v)))
    if residual > tol:
        if np.max(defect_h) >= np.max(defect_v):
            worst = np.unravel_index(np.argmax(defect_h), defect_h.shape)
            edge = ("h", int(worst[0]), int(worst[1]))
        else:
            worst = np.unravel_index(np.argmax(defect_v), defect_v.shape)
            edge = ("v", int(worst[0]), int(worst[1]))
        raise NotIntegrable(edge, residual)
    return GaugeResult(w=w, closure_residual=residual, negative_branch=negative)


@dataclass(frozen=True)
class WeierstrassData:
    """Recovered holomorphic potential, parameter, and gauge."""

    hmap: HolomorphicMap
    t: float
    w: np.ndarray


def recover_potential(
    raw: RawConnection, w: np.ndarray, g_root: complex = 0.0, cr_tol: float = TAU_ENTRY
) -> WeierstrassData:
    """Integrate dg = v / (w_i w_j sqrt(1 - t b)) to the potential g.

    The form is closed for genuine pairs (NotClosed otherwise, via the
    integrator); the labelling of g is a = -b / (1 - t b), and the result
    must pass the holomorphicity validator (RegularityViolation when it has
    degenerate cross ratios or zero edges).
    """
    sq_h, sq_v, _ = _sqrt_one_minus_tb(raw)
    dg = EdgeForm(
        h=raw.v_h / (w[:-1, :] * w[1:, :] * sq_h),
        v=raw.v_v / (w[:, :-1] * w[:, 1:] * sq_v),
    )
    g = integrate_edge_form(raw.grid, dg, root_value=g_root)
    labelling = a_of(raw.b, raw.t)
    hmap = HolomorphicMap(raw.grid, labelling, g)
    report = hmap.validate()
    if not report.regular:
        raise RegularityViolation(
            f"recovered potential is irregular: {len(report.degenerate_faces)} degenerate faces, "
            f"{len(report.zero_edges)} zero edges"
        )
    if report.max_residual > cr_tol:
        raise RegularityViolation(
            f"recovered potential fails holomorphicity: residual {report.max_residual:.3e}"
        )
    return WeierstrassData(hmap=hmap, t=raw.t, w=w)


def invert_pair(
    pair: DarbouxPair,
    w_root: complex = 1.0,
    g_root: complex = 0.0,
    tol: float = TAU_ENTRY,
) -> WeierstrassData:
    """Full inverse construction: pair -> entries -> gauge -> potential."""
    fprime = normalize_lifts(pair)
    raw = connection_entries(fprime, pair.b, pair.t, tol=tol)
    gauge = solve_gauge(raw, w_root=w_root, tol=tol)
    return recover_potential(raw, gauge.w, g_root=g_root, cr_tol=tol)
