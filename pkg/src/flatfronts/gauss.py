"""Hyperbolic Gauss maps and Darboux pairs of projective nets.

The two columns h+ = F e+ and h- = F e- of an integrated frame are
homogeneous lifts of the ideal endpoints of the normal geodesics; their
Hermitian dyadic squares are the lightlike fields H+- = X +- N.  For a
front built from data (g, a, t) these projective nets obey two closed-form
cross-ratio laws,

    cr(h_i, h_j, h_k, h_l)       = (a_ij / (1 - t a_ij)) ((1 - t a_jk) / a_jk)
    cr(h+_i, h+_j, h-_j, h-_i)   = -t a_ij / (1 - t a_ij),

which characterize them as a Darboux pair with the factorizing labelling
b = -a / (1 - t a).  The propagation routine here generates such pairs
directly by solving the edge cross-ratio equation, independently of any
frame, which is what makes the inverse construction testable end to end.

Projective points are always carried as homogeneous C^2 lifts; no affine
chart is used, so the point at infinity needs no special casing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateQuad, DegenerateStep, Inconsistent
from .front import FlatFrontFamily, eval_front
from .grid import EdgeLabelling, QuadGrid
from .holo import EPS_DEG

TAU_PAIR = 1e-6


def det2v(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Determinant of the 2x2 matrix with columns p, q (batched over leading axes)."""
    p = np.asarray(p)
    q = np.asarray(q)
    return p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0]


def projective_cross_ratio(a, b, c, d):
    """Cross ratio of four points of the projective line given as C^2 lifts.

    Computed as (det[b,a] det[d,c]) / (det[c,b] det[a,d]); invariant under
    rescaling of each lift and under a common linear transformation, and it
    agrees with the affine cross ratio on lifts (z, 1).  Raises
    DegenerateQuad when det[c,b] or det[a,d] vanishes relative to the lift
    scales.
    """
    a, b, c, d = (np.asarray(v, dtype=complex) for v in (a, b, c, d))
    den1 = det2v(c, b)
    den2 = det2v(a, d)
    norm = lambda v: np.linalg.norm(v, axis=-1)
    if np.any(np.abs(den1) <= EPS_DEG * norm(c) * norm(b)) or np.any(
        np.abs(den2) <= EPS_DEG * norm(a) * norm(d)
    ):
        raise DegenerateQuad("projective cross-ratio denominator vanishes")
    result = (det2v(b, a) * det2v(d, c)) / (den1 * den2)
    return result[()] if result.ndim == 0 else result


def lift_affine(g: np.ndarray) -> np.ndarray:
    """Homogeneous lifts (z, 1) of an affine complex vertex function."""
    g = np.asarray(g, dtype=complex)
    out = np.empty(g.shape + (2,), dtype=complex)
    out[..., 0] = g
    out[..., 1] = 1.0
    return out


def pair_labelling(a: EdgeLabelling, t: float) -> EdgeLabelling:
    """The factorizing labelling b = -a / (1 - t a) of the Gauss-map pair.

    Requires 1 - t a != 0; together with the inverse this realizes the
    involution (1 - t a)(1 - t b) = 1.
    """
    return _rational_relabel(a, t)


def a_of(b: EdgeLabelling, t: float) -> EdgeLabelling:
    """Inverse of pair_labelling: a = -b / (1 - t b)."""
    return _rational_relabel(b, t)


def _rational_relabel(lab: EdgeLabelling, t: float) -> EdgeLabelling:
    from .errors import InvalidParameter

    for seq in (lab.alpha, lab.beta):
        if np.any(np.abs(1.0 - t * seq) <= EPS_DEG * np.maximum(1.0, np.abs(t * seq))):
            raise InvalidParameter("1 - t*label vanishes; relabelling undefined")
    return EdgeLabelling(-lab.alpha / (1.0 - t * lab.alpha), -lab.beta / (1.0 - t * lab.beta))


@dataclass(frozen=True)
class DarbouxPair:
    """Homogeneous lifts of two projective nets with their pair data.

    Both legs are holomorphic with the labelling b and corresponding edges
    have cross ratio t * b_ij; ``face_residuals`` records the two-path
    propagation defect when the pair was generated by propagation (None for
    pairs read from a frame or from disk).
    """

    grid: QuadGrid
    b: EdgeLabelling
    t: float
    hplus: np.ndarray
    hminus: np.ndarray
    face_residuals: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "hplus", np.asarray(self.hplus, dtype=complex))
        object.__setattr__(self, "hminus", np.asarray(self.hminus, dtype=complex))
        expected = self.grid.vertex_shape + (2,)
        if self.hplus.shape != expected or self.hminus.shape != expected:
            raise ValueError("lift arrays must have shape (rows, cols, 2)")
        self.b.check_grid(self.grid)


@dataclass(frozen=True)
class GaussMaps:
    """Frame columns and their dyadic squares, with the dyadic residual."""

    hplus: np.ndarray
    hminus: np.ndarray
    big_hplus: np.ndarray
    big_hminus: np.ndarray
    dyadic_residual: float


def gauss_maps(family: FlatFrontFamily) -> GaussMaps:
    """Extract h+- = F e+- and H+- = X +- N (at s = 0) from a front family.

    The identity h (h)* = H/2 ties the two descriptions together; its worst
    relative deviation is reported.
    """
    f = family.frame.f
    hplus = f[..., :, 0]
    hminus = f[..., :, 1]
    x, n = eval_front(family, 0.0)
    big_hplus = x + n
    big_hminus = x - n

    def dyadic_defect(h, big):
        outer = h[..., :, None] * np.conj(h[..., None, :])
        num = np.max(np.abs(outer - big / 2.0), axis=(-1, -2))
        den = np.maximum(np.max(np.abs(big), axis=(-1, -2)), 1.0)
        return float(np.max(num / den))

    residual = max(dyadic_defect(hplus, big_hplus), dyadic_defect(hminus, big_hminus))
    return GaussMaps(
        hplus=hplus,
        hminus=hminus,
        big_hplus=big_hplus,
        big_hminus=big_hminus,
        dyadic_residual=residual,
    )


def extract_pair(family: FlatFrontFamily) -> DarbouxPair:
    """The Darboux pair formed by the two Gauss maps of a front family."""
    maps = gauss_maps(family)
    return DarbouxPair(
        grid=family.grid,
        b=pair_labelling(family.hmap.labelling, family.t),
        t=family.t,
        hplus=maps.hplus,
        hminus=maps.hminus,
    )


def _face_cross_ratios(h: np.ndarray) -> np.ndarray:
    return projective_cross_ratio(h[:-1, :-1], h[1:, :-1], h[1:, 1:], h[:-1, 1:])


def _edge_cross_ratios(hp: np.ndarray, hm: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    cr_h = projective_cross_ratio(hp[:-1, :], hp[1:, :], hm[1:, :], hm[:-1, :])
    cr_v = projective_cross_ratio(hp[:, :-1], hp[:, 1:], hm[:, 1:], hm[:, :-1])
    return cr_h, cr_v


@dataclass(frozen=True)
class PairLawReport:
    """Residuals of the closed-form cross-ratio laws of a Gauss-map pair."""

    face_plus: np.ndarray
    face_minus: np.ndarray
    edge_h: np.ndarray
    edge_v: np.ndarray

    @property
    def max_residual(self) -> float:
        return max(
            float(np.max(self.face_plus)),
            float(np.max(self.face_minus)),
            float(np.max(self.edge_h)),
            float(np.max(self.edge_v)),
        )


def _pair_law_report(face_plus, face_minus, edge_h, edge_v, a: EdgeLabelling, t: float) -> PairLawReport:
    one_minus_h = 1.0 - t * a.h()
    one_minus_v = 1.0 - t * a.v()
    expected_face = (a.h() / one_minus_h) * (one_minus_v / a.v())
    expected_edge_h = -t * a.h() / one_minus_h
    expected_edge_v = -t * a.v() / one_minus_v

    def rel(measured, expected):
        return np.abs(measured - expected) / np.maximum(1.0, np.abs(expected))

    return PairLawReport(
        face_plus=rel(face_plus, expected_face),
        face_minus=rel(face_minus, expected_face),
        edge_h=rel(edge_h, expected_edge_h),
        edge_v=rel(edge_v, expected_edge_v),
    )


def verify_pair_cross_ratios(pair: DarbouxPair, a: EdgeLabelling, t: float) -> PairLawReport:
    """Compare measured cross ratios against their closed forms in (a, t).

    Faces of either leg must have cross ratio
    (a_ij/(1-t a_ij)) ((1-t a_jk)/a_jk) and corresponding edges
    -t a_ij / (1-t a_ij); residuals are relative to max(1, |expected|).
    """
    cr_h, cr_v = _edge_cross_ratios(pair.hplus, pair.hminus)
    return _pair_law_report(
        _face_cross_ratios(pair.hplus),
        _face_cross_ratios(pair.hminus),
        cr_h,
        cr_v,
        a,
        t,
    )


def front_pair_laws(family: FlatFrontFamily) -> PairLawReport:
    """Cross-ratio laws of the Gauss-map pair, measured in local gauge.

    All four points of every quadruple are written in the frame of the
    first vertex, where they reduce to columns of transition-matrix
    products with entries of local size; the cross ratio is invariant under
    that common frame factor.  This keeps the measurement meaningful on
    large grids, where the global frame columns cluster projectively.
    """
    conn = family.connection
    lab = family.hmap.labelling
    e_p = np.array([1.0, 0.0], dtype=complex)
    e_m = np.array([0.0, 1.0], dtype=complex)

    def edge_measured(w):
        b = w[..., :, 0]
        c = w[..., :, 1]
        shape = b.shape
        return projective_cross_ratio(
            np.broadcast_to(e_p, shape), b, c, np.broadcast_to(e_m, shape)
        )

    l_j = conn.w_h[:, :-1]
    l_k = l_j @ conn.w_v[1:, :]
    l_l = conn.w_v[:-1, :]

    def face_measured(col, e):
        shape = l_j[..., :, col].shape
        return projective_cross_ratio(
            np.broadcast_to(e, shape), l_j[..., :, col], l_k[..., :, col], l_l[..., :, col]
        )

    return _pair_law_report(
        face_measured(0, e_p),
        face_measured(1, e_m),
        edge_measured(conn.w_h),
        edge_measured(conn.w_v),
        lab,
        family.t,
    )


def validate_projective(h: np.ndarray, labelling: EdgeLabelling) -> np.ndarray:
    """Residual of the factorized cross-ratio condition for a projective net."""
    cr = _face_cross_ratios(h)
    return np.abs(cr * labelling.v() - labelling.h())


def _normalize_lift(v: np.ndarray) -> np.ndarray:
    return v / np.max(np.abs(v))


def _propagate_step(hp_i, hp_j, hm_i, q):
    """Unique projective solution h-_j of cr(h+_i, h+_j, h-_j, h-_i) = q."""
    beta = det2v(hp_j, hp_i)
    delta = det2v(hp_i, hm_i)
    cand = beta * hm_i + q * delta * hp_j
    size = np.max(np.abs(cand))
    if size <= EPS_DEG * max(np.max(np.abs(hm_i)), np.max(np.abs(hp_j))):
        raise DegenerateStep("propagation step collapses to the zero lift")
    cand = cand / size
    if np.abs(det2v(cand, hp_j)) <= EPS_DEG * np.max(np.abs(hp_j)):
        raise DegenerateStep("propagated point collides with the first leg")
    return cand


def darboux_propagate(
    hplus: np.ndarray,
    b: EdgeLabelling,
    t: float,
    seed: np.ndarray,
    tol: float = TAU_PAIR,
) -> DarbouxPair:
    """Propagate the second leg of a Darboux pair from a seed point.

    ``hplus`` holds homogeneous lifts of a holomorphic projective net with
    labelling b; the edge equation cr(h+_i, h+_j, h-_j, h-_i) = t b_ij has a
    unique projective solution for h-_j, which is propagated down the first
    column and then along rows, renormalizing each lift to max-component
    modulus 1.  Face consistency is a theorem for exact data but is checked
    here, not assumed: for every face the two propagation paths i->j->k and
    i->l->k are compared projectively and the worst defect raises
    Inconsistent.  The cross-ratio values t b must stay away from {0, 1}
    (DegenerateStep otherwise), and the seed must differ from the first leg
    at the root.
    """
    hplus = np.asarray(hplus, dtype=complex)
    rows, cols = hplus.shape[:2]
    grid = QuadGrid(rows, cols)
    b.check_grid(grid)
    tb_h = t * b.alpha
    tb_v = t * b.beta
    for tb in (tb_h, tb_v):
        if np.any(np.abs(tb) <= EPS_DEG) or np.any(np.abs(tb - 1.0) <= EPS_DEG):
            raise DegenerateStep("edge cross ratio t*b hits the excluded set {0, 1}")

    seed = np.asarray(seed, dtype=complex)
    if np.abs(det2v(seed, hplus[0, 0])) <= EPS_DEG * np.max(np.abs(seed)) * np.max(
        np.abs(hplus[0, 0])
    ):
        raise DegenerateStep("seed coincides with the first leg at the root")

    hminus = np.empty_like(hplus)
    hminus[0, 0] = _normalize_lift(seed)
    for m in range(1, rows):
        hminus[m, 0] = _propagate_step(hplus[m - 1, 0], hplus[m, 0], hminus[m - 1, 0], tb_h[m - 1])
    for n in range(1, cols):
        for m in range(rows):
            hminus[m, n] = _propagate_step(hplus[m, n - 1], hplus[m, n], hminus[m, n - 1], tb_v[n - 1])

    residuals = np.empty(grid.face_shape)
    for m in range(rows - 1):
        for n in range(cols - 1):
            via_j = _propagate_step(hplus[m, n], hplus[m + 1, n], hminus[m, n], tb_h[m])
            via_j = _propagate_step(hplus[m + 1, n], hplus[m + 1, n + 1], via_j, tb_v[n])
            via_l = _propagate_step(hplus[m, n], hplus[m, n + 1], hminus[m, n], tb_v[n])
            via_l = _propagate_step(hplus[m, n + 1], hplus[m + 1, n + 1], via_l, tb_h[m])
            residuals[m, n] = np.abs(det2v(via_j, via_l)) / (
                np.linalg.norm(via_j) * np.linalg.norm(via_l)
            )
    worst = np.unravel_index(np.argmax(residuals), residuals.shape)
    if residuals[worst] > tol:
        raise Inconsistent((int(worst[0]), int(worst[1])), float(residuals[worst]))
    return DarbouxPair(
        grid=grid, b=b, t=float(t), hplus=hplus, hminus=hminus, face_residuals=residuals
    )
