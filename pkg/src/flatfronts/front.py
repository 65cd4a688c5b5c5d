"""Evaluation and verification of the surface family (X, N).

From an integrated frame F the one-parameter family of parallel surfaces is

    X(s) = F (E0 cosh s + E3 sinh s) F*,   N(s) = F (E0 sinh s + E3 cosh s) F*,

with X on the unit hyperboloid (det X = 1, tr X > 0) and N its unit normal
in the de Sitter sphere (det N = -1).  The checks in this module verify the
geometry edge by edge and face by face: the Rodrigues equation and
reflection propagation on edges, concircularity and the mixed-area Gauss
curvature on faces, and the light-cone lifts with their shared curvature
spheres.

Frames grow exponentially across the grid, so face and edge checks on the
globally evaluated front would drown in cancellation noise far from the
root.  All per-cell checks therefore come in two flavours: coordinate-level
functions that act on given (X, N) fields, and ``front_*`` functions that
evaluate the same quantities in the local gauge of each cell, conjugating
by the corner frame so that every input is built from transition matrices
alone.  Both agree on well-conditioned data; validation uses the local
forms.  In the local gauge the two lightlike fields H+- = X +- N are
computed directly as column dyads 2 e^{+-s} (L e+-)(L e+-)*, never by the
cancellation-prone sum X +- N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoIntersection, NotUnitSpacelike, SingularEdge
from .frame import (
    EdgeConnection,
    SL2Frame,
    adjoint,
    build_connection,
    det2,
    integrate_frame,
    inv2,
    minkowski,
    pauli_unpack,
    sl2_act,
)
from .grid import QuadGrid
from .holo import EPS_DEG, HolomorphicMap

TAU_GEO = 1e-9
#: An edge or face is singular when its chord is below this factor times the
#: local scale.
TAU_SING_FACTOR = 1e-8


@dataclass(frozen=True)
class FlatFrontFamily:
    """Holomorphic data, parameter, connection, and integrated frame."""

    hmap: HolomorphicMap
    t: float
    connection: EdgeConnection
    frame: SL2Frame

    @property
    def grid(self) -> QuadGrid:
        return self.hmap.grid


def build_front(
    hmap: HolomorphicMap,
    t: float,
    f_root: np.ndarray | None = None,
    allow_complex: bool = False,
    flat_tol: float | None = None,
) -> FlatFrontFamily:
    """Connection, flatness gate, and frame integration in one step."""
    conn = build_connection(hmap, t, allow_complex=allow_complex)
    kwargs = {} if flat_tol is None else {"tol": flat_tol}
    frame = integrate_frame(conn, f_root=f_root, **kwargs)
    return FlatFrontFamily(hmap=hmap, t=t, connection=conn, frame=frame)


def _cs_matrices(s: float) -> tuple[np.ndarray, np.ndarray]:
    es = np.exp(s)
    c = np.array([[es, 0.0], [0.0, 1.0 / es]], dtype=complex)
    d = np.array([[es, 0.0], [0.0, -1.0 / es]], dtype=complex)
    return c, d


def front_from_frame(f: np.ndarray, s: float) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate (X, N) at family parameter s from a raw frame array."""
    c, d = _cs_matrices(s)
    return sl2_act(f, c), sl2_act(f, d)


def eval_front(family: FlatFrontFamily, s: float) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian point and normal fields of the family member at s."""
    return front_from_frame(family.frame.f, s)


def eval_front_coords(family: FlatFrontFamily, s: float) -> tuple[np.ndarray, np.ndarray]:
    """Minkowski coordinates of (X, N) at s, each of shape (rows, cols, 4)."""
    x, n = eval_front(family, s)
    return pauli_unpack(x, check=False), pauli_unpack(n, check=False)


def _edge_diffs(field: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return field[1:, :] - field[:-1, :], field[:, 1:] - field[:, :-1]


def _vertex_scale(coords: np.ndarray) -> np.ndarray:
    return np.maximum(np.linalg.norm(coords, axis=-1), 1.0)


def _dyad_coords(v: np.ndarray) -> np.ndarray:
    """Pauli coordinates of the Hermitian dyad v v* for C^2 vectors v."""
    v = np.asarray(v, dtype=complex)
    m00 = np.abs(v[..., 0]) ** 2
    m11 = np.abs(v[..., 1]) ** 2
    m10 = v[..., 1] * np.conj(v[..., 0])
    out = np.empty(v.shape[:-1] + (4,))
    out[..., 0] = (m00 + m11) / 2
    out[..., 3] = (m00 - m11) / 2
    out[..., 1] = m10.real
    out[..., 2] = m10.imag
    return out


# ---------------------------------------------------------------------------
# Local-gauge evaluation


@dataclass(frozen=True)
class LocalEdges:
    """Per-edge fields in the gauge of the edge's base vertex.

    For one direction, ``x_i``/``n_i`` broadcast over the edge array while
    ``x_j``/``n_j`` vary; ``hp``/``hm`` hold the lightlike fields at both
    endpoints, computed as column dyads, and ``y`` is the edge mirror in the
    same gauge.  ``w`` is the transition matrix.
    """

    x_i: np.ndarray
    n_i: np.ndarray
    x_j: np.ndarray
    n_j: np.ndarray
    hp_i: np.ndarray
    hm_i: np.ndarray
    hp_j: np.ndarray
    hm_j: np.ndarray
    y: np.ndarray
    w: np.ndarray


def _direction_local(w: np.ndarray, y: np.ndarray, s: float) -> LocalEdges:
    c, d = _cs_matrices(s)
    es = np.exp(s)
    shape = w.shape[:-2]
    ident = np.broadcast_to(np.eye(2, dtype=complex), w.shape)
    x_i = np.broadcast_to(pauli_unpack(c, check=False), shape + (4,))
    n_i = np.broadcast_to(pauli_unpack(d, check=False), shape + (4,))
    x_j = pauli_unpack(w @ c @ adjoint(w), check=False)
    n_j = pauli_unpack(w @ d @ adjoint(w), check=False)
    hp_i = 2 * es * _dyad_coords(ident[..., :, 0])
    hm_i = 2 / es * _dyad_coords(ident[..., :, 1])
    hp_j = 2 * es * _dyad_coords(w[..., :, 0])
    hm_j = 2 / es * _dyad_coords(w[..., :, 1])
    return LocalEdges(
        x_i=x_i, n_i=n_i, x_j=x_j, n_j=n_j,
        hp_i=hp_i, hm_i=hm_i, hp_j=hp_j, hm_j=hm_j,
        y=pauli_unpack(y, check=False), w=w,
    )


def local_edges(family: FlatFrontFamily, s: float) -> tuple[LocalEdges, LocalEdges]:
    """Locally gauged edge data for the horizontal and vertical families."""
    conn = family.connection
    dg = family.hmap.dg()
    lab = family.hmap.labelling
    y_h = edge_mirror(dg.h, lab.h(), family.t)
    y_v = edge_mirror(dg.v, lab.v(), family.t)
    return (
        _direction_local(conn.w_h, y_h, s),
        _direction_local(conn.w_v, y_v, s),
    )


@dataclass(frozen=True)
class LocalFaces:
    """Per-face corner fields in the gauge of the face's first corner.

    Arrays have shape (rows-1, cols-1, 4, 4): per face, the corners in the
    order (i, j, k, l), each a Minkowski coordinate vector.
    """

    x: np.ndarray
    n: np.ndarray
    hp: np.ndarray
    hm: np.ndarray


def local_faces(family: FlatFrontFamily, s: float) -> LocalFaces:
    conn = family.connection
    c, d = _cs_matrices(s)
    es = np.exp(s)
    l_j = conn.w_h[:, :-1]
    l_k = l_j @ conn.w_v[1:, :]
    l_l = conn.w_v[:-1, :]
    l_i = np.broadcast_to(np.eye(2, dtype=complex), l_j.shape)
    corners = np.stack([l_i, l_j, l_k, l_l], axis=2)  # (F1, F2, 4, 2, 2)
    x = pauli_unpack(corners @ c @ adjoint(corners), check=False)
    n = pauli_unpack(corners @ d @ adjoint(corners), check=False)
    hp = 2 * es * _dyad_coords(corners[..., :, 0])
    hm = 2 / es * _dyad_coords(corners[..., :, 1])
    return LocalFaces(x=x, n=n, hp=hp, hm=hm)


# ---------------------------------------------------------------------------
# Rodrigues equation


@dataclass(frozen=True)
class RodriguesReport:
    """Per-edge principal curvatures and fit residuals of dN + k dX = 0."""

    k_h: np.ndarray
    k_v: np.ndarray
    residual_h: np.ndarray
    residual_v: np.ndarray
    singular_h: np.ndarray
    singular_v: np.ndarray
    max_residual: float
    symmetry_residual: float
    closed_form_residual: float


def _rodrigues_fit(dx, dn, scale, tau_sing, strict):
    norm_dx = np.linalg.norm(dx, axis=-1)
    singular = norm_dx < tau_sing * scale
    if strict and singular.any():
        edge = tuple(map(int, np.argwhere(singular)[0]))
        raise SingularEdge(f"edge {edge} has vanishing point difference")
    safe = np.where(singular, 1.0, norm_dx)
    k = -np.sum(dn * dx, axis=-1) / safe**2
    residual = np.linalg.norm(dn + k[..., None] * dx, axis=-1) / safe
    return k, residual, singular


def _closed_form_k(dx, dn, r):
    den = minkowski(dx, r)
    den = np.where(np.abs(den) < 1e-300, 1.0, den)
    return -minkowski(dn, r) / den


def rodrigues_check(
    x_coords: np.ndarray,
    n_coords: np.ndarray,
    reflections: tuple[np.ndarray, np.ndarray] | None = None,
    tau_sing: float = TAU_SING_FACTOR,
    strict: bool = False,
) -> RodriguesReport:
    """Fit the edge Rodrigues equation dN + k dX = 0 over given fields.

    ``reflections`` may supply per-edge mirror coordinates; then the closed
    form -(dN,R)/(dX,R) is cross-checked against the least-squares value.
    Singular edges (chord below tau_sing times the local scale) are masked,
    or raise SingularEdge with ``strict``.
    """
    dx_h, dx_v = _edge_diffs(x_coords)
    dn_h, dn_v = _edge_diffs(n_coords)
    scale = _vertex_scale(x_coords)
    scale_h = np.maximum(scale[1:, :], scale[:-1, :])
    scale_v = np.maximum(scale[:, 1:], scale[:, :-1])
    k_h, res_h, sing_h = _rodrigues_fit(dx_h, dn_h, scale_h, tau_sing, strict)
    k_v, res_v, sing_v = _rodrigues_fit(dx_v, dn_v, scale_v, tau_sing, strict)
    cf = np.nan
    if reflections is not None:
        r_h, r_v = reflections
        cf = 0.0
        for k, dx, dn, r, sing in ((k_h, dx_h, dn_h, r_h, sing_h), (k_v, dx_v, dn_v, r_v, sing_v)):
            rel = np.abs(_closed_form_k(dx, dn, r) - k) / np.maximum(1.0, np.abs(k))
            cf = max(cf, float(np.max(np.where(sing, 0.0, rel))))
    finite = np.concatenate([res_h[~sing_h].ravel(), res_v[~sing_v].ravel()])
    k_h = np.where(sing_h, np.nan, k_h)
    k_v = np.where(sing_v, np.nan, k_v)
    return RodriguesReport(
        k_h=k_h,
        k_v=k_v,
        residual_h=np.where(sing_h, np.nan, res_h),
        residual_v=np.where(sing_v, np.nan, res_v),
        singular_h=sing_h,
        singular_v=sing_v,
        max_residual=float(np.max(finite)) if finite.size else 0.0,
        symmetry_residual=0.0,
        closed_form_residual=cf,
    )


def front_rodrigues(
    family: FlatFrontFamily, s: float = 0.0, tau_sing: float = TAU_SING_FACTOR
) -> RodriguesReport:
    """Rodrigues fit in local gauge, with both-orientation symmetry check.

    The principal curvature is a gauge invariant, so evaluating the edge in
    the base gauge of either endpoint must give the same value; the reversed
    orientation is computed from the inverse transition matrix, making the
    k_ij = k_ji check a genuine floating-point comparison.
    """
    loc_h, loc_v = local_edges(family, s)

    c, d = _cs_matrices(s)

    def per_direction(loc):
        dx = loc.x_j - loc.x_i
        dn = loc.n_j - loc.n_i
        scale = np.maximum(_vertex_scale(loc.x_i), _vertex_scale(loc.x_j))
        k, res, sing = _rodrigues_fit(dx, dn, scale, tau_sing, strict=False)
        cf = np.abs(_closed_form_k(dx, dn, loc.y) - k) / np.maximum(1.0, np.abs(k))
        # Reversed orientation: base the gauge at j instead of i.
        winv = inv2(loc.w)
        dx_r = pauli_unpack(winv @ c @ adjoint(winv), check=False) - loc.x_i
        dn_r = pauli_unpack(winv @ d @ adjoint(winv), check=False) - loc.n_i
        k_r, _, _ = _rodrigues_fit(dx_r, dn_r, scale, tau_sing, strict=False)
        sym = np.abs(k - k_r) / np.maximum(1.0, np.abs(k))
        return k, res, sing, float(np.max(np.where(sing, 0.0, cf))), float(
            np.max(np.where(sing, 0.0, sym))
        )

    k_h, res_h, sing_h, cf_h, sym_h = per_direction(loc_h)
    k_v, res_v, sing_v, cf_v, sym_v = per_direction(loc_v)
    finite = np.concatenate([res_h[~sing_h].ravel(), res_v[~sing_v].ravel()])
    return RodriguesReport(
        k_h=np.where(sing_h, np.nan, k_h),
        k_v=np.where(sing_v, np.nan, k_v),
        residual_h=np.where(sing_h, np.nan, res_h),
        residual_v=np.where(sing_v, np.nan, res_v),
        singular_h=sing_h,
        singular_v=sing_v,
        max_residual=float(np.max(finite)) if finite.size else 0.0,
        symmetry_residual=max(sym_h, sym_v),
        closed_form_residual=max(cf_h, cf_v),
    )


# ---------------------------------------------------------------------------
# Reflections


def edge_mirror(dg: np.ndarray, labels: np.ndarray, t: float) -> np.ndarray:
    """Hermitian mirror Y = [[|dg|^2, dg], [conj dg, t a]] / (|dg| sqrt(1 - t a))."""
    dg = np.asarray(dg, dtype=complex)
    mod = np.abs(dg)
    bad = mod <= EPS_DEG * max(1.0, float(np.max(mod)) if mod.size else 0.0)
    if np.any(bad):
        edge = tuple(map(int, np.argwhere(np.atleast_1d(bad))[0]))
        raise SingularEdge(f"zero edge derivative at {edge}")
    y = np.empty(dg.shape + (2, 2), dtype=complex)
    y[..., 0, 0] = mod**2
    y[..., 0, 1] = dg
    y[..., 1, 0] = np.conj(dg)
    y[..., 1, 1] = t * labels
    return y / (mod * np.sqrt(1.0 - t * labels))[..., None, None]


def reflection_vectors(family: FlatFrontFamily) -> tuple[np.ndarray, np.ndarray]:
    """Unit spacelike mirrors R_ij = F_i Y_ij F_i* on all canonical edges."""
    dg = family.hmap.dg()
    lab = family.hmap.labelling
    f = family.frame.f
    y_h = edge_mirror(dg.h, lab.h(), family.t)
    y_v = edge_mirror(dg.v, lab.v(), family.t)
    return sl2_act(f[:-1, :], y_h), sl2_act(f[:, :-1], y_v)


def reflect(x: np.ndarray, r: np.ndarray, tol: float = TAU_GEO) -> np.ndarray:
    """Reflection X - 2 R (R, X) in the mirror hyperplane orthogonal to R.

    R must be unit spacelike, -det R = 1 relative to its own scale
    (NotUnitSpacelike otherwise); (.,.) is the polarization of -det.
    """
    r = np.asarray(r, dtype=complex)
    scale2 = np.maximum(1.0, np.max(np.abs(r), axis=(-1, -2)) ** 2)
    dev = np.abs(-det2(r) - 1.0)
    if np.any(dev > tol * scale2):
        raise NotUnitSpacelike(f"-det R deviates from 1 by {float(np.max(dev)):.3e}")
    rc = pauli_unpack(r, check=False)
    xc = pauli_unpack(np.asarray(x, dtype=complex), check=False)
    return x - 2.0 * minkowski(rc, xc)[..., None, None] * r


@dataclass(frozen=True)
class PropagationReport:
    """Relative defects of transporting X and N across edges by reflection."""

    x_h: np.ndarray
    x_v: np.ndarray
    n_h: np.ndarray
    n_v: np.ndarray

    @property
    def max_residual(self) -> float:
        return max(float(np.max(a)) for a in (self.x_h, self.x_v, self.n_h, self.n_v))


def propagation_check(family: FlatFrontFamily, s: float = 0.0) -> PropagationReport:
    """Check X_j = X_i - 2 R_ij (R_ij, X_i) and likewise for N, on all edges.

    Evaluated in the local gauge of each edge, where the identity reads
    W C W* = C - 2 Y (Y, C); residuals are relative to the local scale.
    """
    loc_h, loc_v = local_edges(family, s)

    def defect(loc, target, source):
        reflected = source - 2.0 * minkowski(loc.y, source)[..., None] * loc.y
        num = np.linalg.norm(reflected - target, axis=-1)
        den = np.maximum(np.linalg.norm(target, axis=-1), 1.0)
        return num / den

    return PropagationReport(
        x_h=defect(loc_h, loc_h.x_j, loc_h.x_i),
        x_v=defect(loc_v, loc_v.x_j, loc_v.x_i),
        n_h=defect(loc_h, loc_h.n_j, loc_h.n_i),
        n_v=defect(loc_v, loc_v.n_j, loc_v.n_i),
    )


def collinearity_check(family: FlatFrontFamily, s: float = 0.0) -> float:
    """Worst defect of the edge mirrors spanning the same line as dH+-.

    Both dH+_ij and dH-_ij are real multiples of the mirror; evaluated in
    local gauge, the residual per edge is the relative misfit of the
    least-squares multiple.
    """
    loc_h, loc_v = local_edges(family, s)
    worst = 0.0
    for loc in (loc_h, loc_v):
        for diff in (loc.hp_j - loc.hp_i, loc.hm_j - loc.hm_i):
            r = loc.y
            lam = np.sum(diff * r, axis=-1) / np.maximum(np.sum(r * r, axis=-1), 1e-300)
            misfit = np.linalg.norm(diff - lam[..., None] * r, axis=-1)
            norm = np.maximum(np.linalg.norm(diff, axis=-1), 1e-300)
            worst = max(worst, float(np.max(misfit / norm)))
    return worst


# ---------------------------------------------------------------------------
# Mixed area and curvature


_WEDGE_PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def wedge4(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Exterior product of two 4-vectors as 6 components, index pairs
    {01, 02, 03, 12, 13, 23}."""
    u = np.asarray(u)
    v = np.asarray(v)
    comps = [u[..., a] * v[..., b] - u[..., b] * v[..., a] for a, b in _WEDGE_PAIRS]
    return np.stack(comps, axis=-1)


def mixed_area_corners(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Mixed area of per-face corner stacks (..., 4 corners, 4 coords)."""
    p = np.asarray(p)
    q = np.asarray(q)
    dp_ik = p[..., 2, :] - p[..., 0, :]
    dp_jl = p[..., 3, :] - p[..., 1, :]
    dq_ik = q[..., 2, :] - q[..., 0, :]
    dq_jl = q[..., 3, :] - q[..., 1, :]
    return 0.25 * (wedge4(dp_ik, dq_jl) + wedge4(dq_ik, dp_jl))


def _face_corners(field: np.ndarray) -> np.ndarray:
    return np.stack(
        [field[:-1, :-1], field[1:, :-1], field[1:, 1:], field[:-1, 1:]], axis=2
    )


def mixed_area(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Bivector-valued mixed area per face of two vertex fields in R^{3,1}.

    Symmetric bilinear form with quadratic form A(P,P) = 1/2 dP_ik ^ dP_jl
    on the face diagonals; the mixed value is obtained by polarization.
    """
    return mixed_area_corners(_face_corners(np.asarray(p)), _face_corners(np.asarray(q)))


@dataclass(frozen=True)
class CurvatureReport:
    """Mixed areas, Gauss curvature, and parallelism residuals per face."""

    a_xx: np.ndarray
    a_nn: np.ndarray
    a_hh: np.ndarray
    k: np.ndarray
    singular: np.ndarray
    scale2: np.ndarray
    wedge_residual: np.ndarray
    proportionality_residual: np.ndarray
    identity_residual: float

    @property
    def max_a_hh(self) -> float:
        """Worst ||A(H+,H-)|| relative to the squared face scale."""
        return float(np.max(np.linalg.norm(self.a_hh, axis=-1) / self.scale2))

    @property
    def max_k_deviation(self) -> float:
        """Worst |K - 1| over non-singular faces."""
        vals = np.abs(self.k[~self.singular] - 1.0)
        return float(np.max(vals)) if vals.size else 0.0


def curvature_from_corners(
    x: np.ndarray,
    n: np.ndarray,
    hp: np.ndarray | None = None,
    hm: np.ndarray | None = None,
    tau_sing: float = TAU_SING_FACTOR,
) -> CurvatureReport:
    hp = x + n if hp is None else hp
    hm = x - n if hm is None else hm
    a_xx = mixed_area_corners(x, x)
    a_nn = mixed_area_corners(n, n)
    a_hh = mixed_area_corners(hp, hm)

    scale2 = np.maximum(np.max(np.linalg.norm(x, axis=-1), axis=-1), 1.0) ** 2
    norm_axx = np.linalg.norm(a_xx, axis=-1)
    singular = norm_axx < tau_sing * scale2
    safe = np.where(singular, 1.0, norm_axx)
    k = 1.0 - np.sum(a_hh * a_xx, axis=-1) / safe**2
    k = np.where(singular, np.nan, k)

    dhp_ik = hp[..., 2, :] - hp[..., 0, :]
    dhm_jl = hm[..., 3, :] - hm[..., 1, :]
    wedge = np.linalg.norm(wedge4(dhp_ik, dhm_jl), axis=-1)
    den = np.maximum(np.linalg.norm(dhp_ik, axis=-1) * np.linalg.norm(dhm_jl, axis=-1), 1e-300)
    wedge_residual = wedge / den

    prop = np.linalg.norm(a_hh - np.where(singular, 0.0, 1.0 - k)[..., None] * a_xx, axis=-1)
    proportionality_residual = np.where(singular, np.nan, prop / scale2)
    identity_residual = float(np.max(np.linalg.norm(a_hh - (a_xx - a_nn), axis=-1) / scale2))
    return CurvatureReport(
        a_xx=a_xx,
        a_nn=a_nn,
        a_hh=a_hh,
        k=k,
        singular=singular,
        scale2=scale2,
        wedge_residual=wedge_residual,
        proportionality_residual=proportionality_residual,
        identity_residual=identity_residual,
    )


def gauss_curvature(
    x_coords: np.ndarray, n_coords: np.ndarray, tau_sing: float = TAU_SING_FACTOR
) -> CurvatureReport:
    """Mixed-area Gauss curvature K from A(H+,H-) = A(X,X) (1 - K).

    H+- = X +- N are the two ideal endpoints of the normal geodesics.  K is
    extracted with the Euclidean pairing on bivector components, which is
    legitimate because A(H+,H-) is parallel to A(X,X); faces where
    ||A(X,X)|| falls below tau_sing times the squared face scale are flagged
    singular and get K = nan instead of a meaningless quotient.
    """
    return curvature_from_corners(
        _face_corners(np.asarray(x_coords)), _face_corners(np.asarray(n_coords)), tau_sing=tau_sing
    )


def front_curvature(
    family: FlatFrontFamily, s: float = 0.0, tau_sing: float = TAU_SING_FACTOR
) -> CurvatureReport:
    """Gauss curvature report in local gauge, with dyadic H+- fields."""
    loc = local_faces(family, s)
    return curvature_from_corners(loc.x, loc.n, hp=loc.hp, hm=loc.hm, tau_sing=tau_sing)


# ---------------------------------------------------------------------------
# Lie lifts and curvature spheres


def lie_lift(x_coords: np.ndarray, n_coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Light-cone lifts in R^{4,2}: x = X - q and n = N + p.

    Coordinates are ordered (x0, x1, x2, x3, p, q) with inner product
    Minkowski part - p p' + q q'; both lifts are null and mutually
    orthogonal for a valid front.
    """
    x_coords = np.asarray(x_coords)
    n_coords = np.asarray(n_coords)
    shape = x_coords.shape[:-1]
    x6 = np.zeros(shape + (6,))
    n6 = np.zeros(shape + (6,))
    x6[..., :4] = x_coords
    x6[..., 5] = -1.0
    n6[..., :4] = n_coords
    n6[..., 4] = 1.0
    return x6, n6


def lie_product(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Inner product of signature (4,2) on (x0,x1,x2,x3,p,q) coordinates."""
    u = np.asarray(u)
    v = np.asarray(v)
    return (
        -u[..., 0] * v[..., 0]
        + np.sum(u[..., 1:4] * v[..., 1:4], axis=-1)
        - u[..., 4] * v[..., 4]
        + u[..., 5] * v[..., 5]
    )


def curvature_sphere(
    x_i: np.ndarray,
    n_i: np.ndarray,
    x_j: np.ndarray,
    n_j: np.ndarray,
    tol: float = TAU_GEO,
) -> tuple[np.ndarray, float]:
    """Common sphere of two adjacent contact elements, up to scale.

    The two null 2-planes span{x_i,n_i} and span{x_j,n_j} intersect in a
    line exactly when the four lifts span a 3-dimensional space; the
    intersection is found as the nullspace of the 6x4 coefficient system.
    Returns (kappa, residual) with kappa normalized so its x_i-coefficient
    is 1 when that coefficient is not negligible.  Raises NoIntersection
    when the combined span has rank 4 (generic position) or rank <= 2 (the
    contact elements coincide; the intersection is not a single sphere).
    """
    mat = np.stack([x_i, n_i, -np.asarray(x_j), -np.asarray(n_j)], axis=-1)
    _, svals, vt = np.linalg.svd(mat)
    s0 = max(float(svals[0]), 1e-300)
    if float(svals[2]) <= tol * s0:
        raise NoIntersection("contact elements coincide; intersection is a whole pencil")
    if float(svals[3]) > tol * s0:
        raise NoIntersection(f"combined rank 4: residual {float(svals[3]) / s0:.3e}")
    coeff = vt[-1]
    kappa = coeff[0] * np.asarray(x_i) + coeff[1] * np.asarray(n_i)
    if abs(coeff[0]) > 1e-8 * np.linalg.norm(coeff[:2]):
        kappa = kappa / coeff[0]
    elif abs(coeff[1]) > 0:
        kappa = kappa / coeff[1]
    return kappa, float(svals[3]) / s0


@dataclass(frozen=True)
class SphereReport:
    """Existence residuals of edge curvature spheres, both edge families."""

    rank_residual_h: np.ndarray
    rank_residual_v: np.ndarray
    null_residual_h: np.ndarray
    null_residual_v: np.ndarray

    @property
    def max_rank_residual(self) -> float:
        return max(float(np.max(self.rank_residual_h)), float(np.max(self.rank_residual_v)))


def _sphere_residuals(xi, ni, xj, nj):
    mat = np.stack([xi, ni, -xj, -nj], axis=-1)
    svals = np.linalg.svd(mat, compute_uv=False)
    s0 = np.maximum(svals[..., 0], 1e-300)
    return svals[..., 3] / s0, svals[..., 2] / s0


def curvature_spheres(x6: np.ndarray, n6: np.ndarray) -> SphereReport:
    """Batched rank-3 test for all edges; residuals are s3/s0 and s2/s0."""
    rank_h, null_h = _sphere_residuals(x6[:-1, :], n6[:-1, :], x6[1:, :], n6[1:, :])
    rank_v, null_v = _sphere_residuals(x6[:, :-1], n6[:, :-1], x6[:, 1:], n6[:, 1:])
    return SphereReport(
        rank_residual_h=rank_h,
        rank_residual_v=rank_v,
        null_residual_h=null_h,
        null_residual_v=null_v,
    )


def front_spheres(family: FlatFrontFamily, s: float = 0.0) -> SphereReport:
    """Curvature-sphere existence test on locally gauged edge lifts."""
    loc_h, loc_v = local_edges(family, s)

    def lifts(loc):
        xi, ni = lie_lift(loc.x_i, loc.n_i)
        xj, nj = lie_lift(loc.x_j, loc.n_j)
        return _sphere_residuals(xi, ni, xj, nj)

    rank_h, null_h = lifts(loc_h)
    rank_v, null_v = lifts(loc_v)
    return SphereReport(
        rank_residual_h=rank_h,
        rank_residual_v=rank_v,
        null_residual_h=null_h,
        null_residual_v=null_v,
    )


# ---------------------------------------------------------------------------
# Circularity


@dataclass(frozen=True)
class CircularityReport:
    """Planarity and cross-ratio residuals per face.

    ``cr`` holds the complex cross ratio on spacelike face planes and nan on
    the others; ``lorentzian`` marks faces whose plane has induced signature
    (1,1), where the circumscribed conic is of hypercycle type and the
    concircularity condition becomes equality of two real cross ratios in
    null coordinates; ``parabolic`` marks planes tangent to the light cone
    (horocycle sections), where only planarity is meaningful.
    """

    planarity: np.ndarray
    cr: np.ndarray
    residual: np.ndarray
    lorentzian: np.ndarray
    parabolic: np.ndarray

    @property
    def max_residual(self) -> float:
        vals = np.concatenate(
            [self.planarity.ravel(), self.residual[~self.parabolic].ravel()]
        )
        return float(np.max(vals)) if vals.size else 0.0


def _real_cross_ratio(u_j, u_k, u_l):
    # Cross ratio of (0, u_j, u_k, u_l); inputs are plane coordinates
    # relative to the first corner.
    num = u_j * (u_l - u_k)
    den = (u_k - u_j) * (-u_l)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den != 0, num / np.where(den != 0, den, 1.0), np.inf)


def circularity_corners(x: np.ndarray) -> CircularityReport:
    """Concircularity test on per-face corner stacks (..., 4, 4)."""
    x = np.asarray(x)
    xi = x[..., 0, :]
    v1 = x[..., 1, :] - xi
    v2 = x[..., 2, :] - xi
    v3 = x[..., 3, :] - xi
    mat = np.stack([v1, v2, v3], axis=-2)
    _, svals, vt = np.linalg.svd(mat, full_matrices=False)
    planarity = svals[..., 2] / np.maximum(svals[..., 0], 1e-300)

    e1 = vt[..., 0, :]
    e2 = vt[..., 1, :]
    g11 = minkowski(e1, e1)
    g12 = minkowski(e1, e2)
    g22 = minkowski(e2, e2)
    det = g11 * g22 - g12**2
    gram_scale = g11**2 + 2 * g12**2 + g22**2
    parabolic = np.abs(det) <= 1e-10 * gram_scale
    lorentzian = (det < 0) & ~parabolic
    spacelike = (det > 0) & (g11 > 0) & ~parabolic

    # Eigen-decomposition of the 2x2 induced Gram form, in closed form.
    half_tr = (g11 + g22) / 2
    disc = np.sqrt(((g11 - g22) / 2) ** 2 + g12**2)
    lam1 = half_tr + disc
    lam2 = half_tr - disc
    # Eigenvector for lam1 in the (e1, e2) basis; of the two proportional
    # forms pick the one with the larger norm (the other can vanish).
    na = g12**2 + (lam1 - g11) ** 2
    nb = (lam1 - g22) ** 2 + g12**2
    use_b = nb > na
    c1 = np.where(use_b, lam1 - g22, g12)
    c2 = np.where(use_b, g12, lam1 - g11)
    norm = np.sqrt(c1**2 + c2**2)
    norm = np.where(norm == 0, 1.0, norm)
    c1, c2 = c1 / norm, c2 / norm
    f1 = c1[..., None] * e1 + c2[..., None] * e2
    f2 = -c2[..., None] * e1 + c1[..., None] * e2

    # Coordinates with respect to the induced-orthonormal frame: the
    # eigenvalue magnitudes rescale the eigen directions to unit vectors.
    sl1 = np.sqrt(np.maximum(lam1, 1e-300))
    sl2 = np.sqrt(np.maximum(np.abs(lam2), 1e-300))

    def coords(v):
        return minkowski(v, f1) / sl1, minkowski(v, f2) / sl2

    xj = coords(v1)
    xk = coords(v2)
    xl = coords(v3)

    # Spacelike planes: complex chart, circle <=> real cross ratio.
    zs_j = xj[0] + 1j * xj[1]
    zs_k = xk[0] + 1j * xk[1]
    zs_l = xl[0] + 1j * xl[1]
    cr_c = _real_cross_ratio(zs_j, zs_k, zs_l)
    res_space = np.abs(cr_c.imag) / np.maximum(1.0, np.abs(cr_c))

    # Lorentzian planes: null chart (u, v); the hyperbola sections are the
    # graphs of real fractional linear maps, so concircularity is equality
    # of the two real cross ratios.
    cr_u = _real_cross_ratio(xj[0] + xj[1], xk[0] + xk[1], xl[0] + xl[1])
    cr_v = _real_cross_ratio(xj[0] - xj[1], xk[0] - xk[1], xl[0] - xl[1])
    res_lor = np.abs(cr_u - cr_v) / np.maximum(1.0, np.maximum(np.abs(cr_u), np.abs(cr_v)))

    residual = np.where(spacelike, res_space, np.where(lorentzian, res_lor, 0.0))
    cr = np.where(spacelike, cr_c, np.nan + 0j)
    return CircularityReport(
        planarity=planarity,
        cr=cr,
        residual=residual,
        lorentzian=lorentzian,
        parabolic=parabolic,
    )


def circularity_check(x_coords: np.ndarray) -> CircularityReport:
    """Test that every face of a net in the hyperboloid is concircular.

    Coplanar points of the hyperboloid automatically lie on a conic; in an
    orthonormal basis of the (spacelike) face plane with respect to the
    ambient Minkowski product that conic is a genuine circle, so the face is
    concircular exactly when the difference vectors have affine rank 2 and
    the complex cross ratio of the four plane coordinates is real.
    """
    return circularity_corners(_face_corners(np.asarray(x_coords)))


def front_circularity(family: FlatFrontFamily, s: float = 0.0) -> CircularityReport:
    """Concircularity of faces, evaluated in per-face local gauge."""
    return circularity_corners(local_faces(family, s).x)
