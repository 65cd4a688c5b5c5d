"""Hermitian/Pauli model of Minkowski 4-space and the edge connection.

A Hermitian 2x2 matrix X with coordinates (x0,x1,x2,x3) in the basis
(E0,E1,E2,E3) below has -det X = -x0^2 + x1^2 + x2^2 + x3^2, identifying
(Herm(2), -det) with R^{3,1}; Sl(2,C) acts by X -> G X G* as the restricted
Lorentz group.  On this model the holomorphic data (g, a) and a parameter t
define the unimodular edge matrices

    W_ij = [[1, dg_ij], [t a_ij / dg_ij, 1]] / sqrt(1 - t a_ij)

which form a flat connection exactly when g is holomorphic; integrating
F_j = F_i W_ij produces the frame of the associated surface family.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, NegativeBranch, NotFlat, NotHermitian
from .grid import EdgeLabelling, QuadGrid
from .holo import EPS_DEG, HolomorphicMap

TAU_DET = 1e-10
TAU_HERM = 1e-10
#: Flatness tolerance, relative to the per-face product scale.
TAU_FLAT = 1e-10

E0 = np.eye(2, dtype=complex)
E1 = np.array([[0, 1], [1, 0]], dtype=complex)
E2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
E3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_BASIS = np.stack([E0, E1, E2, E3])


def pauli_pack(coords: np.ndarray) -> np.ndarray:
    """Hermitian matrix x0 E0 + x1 E1 + x2 E2 + x3 E3 from real coordinates.

    ``coords`` has shape (..., 4); the result has shape (..., 2, 2).
    """
    coords = np.asarray(coords, dtype=float)
    x0, x1, x2, x3 = np.moveaxis(coords, -1, 0)
    out = np.empty(coords.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = x0 + x3
    out[..., 0, 1] = x1 - 1j * x2
    out[..., 1, 0] = x1 + 1j * x2
    out[..., 1, 1] = x0 - x3
    return out


def hermitian_deviation(x: np.ndarray) -> float:
    x = np.asarray(x)
    return float(np.max(np.abs(x - np.conj(np.swapaxes(x, -1, -2)))))


def pauli_unpack(x: np.ndarray, tol: float = TAU_HERM, check: bool = True) -> np.ndarray:
    """Real Pauli coordinates of a Hermitian matrix, shape (..., 4).

    With ``check`` the input must be Hermitian within tol relative to its
    magnitude (NotHermitian otherwise); anti-Hermitian parts are discarded
    either way.
    """
    x = np.asarray(x, dtype=complex)
    if check:
        scale = max(1.0, float(np.max(np.abs(x))) if x.size else 0.0)
        dev = hermitian_deviation(x)
        if dev > tol * scale:
            raise NotHermitian(f"deviation {dev:.3e} exceeds {tol:.1e} x scale {scale:.3e}")
    coords = np.empty(x.shape[:-2] + (4,), dtype=float)
    coords[..., 0] = (x[..., 0, 0] + x[..., 1, 1]).real / 2
    coords[..., 3] = (x[..., 0, 0] - x[..., 1, 1]).real / 2
    coords[..., 1] = (x[..., 0, 1] + x[..., 1, 0]).real / 2
    coords[..., 2] = (x[..., 1, 0] - x[..., 0, 1]).imag / 2
    return coords


def minkowski(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Minkowski product -u0 v0 + u1 v1 + u2 v2 + u3 v3 on coordinate arrays."""
    u = np.asarray(u)
    v = np.asarray(v)
    return -u[..., 0] * v[..., 0] + np.sum(u[..., 1:] * v[..., 1:], axis=-1)


def minkowski_herm(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Minkowski product of Hermitian matrices (polarization of -det)."""
    return minkowski(pauli_unpack(x, check=False), pauli_unpack(y, check=False))


def det2(mats: np.ndarray) -> np.ndarray:
    """Determinant of a stack of 2x2 matrices."""
    mats = np.asarray(mats)
    return mats[..., 0, 0] * mats[..., 1, 1] - mats[..., 0, 1] * mats[..., 1, 0]


def inv2(mats: np.ndarray) -> np.ndarray:
    """Inverse of a stack of 2x2 matrices via the adjugate."""
    mats = np.asarray(mats)
    out = np.empty_like(mats)
    out[..., 0, 0] = mats[..., 1, 1]
    out[..., 0, 1] = -mats[..., 0, 1]
    out[..., 1, 0] = -mats[..., 1, 0]
    out[..., 1, 1] = mats[..., 0, 0]
    return out / det2(mats)[..., None, None]


def adjoint(mats: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(mats, -1, -2))


def sl2_act(g: np.ndarray, x: np.ndarray) -> np.ndarray:
    """The action G . X = G X G*; preserves -det when det G = 1."""
    g = np.asarray(g, dtype=complex)
    return g @ np.asarray(x, dtype=complex) @ adjoint(g)


@dataclass(frozen=True)
class EdgeConnection:
    """Unimodular transition matrices on the canonically oriented edges."""

    grid: QuadGrid
    labelling: EdgeLabelling
    t: float
    w_h: np.ndarray
    w_v: np.ndarray

    def reversed_h(self) -> np.ndarray:
        return inv2(self.w_h)

    def reversed_v(self) -> np.ndarray:
        return inv2(self.w_v)


def _edge_matrices(dg: np.ndarray, labels: np.ndarray, t: float, allow_complex: bool) -> np.ndarray:
    one_minus_ta = 1.0 - t * labels
    if allow_complex:
        scale = np.sqrt(one_minus_ta.astype(complex))
    else:
        scale = np.sqrt(one_minus_ta)
    w = np.empty(dg.shape + (2, 2), dtype=complex)
    w[..., 0, 0] = 1.0
    w[..., 0, 1] = dg
    w[..., 1, 0] = t * labels / dg
    w[..., 1, 1] = 1.0
    return w / scale[..., None, None]


def build_connection(hmap: HolomorphicMap, t: float, allow_complex: bool = False) -> EdgeConnection:
    """Edge matrices W_ij from holomorphic data and the parameter t.

    t must avoid 0 and the reciprocals of all edge labels; by default
    1 - t a > 0 is also required on every edge so the normalizing square
    root stays real (NegativeBranch otherwise).  With ``allow_complex`` the
    principal complex branch is taken instead and the frame lands in
    Sl(2,C); callers should then check tr X > 0 on the evaluated surface.
    """
    lab = hmap.labelling
    all_labels = np.concatenate([lab.alpha, lab.beta])
    if abs(t) <= EPS_DEG:
        raise InvalidParameter("t must be nonzero")
    gap = np.abs(1.0 - t * all_labels)
    if np.min(gap) <= EPS_DEG * max(1.0, float(np.max(np.abs(t * all_labels)))):
        raise InvalidParameter(f"t={t} hits an excluded value 1/a")
    if not allow_complex and np.any(1.0 - t * all_labels < 0):
        raise NegativeBranch(
            "1 - t*a is negative on some edge; pass allow_complex=True for the complex branch"
        )
    dg = hmap.dg()
    return EdgeConnection(
        grid=hmap.grid,
        labelling=lab,
        t=float(t),
        w_h=_edge_matrices(dg.h, lab.h(), t, allow_complex),
        w_v=_edge_matrices(dg.v, lab.v(), t, allow_complex),
    )


def check_flat(conn: EdgeConnection) -> np.ndarray:
    """Per-face flatness residual ||W_ij W_jk - W_il W_lk||, scale-relative.

    The two products follow the paths i->j->k and i->l->k around each face;
    the residual is the max entry difference divided by the max entry
    magnitude of the products.
    """
    lhs = conn.w_h[:, :-1] @ conn.w_v[1:, :]
    rhs = conn.w_v[:-1, :] @ conn.w_h[:, 1:]
    diff = np.max(np.abs(lhs - rhs), axis=(-1, -2))
    scale = np.maximum(np.max(np.abs(lhs), axis=(-1, -2)), np.max(np.abs(rhs), axis=(-1, -2)))
    return diff / np.maximum(scale, 1e-300)


@dataclass(frozen=True)
class SL2Frame:
    """Per-vertex unimodular frame, with integration quality metrics."""

    f: np.ndarray
    path_residual: float = field(default=float("nan"))
    closure_residual: float = field(default=float("nan"))

    def det_drift(self) -> float:
        """Worst |det F - 1| relative to the squared frame magnitude."""
        d = np.abs(det2(self.f) - 1.0)
        scale = np.maximum(1.0, np.max(np.abs(self.f), axis=(-1, -2)) ** 2)
        return float(np.max(d / scale))


def frame_closure(conn: EdgeConnection, f: np.ndarray) -> float:
    """Worst relative defect ||F_i W_ij - F_j|| over all edges."""
    res_h = f[:-1, :] @ conn.w_h - f[1:, :]
    res_v = f[:, :-1] @ conn.w_v - f[:, 1:]
    scale_h = np.maximum(np.max(np.abs(f[1:, :]), axis=(-1, -2)), 1e-300)
    scale_v = np.maximum(np.max(np.abs(f[:, 1:]), axis=(-1, -2)), 1e-300)
    return max(
        float(np.max(np.max(np.abs(res_h), axis=(-1, -2)) / scale_h)),
        float(np.max(np.max(np.abs(res_v), axis=(-1, -2)) / scale_v)),
    )


def integrate_frame(
    conn: EdgeConnection,
    root: tuple[int, int] = (0, 0),
    f_root: np.ndarray | None = None,
    tol: float = TAU_FLAT,
) -> SL2Frame:
    """Integrate F_j = F_i W_ij from a unimodular seed frame.

    Flatness is a precondition (NotFlat when the worst check_flat residual
    exceeds tol); integration runs down the first column and then along
    rows, the frame is shifted so F(root) = f_root, and two quality metrics
    are recorded: the relative defect of the remaining edges and the
    disagreement of the row-first and column-first paths to the far corner.
    """
    flat = check_flat(conn)
    worst = float(np.max(flat))
    if worst > tol:
        raise NotFlat(f"flatness residual {worst:.3e} exceeds {tol:.1e}")
    root = conn.grid.check_vertex(root)
    if f_root is None:
        f_root = np.eye(2, dtype=complex)
    f_root = np.asarray(f_root, dtype=complex)
    if abs(det2(f_root) - 1.0) > TAU_DET * max(1.0, float(np.max(np.abs(f_root))) ** 2):
        raise ValueError("f_root must be unimodular")

    rows, cols = conn.grid.vertex_shape
    f = np.empty((rows, cols, 2, 2), dtype=complex)
    f[0, 0] = np.eye(2)
    for m in range(1, rows):
        f[m, 0] = f[m - 1, 0] @ conn.w_h[m - 1, 0]
    for n in range(1, cols):
        f[:, n] = f[:, n - 1] @ conn.w_v[:, n - 1]
    # Shift so the requested root carries the requested frame; left
    # multiplication preserves the edge recursion.
    f = (f_root @ inv2(f[root])) @ f

    row_first = np.eye(2, dtype=complex)
    for m in range(rows - 1):
        row_first = row_first @ conn.w_h[m, 0]
    for n in range(cols - 1):
        row_first = row_first @ conn.w_v[rows - 1, n]
    col_first = np.eye(2, dtype=complex)
    for n in range(cols - 1):
        col_first = col_first @ conn.w_v[0, n]
    for m in range(rows - 1):
        col_first = col_first @ conn.w_h[m, cols - 1]
    path_residual = float(
        np.max(np.abs(row_first - col_first)) / max(float(np.max(np.abs(row_first))), 1e-300)
    )

    return SL2Frame(f=f, path_residual=path_residual, closure_residual=frame_closure(conn, f))
