"""Rectangular quad grids, edge labellings, and discrete calculus.

Vertices are index pairs (m, n) with 0 <= m < rows and 0 <= n < cols.
"Horizontal" edges step the first index, (m,n) -> (m+1,n); "vertical" edges
step the second, (m,n) -> (m,n+1).  Each face is the oriented quad

    (i, j, k, l) = ((m,n), (m+1,n), (m+1,n+1), (m,n+1)),

counterclockwise by convention; every diagonal and sign convention in the
library refers to this single ordering.

Edge quantities are stored on the canonically oriented edges as two arrays,
``h`` of shape (rows-1, cols) and ``v`` of shape (rows, cols-1); reversing an
edge negates a 1-form value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotClosed

#: Face-closure tolerance is this factor times max(1, max |form value|).
TAU_CLOSED_FACTOR = 1e-10


@dataclass(frozen=True)
class QuadGrid:
    """A simply connected rows x cols lattice of vertices."""

    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 2 or self.cols < 2:
            raise ValueError(f"grid needs at least 2x2 vertices, got {self.rows}x{self.cols}")

    @property
    def vertex_shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def hedge_shape(self) -> tuple[int, int]:
        return (self.rows - 1, self.cols)

    @property
    def vedge_shape(self) -> tuple[int, int]:
        return (self.rows, self.cols - 1)

    @property
    def face_shape(self) -> tuple[int, int]:
        return (self.rows - 1, self.cols - 1)

    def check_vertex(self, vertex: tuple[int, int]) -> tuple[int, int]:
        m, n = vertex
        if not (0 <= m < self.rows and 0 <= n < self.cols):
            raise ValueError(f"vertex {vertex} outside {self.rows}x{self.cols} grid")
        return (int(m), int(n))


@dataclass(frozen=True)
class EdgeLabelling:
    """Real edge labels stored per lattice direction.

    ``alpha[m]`` labels every horizontal edge ((m,n),(m+1,n)); ``beta[n]``
    labels every vertical edge ((m,n),(m,n+1)).  Labels attach to unoriented
    edges, and storing one value per lattice step makes opposite edges of
    every face carry equal labels automatically.  All entries must be
    nonzero; negative labels are first-class.
    """

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=float))
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=float))
        if self.alpha.ndim != 1 or self.beta.ndim != 1:
            raise ValueError("labelling sequences must be one-dimensional")
        if np.any(self.alpha == 0) or np.any(self.beta == 0):
            raise ValueError("edge labels must be nonzero")

    def check_grid(self, grid: QuadGrid) -> None:
        if self.alpha.shape != (grid.rows - 1,) or self.beta.shape != (grid.cols - 1,):
            raise ValueError(
                f"labelling sizes {self.alpha.shape}/{self.beta.shape} do not match "
                f"{grid.rows}x{grid.cols} grid"
            )

    def h(self) -> np.ndarray:
        """Horizontal labels broadcastable over horizontal-edge or face arrays."""
        return self.alpha[:, None]

    def v(self) -> np.ndarray:
        """Vertical labels broadcastable over vertical-edge or face arrays."""
        return self.beta[None, :]

    @staticmethod
    def constant(grid: QuadGrid, alpha: float, beta: float) -> "EdgeLabelling":
        return EdgeLabelling(
            np.full(grid.rows - 1, float(alpha)), np.full(grid.cols - 1, float(beta))
        )


@dataclass(frozen=True)
class EdgeForm:
    """A discrete 1-form: one value per canonically oriented edge.

    ``h[m,n]`` is the value on (m,n) -> (m+1,n) and ``v[m,n]`` the value on
    (m,n) -> (m,n+1); the value on a reversed edge is the negative.
    """

    h: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "h", np.asarray(self.h))
        object.__setattr__(self, "v", np.asarray(self.v))

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(self.h))), float(np.max(np.abs(self.v))))


def derived(f_i, f_j):
    """Midpoint value (f_i + f_j) / 2 of a vertex function on an unoriented edge."""
    return (f_i + f_j) / 2


def derivative(f_i, f_j):
    """Difference f_j - f_i along the oriented edge (ij)."""
    return f_j - f_i


def derived_form(f: np.ndarray) -> EdgeForm:
    """Per-edge midpoints of a vertex function (symmetric in orientation)."""
    f = np.asarray(f)
    return EdgeForm(h=(f[:-1, :] + f[1:, :]) / 2, v=(f[:, :-1] + f[:, 1:]) / 2)


def derivative_form(f: np.ndarray) -> EdgeForm:
    """Per-edge differences of a vertex function, as a discrete 1-form."""
    f = np.asarray(f)
    return EdgeForm(h=f[1:, :] - f[:-1, :], v=f[:, 1:] - f[:, :-1])


def face_sums(form: EdgeForm) -> np.ndarray:
    """Oriented sum of a 1-form around every face, shape (rows-1, cols-1).

    The sum follows the face boundary i -> j -> k -> l -> i, so edges (kl)
    and (li) enter with reversed canonical orientation.
    """
    return form.h[:, :-1] + form.v[1:, :] - form.h[:, 1:] - form.v[:-1, :]


def integrate_edge_form(
    grid: QuadGrid,
    form: EdgeForm,
    root: tuple[int, int] = (0, 0),
    root_value=0.0,
    tol: float | None = None,
) -> np.ndarray:
    """Integrate a closed 1-form to the vertex function f with df = form.

    Closedness is checked first: if any face sum exceeds ``tol`` (default
    TAU_CLOSED_FACTOR * max(1, max |form value|)) a NotClosed error carries
    the offending face and residual.  On a simply connected grid closedness
    makes the result path independent; integration proceeds down the first
    column and then along rows, and the constant is fixed by
    f(root) = root_value.
    """
    if form.h.shape != grid.hedge_shape or form.v.shape != grid.vedge_shape:
        raise ValueError("edge form shape does not match grid")
    root = grid.check_vertex(root)
    residuals = np.abs(face_sums(form))
    if tol is None:
        tol = TAU_CLOSED_FACTOR * max(1.0, form.max_abs())
    worst = np.unravel_index(np.argmax(residuals), residuals.shape)
    if residuals[worst] > tol:
        raise NotClosed((int(worst[0]), int(worst[1])), float(residuals[worst]))

    dtype = np.result_type(form.h.dtype, form.v.dtype, type(root_value))
    f = np.zeros(grid.vertex_shape, dtype=dtype)
    f[1:, 0] = np.cumsum(form.h[:, 0])
    f[:, 1:] = f[:, :1] + np.cumsum(form.v, axis=1)
    f += root_value - f[root]
    return f
