"""JSON documents, Poincare-ball projection, OBJ export, and validation.

Document schemas (all numbers serialized as decimals with 17 significant
digits, so loading reproduces every double bit-exactly):

* map document:        {"rows", "cols", "alpha", "beta", "g"}
* family document:     map document + {"t", "frame"}
* pair document:       {"rows", "cols", "alpha", "beta", "t", "hplus", "hminus"}
                       (alpha/beta here are the pair labelling b)
* weierstrass document: map document + {"t", "w"}

Complex vertex functions are row-major lists of [re, im] pairs; 2x2 complex
matrices are lists of four [re, im] pairs in entry order (0,0), (0,1),
(1,0), (1,1).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import front as front_mod
from .errors import InputError, NotUnitTimelike, WrongSheet
from .frame import det2, frame_closure, minkowski, pauli_unpack
from .front import FlatFrontFamily, eval_front, eval_front_coords
from .gauss import DarbouxPair, front_pair_laws, pair_labelling
from .grid import EdgeLabelling, QuadGrid
from .holo import HolomorphicMap
from .invert import WeierstrassData

TAU_GEO = front_mod.TAU_GEO


# ---------------------------------------------------------------------------
# JSON plumbing


def _fmt(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise InputError(f"cannot serialize non-finite number {x!r}")
    return format(float(x), ".17g")


def dumps_doc(value, indent: int = 0) -> str:
    """Serialize a document with 17-significant-digit decimal floats."""
    pad = " " * indent
    if isinstance(value, dict):
        items = ",\n".join(
            f'{pad}  {json.dumps(k)}: {dumps_doc(v, indent + 2).lstrip()}' for k, v in value.items()
        )
        return f"{pad}{{\n{items}\n{pad}}}"
    if isinstance(value, (list, tuple)):
        flat = all(not isinstance(v, (dict, list, tuple)) for v in value)
        if flat:
            return pad + "[" + ", ".join(dumps_doc(v).lstrip() for v in value) + "]"
        items = ",\n".join(dumps_doc(v, indent + 2) for v in value)
        return f"{pad}[\n{items}\n{pad}]"
    if isinstance(value, bool) or value is None:
        return pad + json.dumps(value)
    if isinstance(value, (int, np.integer)):
        return pad + str(int(value))
    if isinstance(value, (float, np.floating)):
        return pad + _fmt(value)
    if isinstance(value, str):
        return pad + json.dumps(value)
    raise InputError(f"cannot serialize value of type {type(value).__name__}")


def save_doc(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_doc(doc))
        fh.write("\n")


def load_doc(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read document {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError(f"document {path} is not a JSON object")
    return doc


def _require(doc: dict, *keys: str) -> None:
    missing = [k for k in keys if k not in doc]
    if missing:
        raise InputError(f"document is missing keys: {', '.join(missing)}")


def _complex_to_pairs(arr: np.ndarray) -> list:
    flat = np.asarray(arr, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def _pairs_to_complex(pairs, shape, what: str) -> np.ndarray:
    try:
        arr = np.asarray(pairs, dtype=float)
        if arr.shape != (int(np.prod(shape)), 2):
            raise ValueError(f"expected {int(np.prod(shape))} [re, im] pairs")
        return (arr[:, 0] + 1j * arr[:, 1]).reshape(shape)
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed {what}: {exc}") from exc


def _grid_labelling_doc(grid: QuadGrid, labelling: EdgeLabelling) -> dict:
    return {
        "rows": grid.rows,
        "cols": grid.cols,
        "alpha": [float(a) for a in labelling.alpha],
        "beta": [float(b) for b in labelling.beta],
    }


def _grid_labelling_from_doc(doc: dict) -> tuple[QuadGrid, EdgeLabelling]:
    _require(doc, "rows", "cols", "alpha", "beta")
    try:
        grid = QuadGrid(int(doc["rows"]), int(doc["cols"]))
        labelling = EdgeLabelling(np.asarray(doc["alpha"], float), np.asarray(doc["beta"], float))
        labelling.check_grid(grid)
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed grid/labelling: {exc}") from exc
    return grid, labelling


def holomap_to_doc(hmap: HolomorphicMap) -> dict:
    doc = _grid_labelling_doc(hmap.grid, hmap.labelling)
    doc["g"] = _complex_to_pairs(hmap.g)
    return doc


def holomap_from_doc(doc: dict) -> HolomorphicMap:
    grid, labelling = _grid_labelling_from_doc(doc)
    _require(doc, "g")
    g = _pairs_to_complex(doc["g"], grid.vertex_shape, "vertex function")
    return HolomorphicMap(grid, labelling, g)


def _matrices_to_doc(mats: np.ndarray) -> list:
    flat = np.asarray(mats, dtype=complex).reshape(-1, 2, 2)
    return [
        [[float(m[r, c].real), float(m[r, c].imag)] for r in (0, 1) for c in (0, 1)] for m in flat
    ]


def _matrices_from_doc(entries, shape, what: str) -> np.ndarray:
    try:
        arr = np.asarray(entries, dtype=float)
        count = int(np.prod(shape))
        if arr.shape != (count, 4, 2):
            raise ValueError("expected four [re, im] pairs per vertex")
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed {what}: {exc}") from exc
    cm = arr[..., 0] + 1j * arr[..., 1]
    out = np.empty((count, 2, 2), dtype=complex)
    out[:, 0, 0] = cm[:, 0]
    out[:, 0, 1] = cm[:, 1]
    out[:, 1, 0] = cm[:, 2]
    out[:, 1, 1] = cm[:, 3]
    return out.reshape(shape + (2, 2))


def family_to_doc(family: FlatFrontFamily) -> dict:
    doc = holomap_to_doc(family.hmap)
    doc["t"] = float(family.t)
    doc["frame"] = _matrices_to_doc(family.frame.f)
    return doc


def family_from_doc(doc: dict) -> FlatFrontFamily:
    """Rebuild a front family around a stored frame.

    The connection is regenerated deterministically from the stored map and
    t; the frame closure residual then measures the internal consistency of
    the document.
    """
    from .frame import SL2Frame, build_connection

    hmap = holomap_from_doc(doc)
    _require(doc, "t", "frame")
    t = float(doc["t"])
    f = _matrices_from_doc(doc["frame"], hmap.grid.vertex_shape, "frame")
    try:
        conn = build_connection(hmap, t, allow_complex=True)
    except Exception as exc:
        raise InputError(f"stored parameters do not define a connection: {exc}") from exc
    frame = SL2Frame(f=f, closure_residual=frame_closure(conn, f))
    return FlatFrontFamily(hmap=hmap, t=t, connection=conn, frame=frame)


def pair_to_doc(pair: DarbouxPair) -> dict:
    doc = _grid_labelling_doc(pair.grid, pair.b)
    doc["t"] = float(pair.t)
    doc["hplus"] = _complex_to_pairs(pair.hplus.reshape(-1, 2))
    doc["hminus"] = _complex_to_pairs(pair.hminus.reshape(-1, 2))
    return doc


def pair_from_doc(doc: dict) -> DarbouxPair:
    grid, b = _grid_labelling_from_doc(doc)
    _require(doc, "t", "hplus", "hminus")
    count = grid.rows * grid.cols
    hplus = _pairs_to_complex(doc["hplus"], (count, 2), "hplus lifts").reshape(
        grid.vertex_shape + (2,)
    )
    hminus = _pairs_to_complex(doc["hminus"], (count, 2), "hminus lifts").reshape(
        grid.vertex_shape + (2,)
    )
    return DarbouxPair(grid=grid, b=b, t=float(doc["t"]), hplus=hplus, hminus=hminus)


def wdata_to_doc(wdata: WeierstrassData) -> dict:
    doc = holomap_to_doc(wdata.hmap)
    doc["t"] = float(wdata.t)
    doc["w"] = _complex_to_pairs(wdata.w)
    return doc


def wdata_from_doc(doc: dict) -> WeierstrassData:
    hmap = holomap_from_doc(doc)
    _require(doc, "t", "w")
    w = _pairs_to_complex(doc["w"], hmap.grid.vertex_shape, "gauge")
    return WeierstrassData(hmap=hmap, t=float(doc["t"]), w=w)


# ---------------------------------------------------------------------------
# Poincare ball and OBJ export


def poincare_project(x_coords: np.ndarray, tol: float = TAU_GEO) -> np.ndarray:
    """Stereographic projection of unit timelike vectors into the open ball.

    For x on the forward sheet (x0 > 0, (x,x) = -1) the image is
    (x1, x2, x3) / (1 + x0).  Raises NotUnitTimelike when the Minkowski
    square deviates from -1 relative to the vector scale, and WrongSheet
    for points with x0 <= 0.
    """
    x = np.asarray(x_coords, dtype=float)
    scale2 = np.maximum(1.0, np.sum(x * x, axis=-1))
    dev = np.abs(minkowski(x, x) + 1.0)
    if np.any(dev > tol * scale2):
        raise NotUnitTimelike(f"worst deviation {float(np.max(dev / scale2)):.3e}")
    if np.any(x[..., 0] <= 0):
        raise WrongSheet("points with x0 <= 0 cannot be projected")
    return x[..., 1:] / (1.0 + x[..., 0:1])


def export_obj(points: np.ndarray, path) -> None:
    """Write an (M, N, 3) grid of ball coordinates as a quad OBJ mesh.

    Vertices appear in row-major order (vertex (m,n) is line m*N + n + 1);
    each grid face contributes one quad line traversing its corners in the
    cycle fixed by the 2x2 example "f 1 2 4 3".
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 3 or points.shape[2] != 3 or points.shape[0] < 2 or points.shape[1] < 2:
        raise InputError("expected an (M, N, 3) coordinate grid with M, N >= 2")
    rows, cols = points.shape[:2]
    lines = []
    for m in range(rows):
        for n in range(cols):
            x, y, z = points[m, n]
            lines.append(f"v {_fmt(x)} {_fmt(y)} {_fmt(z)}")
    for m in range(rows - 1):
        for n in range(cols - 1):
            i = m * cols + n + 1
            l = m * cols + n + 2
            k = (m + 1) * cols + n + 2
            j = (m + 1) * cols + n + 1
            lines.append(f"f {i} {l} {k} {j}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def read_obj(path) -> tuple[np.ndarray, np.ndarray]:
    """Read back vertex coordinates and 1-based quad indices from an OBJ file."""
    verts = []
    faces = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                parts = line.split()
                if not parts:
                    continue
                if parts[0] == "v":
                    verts.append([float(p) for p in parts[1:4]])
                elif parts[0] == "f":
                    faces.append([int(p) for p in parts[1:5]])
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read OBJ {path}: {exc}") from exc
    return np.asarray(verts, dtype=float), np.asarray(faces, dtype=int)


def project_family(family: FlatFrontFamily, s: float) -> np.ndarray:
    """Poincare-ball coordinates of the family member at s."""
    xc, _ = eval_front_coords(family, s)
    return poincare_project(xc)


# ---------------------------------------------------------------------------
# Validation


DEFAULT_TOLERANCES = {
    "holom": 1e-12,
    "ab_identity": 1e-14,
    "flatW": 1e-10,
    "frame_det": 1e-10,
    "frame_closure": 1e-10,
    "crH": 1e-10,
    "front_unit": 1e-10,
    "rodrigues": 1e-9,
    "circularity": 1e-9,
    "propagation": 1e-9,
    "mixed_area": 1e-10,
    "gauss_k": 1e-9,
    "lie_lifts": 1e-10,
    "curvature_sphere": 1e-9,
    "reflection_collinearity": 1e-9,
}


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str  # "pass" | "fail" | "skipped"
    max_residual: float | None = None
    tolerance: float | None = None
    worst_cell: tuple | None = None
    s: float | None = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def line(self) -> str:
        label = self.name if self.s is None else f"{self.name}(s={self.s:g})"
        if self.status == "skipped":
            return f"{label:32s} skipped"
        res = "n/a" if self.max_residual is None else f"{self.max_residual:.3e}"
        tol = "n/a" if self.tolerance is None else f"{self.tolerance:.1e}"
        return f"{label:32s} {self.status.upper():4s}  residual {res} (tol {tol})"


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)
    s_values: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def to_doc(self) -> dict:
        return {
            "passed": self.passed,
            "s_values": [float(s) for s in self.s_values],
            "checks": [
                {
                    "name": c.name,
                    "s": c.s,
                    "status": c.status,
                    "max_residual": c.max_residual,
                    "tolerance": c.tolerance,
                    "worst_cell": list(c.worst_cell) if c.worst_cell is not None else None,
                }
                for c in self.checks
            ],
        }

    def summary(self) -> str:
        lines = [c.line() for c in self.checks]
        lines.append("all checks passed" if self.passed else "VALIDATION FAILED")
        return "\n".join(lines)


def _argmax_cell(arr: np.ndarray) -> tuple:
    arr = np.where(np.isnan(arr), -np.inf, arr)
    return tuple(int(i) for i in np.unravel_index(np.argmax(arr), arr.shape))


def run_validation(
    family: FlatFrontFamily,
    s_values=(),
    tolerances: dict | None = None,
) -> ValidationReport:
    """Run every geometric check of the pipeline and collect a report.

    With an empty s list the per-surface checks run at s = 0 only.  If the
    holomorphicity check fails, all downstream checks are reported as
    skipped: their preconditions are void.  Tolerance overrides are given
    by check name; unknown names raise InputError.
    """
    tols = dict(DEFAULT_TOLERANCES)
    if tolerances:
        unknown = set(tolerances) - set(tols)
        if unknown:
            raise InputError(f"unknown tolerance names: {', '.join(sorted(unknown))}")
        tols.update({k: float(v) for k, v in tolerances.items()})
    s_list = [float(s) for s in s_values]
    if not s_list:
        s_list = [0.0]
    for s in s_list:
        if not math.isfinite(s):
            raise InputError(f"family parameter s must be finite, got {s}")
    report = ValidationReport(s_values=s_list)

    def add(name, residual, worst=None, s=None):
        residual = float(residual)
        ok = math.isfinite(residual) and residual <= tols[name]
        report.checks.append(
            CheckResult(
                name=name,
                status="pass" if ok else "fail",
                max_residual=residual if math.isfinite(residual) else None,
                tolerance=tols[name],
                worst_cell=worst,
                s=s,
            )
        )
        return ok

    hol = family.hmap.validate(tols["holom"])
    holom_ok = add("holom", hol.max_residual, _argmax_cell(hol.residuals))
    if not holom_ok:
        names = [k for k in DEFAULT_TOLERANCES if k != "holom"]
        per_s = {"front_unit", "rodrigues", "circularity", "propagation",
                 "mixed_area", "gauss_k", "lie_lifts", "curvature_sphere",
                 "reflection_collinearity"}
        for name in names:
            if name in per_s:
                for s in s_list:
                    report.checks.append(CheckResult(name=name, status="skipped", s=s))
            else:
                report.checks.append(CheckResult(name=name, status="skipped"))
        return report

    lab = family.hmap.labelling
    b = pair_labelling(lab, family.t)
    ab_res = max(
        float(np.max(np.abs((1 - family.t * lab.alpha) * (1 - family.t * b.alpha) - 1.0))),
        float(np.max(np.abs((1 - family.t * lab.beta) * (1 - family.t * b.beta) - 1.0))),
    )
    add("ab_identity", ab_res)

    from .frame import check_flat

    flat = check_flat(family.connection)
    add("flatW", float(np.max(flat)), _argmax_cell(flat))
    add("frame_det", family.frame.det_drift())
    add("frame_closure", frame_closure(family.connection, family.frame.f))

    laws = front_pair_laws(family)
    add("crH", laws.max_residual)

    for s in s_list:
        x, n = eval_front(family, s)
        xc = pauli_unpack(x, check=False)
        nc = pauli_unpack(n, check=False)
        scale2 = np.maximum(1.0, np.max(np.abs(x), axis=(-1, -2)) ** 2)
        unit = np.maximum(
            np.abs(det2(x) - 1.0) / scale2,
            np.maximum(np.abs(det2(n) + 1.0) / scale2, np.abs(minkowski(xc, nc)) / scale2),
        )
        unit_res = float(np.max(unit))
        if np.any(np.real(x[..., 0, 0] + x[..., 1, 1]) <= 0):
            unit_res = float("inf")
        add("front_unit", unit_res, _argmax_cell(unit), s=s)

        rod = front_mod.front_rodrigues(family, s)
        rod_res = max(rod.max_residual, rod.symmetry_residual, rod.closed_form_residual)
        add("rodrigues", rod_res, s=s)

        circ = front_mod.front_circularity(family, s)
        add("circularity", circ.max_residual, _argmax_cell(circ.planarity), s=s)

        prop = front_mod.propagation_check(family, s)
        add("propagation", prop.max_residual, s=s)

        curv = front_mod.front_curvature(family, s)
        add("mixed_area", max(curv.max_a_hh, float(np.max(curv.wedge_residual))), s=s)
        add("gauss_k", curv.max_k_deviation, s=s)

        x6, n6 = front_mod.lie_lift(xc, nc)
        lift_res = max(
            float(np.max(np.abs(front_mod.lie_product(x6, x6)) / scale2)),
            float(np.max(np.abs(front_mod.lie_product(n6, n6)) / scale2)),
            float(np.max(np.abs(front_mod.lie_product(x6, n6)) / scale2)),
        )
        add("lie_lifts", lift_res, s=s)

        spheres = front_mod.front_spheres(family, s)
        add("curvature_sphere", spheres.max_rank_residual, s=s)

        add("reflection_collinearity", front_mod.collinearity_check(family, s), s=s)

    return report
