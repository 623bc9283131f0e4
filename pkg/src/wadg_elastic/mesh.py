"""Triangular meshes, face connectivity and geometric factors."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import IntEnum

import numpy as np

from .reference_element import FACE_VERTICES, ReferenceElement, face_tangents


class MeshError(ValueError):
    pass


class BoundaryTag(IntEnum):
    INTERIOR = 0
    TRACTION = 1
    VELOCITY = 2
    ABSORBING = 3
    PERIODIC_X = 4
    PERIODIC_Y = 5
    EXACT = 6

    @classmethod
    def parse(cls, name) -> "BoundaryTag":
        if isinstance(name, BoundaryTag):
            return name
        aliases = {
            "interior": cls.INTERIOR, "traction": cls.TRACTION, "free": cls.TRACTION,
            "velocity": cls.VELOCITY, "dirichlet": cls.VELOCITY,
            "absorbing": cls.ABSORBING, "periodic_x": cls.PERIODIC_X,
            "periodic_y": cls.PERIODIC_Y, "exact": cls.EXACT, "state": cls.EXACT,
        }
        try:
            return aliases[str(name).lower()]
        except KeyError:
            raise MeshError(f"unknown boundary tag {name!r}") from None


SIDES = ("left", "right", "bottom", "top", "other")


@dataclass
class Mesh:
    vertices: np.ndarray          # (Nv, 2)
    EToV: np.ndarray              # (K, 3), counterclockwise
    etoe: np.ndarray              # (K, 3) neighbor element (self on boundary)
    etof: np.ndarray              # (K, 3) neighbor face (self on boundary)
    tags: np.ndarray              # (K, 3) BoundaryTag values
    bbox: tuple[float, float, float, float]
    curved_nodes: np.ndarray | None = field(default=None, repr=False)  # (K, Np, 2)

    @property
    def K(self) -> int:
        return len(self.EToV)

    @property
    def is_affine(self) -> bool:
        return self.curved_nodes is None

    def faces_with(self, tag: BoundaryTag) -> np.ndarray:
        return np.argwhere(self.tags == tag)


def _side_of(p0, p1, bbox, tol):
    x0, x1, y0, y1 = bbox
    if abs(p0[0] - x0) < tol and abs(p1[0] - x0) < tol:
        return "left"
    if abs(p0[0] - x1) < tol and abs(p1[0] - x1) < tol:
        return "right"
    if abs(p0[1] - y0) < tol and abs(p1[1] - y0) < tol:
        return "bottom"
    if abs(p0[1] - y1) < tol and abs(p1[1] - y1) < tol:
        return "top"
    return None


def connect(vertices, EToV, bc: dict | None = None, periodic_x=False, periodic_y=False,
            bbox=None) -> Mesh:
    """Build element-to-element connectivity for a triangle mesh.

    Boundary faces are tagged by the side of the bounding box they lie on,
    using ``bc`` (side name -> tag, default traction).  Periodic directions
    pair opposite boundary faces by their translated coordinates.
    """
    vertices = np.asarray(vertices, float)
    EToV = np.asarray(EToV, int)
    K = len(EToV)
    if K == 0:
        raise MeshError("empty mesh")
    if np.any(EToV < 0) or np.any(EToV >= len(vertices)):
        raise MeshError("element references a missing vertex")
    # duplicated vertex coordinates break face matching
    rounded = np.round(vertices, 12)
    if len(np.unique(rounded, axis=0)) != len(vertices):
        raise MeshError("coincident vertices")
    v = vertices[EToV]
    area2 = ((v[:, 1, 0] - v[:, 0, 0]) * (v[:, 2, 1] - v[:, 0, 1])
             - (v[:, 2, 0] - v[:, 0, 0]) * (v[:, 1, 1] - v[:, 0, 1]))
    if np.any(area2 <= 0):
        raise MeshError(f"{int(np.sum(area2 <= 0))} inverted or degenerate elements")
    if bbox is None:
        bbox = (vertices[:, 0].min(), vertices[:, 0].max(),
                vertices[:, 1].min(), vertices[:, 1].max())
    bc = {} if bc is None else dict(bc)
    for side in bc:
        if side not in SIDES:
            raise MeshError(f"unknown side {side!r}")
    tol = 1e-10 * max(bbox[1] - bbox[0], bbox[3] - bbox[2])

    etoe = np.tile(np.arange(K)[:, None], (1, 3))
    etof = np.tile(np.arange(3)[None, :], (K, 1))
    tags = np.zeros((K, 3), int)

    faces: dict[tuple[int, int], tuple[int, int]] = {}
    for k in range(K):
        for f, (a, b) in enumerate(FACE_VERTICES):
            key = tuple(sorted((EToV[k, a], EToV[k, b])))
            if key in faces:
                k2, f2 = faces.pop(key)
                if k2 < 0:
                    raise MeshError("face shared by more than two elements")
                etoe[k, f], etof[k, f] = k2, f2
                etoe[k2, f2], etof[k2, f2] = k, f
            else:
                faces[key] = (k, f)

    # remaining faces lie on the boundary
    periodic_bins: dict[tuple, list] = {}
    for (a, b), (k, f) in faces.items():
        p0, p1 = vertices[a], vertices[b]
        side = _side_of(p0, p1, bbox, tol)
        if side is None:
            # boundary faces off the bounding box (non-rectangular domains) get the default tag
            tags[k, f] = BoundaryTag.parse(bc.get("other", BoundaryTag.TRACTION))
            continue
        if (periodic_x and side in ("left", "right")) or (periodic_y and side in ("bottom", "top")):
            axis = 1 if side in ("left", "right") else 0
            key = (axis, round(min(p0[axis], p1[axis]) / tol), round(max(p0[axis], p1[axis]) / tol))
            periodic_bins.setdefault(key, []).append((k, f))
            tags[k, f] = BoundaryTag.PERIODIC_X if axis == 1 else BoundaryTag.PERIODIC_Y
        else:
            tags[k, f] = BoundaryTag.parse(bc.get(side, BoundaryTag.TRACTION))
            if tags[k, f] in (BoundaryTag.PERIODIC_X, BoundaryTag.PERIODIC_Y, BoundaryTag.INTERIOR):
                raise MeshError(f"side {side!r} cannot carry tag {BoundaryTag(tags[k, f]).name}")
    for key, pair in periodic_bins.items():
        if len(pair) != 2:
            raise MeshError("periodic faces do not pair up; boundary nodes must match")
        (k1, f1), (k2, f2) = pair
        etoe[k1, f1], etof[k1, f1] = k2, f2
        etoe[k2, f2], etof[k2, f2] = k1, f1
    return Mesh(vertices, EToV, etoe, etof, tags, tuple(float(b) for b in bbox))


def uniform_tri_mesh(nx: int, ny: int, xlim=(0.0, 1.0), ylim=(0.0, 1.0), bc=None,
                     periodic_x=False, periodic_y=False, diagonal: str = "sw-ne") -> Mesh:
    """Structured mesh of nx-by-ny quads, each split along one diagonal."""
    if diagonal not in ("sw-ne", "nw-se"):
        raise MeshError(f"unknown diagonal {diagonal!r}")
    if nx < 1 or ny < 1:
        raise MeshError("need at least one cell per direction")
    x = np.linspace(xlim[0], xlim[1], nx + 1)
    y = np.linspace(ylim[0], ylim[1], ny + 1)
    X, Y = np.meshgrid(x, y, indexing="ij")
    verts = np.column_stack([X.ravel(), Y.ravel()])
    idx = lambda i, j: i * (ny + 1) + j
    tris = []
    for i in range(nx):
        for j in range(ny):
            v00, v10, v01, v11 = idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1)
            if diagonal == "sw-ne":
                tris.append((v00, v10, v11))
                tris.append((v00, v11, v01))
            else:
                tris.append((v00, v10, v01))
                tris.append((v10, v11, v01))
    return connect(verts, np.array(tris), bc=bc, periodic_x=periodic_x,
                   periodic_y=periodic_y, bbox=(xlim[0], xlim[1], ylim[0], ylim[1]))


def element_nodes(mesh: Mesh, ref: ReferenceElement) -> np.ndarray:
    """Physical positions of the reference interpolation nodes, (K, Np, 2)."""
    if mesh.curved_nodes is not None:
        return mesh.curved_nodes
    r, s = ref.nodes.T
    v = mesh.vertices[mesh.EToV]
    lam = np.stack([-(r + s) / 2, (1 + r) / 2, (1 + s) / 2], axis=1)  # (Np, 3)
    return np.einsum("nv,kvd->knd", lam, v)


def lamb_warp(x, y):
    """Smooth interior warp; vanishes on the boundary of [-1,1] x [-1/2,1/2]."""
    xt = x + 0.1 * np.cos(np.pi * x / 2) * np.cos(3 * np.pi * y)
    yt = y + 0.05 * np.sin(np.pi * x) * np.cos(3 * np.pi * y)
    return xt, yt


def warp_lamb_mesh(mesh: Mesh, ref: ReferenceElement, warp=lamb_warp) -> Mesh:
    """Isoparametric degree-N curved mesh obtained by warping every node."""
    xy = element_nodes(replace(mesh, curved_nodes=None), ref)
    xt, yt = warp(xy[..., 0], xy[..., 1])
    out = replace(mesh, curved_nodes=np.stack([xt, yt], axis=-1))
    geometric_factors(out, ref)  # raises on inverted elements
    return out


@dataclass
class Geometry:
    xq: np.ndarray
    yq: np.ndarray
    J: np.ndarray         # (K, Nq)
    rx: np.ndarray
    sx: np.ndarray
    ry: np.ndarray
    sy: np.ndarray
    xf: np.ndarray        # (K, 3, Nfq)
    yf: np.ndarray
    nx: np.ndarray
    ny: np.ndarray
    Jf: np.ndarray        # face length scaling (physical / reference parameter)
    mapP: np.ndarray      # (K, 3, Nfq) flat index of the matching exterior point
    affine: np.ndarray    # (K,) bool
    coords: np.ndarray    # (2, K, Np) modal coefficients of x and y


def _coordinate_coefficients(mesh: Mesh, ref: ReferenceElement) -> np.ndarray:
    xy = element_nodes(mesh, ref)
    Vinv = np.linalg.inv(ref.Vnodes)
    return np.stack([xy[..., 0] @ Vinv.T, xy[..., 1] @ Vinv.T])


def geometric_factors(mesh: Mesh, ref: ReferenceElement) -> Geometry:
    c = _coordinate_coefficients(mesh, ref)
    xr, yr = c @ ref.Vrq.T
    xs, ys = c @ ref.Vsq.T
    xq, yq = c @ ref.Vq.T
    J = xr * ys - xs * yr
    if np.any(J <= 0):
        bad = np.unique(np.argwhere(J <= 0)[:, 0])
        raise MeshError(f"non-positive Jacobian in elements {bad[:10].tolist()}")
    rx, sx, ry, sy = ys / J, -yr / J, -xs / J, xr / J

    tang = face_tangents()
    xf = np.einsum("fqn,kn->kfq", ref.Vfq, c[0])
    yf = np.einsum("fqn,kn->kfq", ref.Vfq, c[1])
    dxf = (tang[:, 0, None] * np.einsum("fqn,kn->kfq", ref.Vfr, c[0])
           + tang[:, 1, None] * np.einsum("fqn,kn->kfq", ref.Vfs, c[0]))
    dyf = (tang[:, 0, None] * np.einsum("fqn,kn->kfq", ref.Vfr, c[1])
           + tang[:, 1, None] * np.einsum("fqn,kn->kfq", ref.Vfs, c[1]))
    Jf = np.hypot(dxf, dyf)
    nx, ny = dyf / Jf, -dxf / Jf

    if mesh.curved_nodes is None:
        affine = np.ones(mesh.K, bool)
    else:
        affine = (np.ptp(J, axis=1) <= 1e-12 * np.abs(J).max(axis=1)) & \
                 (np.ptp(rx, axis=1) <= 1e-12 * np.abs(np.stack([rx, sx, ry, sy])).max(axis=(0, 2)))
    mapP = _face_point_map(mesh, xf, yf)
    return Geometry(xq, yq, J, rx, sx, ry, sy, xf, yf, nx, ny, Jf, mapP, affine, c)


def _face_point_map(mesh: Mesh, xf, yf) -> np.ndarray:
    K, _, Nfq = xf.shape
    ids = np.arange(K * 3 * Nfq).reshape(K, 3, Nfq)
    mapP = ids.copy()
    scale = max(mesh.bbox[1] - mesh.bbox[0], mesh.bbox[3] - mesh.bbox[2])
    for k in range(K):
        for f in range(3):
            k2, f2 = mesh.etoe[k, f], mesh.etof[k, f]
            if k2 == k and f2 == f:
                continue
            tag = mesh.tags[k, f]
            ax, ay = (0.0, 1.0) if tag == BoundaryTag.PERIODIC_X else (1.0, 0.0) if tag == BoundaryTag.PERIODIC_Y else (1.0, 1.0)
            d = (ax * (xf[k, f][:, None] - xf[k2, f2][None, :]) ** 2
                 + ay * (yf[k, f][:, None] - yf[k2, f2][None, :]) ** 2)
            j = np.argmin(d, axis=1)
            if np.sqrt(d[np.arange(Nfq), j].max()) > 1e-8 * scale or len(set(j)) != Nfq:
                raise MeshError(f"face points of element {k} face {f} do not match neighbor")
            mapP[k, f] = ids[k2, f2, j]
    return mapP


def write_mesh(mesh: Mesh, path) -> None:
    with open(path, "w") as fh:
        fh.write("# triangle mesh: vertices then elements (v0 v1 v2 etoe0..2 etof0..2 tag0..2)\n")
        fh.write("bbox %r %r %r %r\n" % tuple(float(b) for b in mesh.bbox))
        fh.write(f"vertices {len(mesh.vertices)}\n")
        for x, y in mesh.vertices:
            fh.write(f"{float(x)!r} {float(y)!r}\n")
        fh.write(f"elements {mesh.K}\n")
        for k in range(mesh.K):
            row = list(mesh.EToV[k]) + list(mesh.etoe[k]) + list(mesh.etof[k]) + list(mesh.tags[k])
            fh.write(" ".join(str(int(v)) for v in row) + "\n")


def read_mesh(path) -> Mesh:
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln and not ln.startswith("#")]
    bbox = tuple(float(v) for v in lines[0].split()[1:])
    nv = int(lines[1].split()[1])
    verts = np.array([[float(v) for v in ln.split()] for ln in lines[2:2 + nv]])
    K = int(lines[2 + nv].split()[1])
    rows = np.array([[int(v) for v in ln.split()] for ln in lines[3 + nv:3 + nv + K]])
    return Mesh(verts, rows[:, 0:3], rows[:, 3:6], rows[:, 6:9], rows[:, 9:12], bbox)
