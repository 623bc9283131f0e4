"""Errors, energies, operator spectra and convergence rates."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dg import NFIELDS, locate_point
from .reference_element import ReferenceElement, basis


def project(fn: Callable, ref: ReferenceElement, geom) -> np.ndarray:
    """Physical L2 projection of fn(x, y) -> (5, K, Nq) onto degree-N polynomials."""
    fq = np.asarray(fn(geom.xq, geom.yq), float)
    wJ = ref.quad.weights * geom.J
    moments = (fq * wJ) @ ref.Vq
    out = moments / geom.J[:, :1]  # affine shortcut: M = J * I
    curved = np.flatnonzero(~geom.affine)
    for k in curved:
        M = ref.Vq.T @ (wJ[k][:, None] * ref.Vq)
        out[:, k] = np.linalg.solve(M, moments[:, k].T).T
    return out


@dataclass
class ErrorRecord:
    N: int
    h: float
    flux: str
    field_errors: np.ndarray     # absolute L2 error per field
    field_norms: np.ndarray      # L2 norm of the exact field
    runtime: float = 0.0
    extra: dict = field(default_factory=dict)

    def _ratio(self, sl) -> float:
        num, den = np.sum(self.field_errors[sl] ** 2), np.sum(self.field_norms[sl] ** 2)
        # an identically zero exact field has no relative error
        return float(np.sqrt(num / den)) if den > 0 else float("nan")

    @property
    def relative(self) -> float:
        return self._ratio(slice(None))

    @property
    def velocity_relative(self) -> float:
        return self._ratio(slice(0, 2))

    @property
    def stress_relative(self) -> float:
        return self._ratio(slice(2, None))


def l2_error(Q: np.ndarray, exact: Callable | None, t: float, ref: ReferenceElement, geom,
             N: int | None = None, h: float = float("nan"), flux: str = "") -> ErrorRecord:
    """Per-field and combined relative L2 errors by volume quadrature."""
    if exact is None:
        raise ValueError("scenario has no exact solution")
    uq = Q @ ref.Vq.T
    ex = np.asarray(exact(geom.xq, geom.yq, t), float)
    wJ = ref.quad.weights * geom.J
    err = np.sqrt(np.sum((uq - ex) ** 2 * wJ, axis=(1, 2)))
    nrm = np.sqrt(np.sum(ex ** 2 * wJ, axis=(1, 2)))
    return ErrorRecord(ref.N if N is None else N, h, flux, err, nrm)


def sample_points(Q: np.ndarray, ref: ReferenceElement, mesh, geom, x, y) -> np.ndarray:
    """Evaluate the modal state at arbitrary points; returns (5, npts).

    Points on shared edges take the value from the lowest-numbered element.
    """
    pts = np.column_stack([np.ravel(x), np.ravel(y)]).astype(float)
    elem = np.empty(len(pts), int)
    rs = np.empty((len(pts), 2))
    if mesh.is_affine:
        v = mesh.vertices[mesh.EToV]
        e1, e2 = v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]
        det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        tol = 1e-12
        for lo in range(0, len(pts), 2048):
            p = pts[lo:lo + 2048]
            d = p[:, None, :] - v[None, :, 0]
            l1 = (d[..., 0] * e2[:, 1] - d[..., 1] * e2[:, 0]) / det
            l2 = (e1[:, 0] * d[..., 1] - e1[:, 1] * d[..., 0]) / det
            inside = (l1 >= -tol) & (l2 >= -tol) & (l1 + l2 <= 1 + tol)
            if not inside.any(axis=1).all():
                bad = p[~inside.any(axis=1)][0]
                raise ValueError(f"point {tuple(bad)} is outside the mesh")
            k = inside.argmax(axis=1)
            i = np.arange(len(p))
            elem[lo:lo + 2048] = k
            rs[lo:lo + 2048] = np.column_stack([2 * l1[i, k] - 1, 2 * l2[i, k] - 1])
    else:
        for i, p in enumerate(pts):
            elem[i], rs[i] = locate_point(mesh, geom, ref, p)
    V = basis(ref.N, rs[:, 0], rs[:, 1])  # (npts, Np)
    return np.einsum("fpn,pn->fp", Q[:, elem], V)


def sample_grid(Q: np.ndarray, ref: ReferenceElement, mesh, geom, nx: int, ny: int):
    """Values on a uniform nx-by-ny grid spanning the mesh bounding box."""
    x0, x1, y0, y1 = mesh.bbox
    X, Y = np.meshgrid(np.linspace(x0, x1, nx), np.linspace(y0, y1, ny), indexing="xy")
    return X.ravel(), Y.ravel(), sample_points(Q, ref, mesh, geom, X, Y)


def discrete_energy(Q: np.ndarray, rho_q, C_q, ref: ReferenceElement, geom) -> float:
    """1/2 sum_k [(rho v, v) + (C^-1 sigma, sigma)] by quadrature."""
    uq = Q @ ref.Vq.T
    wJ = ref.quad.weights * geom.J
    kin = np.sum(rho_q * (uq[0] ** 2 + uq[1] ** 2) * wJ)
    s = np.moveaxis(uq[2:], 0, -1)  # (K, Nq, 3)
    Cs = np.linalg.solve(C_q, s[..., None])[..., 0]
    pot = np.sum(np.sum(Cs * s, axis=-1) * wJ)
    return 0.5 * float(kin + pot)


def wadg_energy(Q: np.ndarray, op) -> float:
    """Energy in the weight-adjusted inner product, 1/2 Q^T M_wadg Q.

    This is the quantity the semi-discrete scheme provably does not increase;
    it equals discrete_energy when rho and C are constant on each element.
    """
    Minv = op.apply_mass_inverse
    # M_wadg = (apply_mass_inverse)^-1, so Q^T M_wadg Q = Q . X with apply_mass_inverse(X) = Q
    from scipy.sparse.linalg import LinearOperator, cg
    shape = Q.shape
    n = Q.size
    A = LinearOperator((n, n), matvec=lambda x: Minv(x.reshape(shape)).ravel(), dtype=float)
    X, info = cg(A, Q.ravel(), rtol=1e-14, atol=0.0, maxiter=10 * n)
    return 0.5 * float(Q.ravel() @ X)


def assemble_operator(rhs: Callable, shape: tuple[int, ...], max_dof: int = 6000) -> np.ndarray:
    """Dense matrix whose columns are rhs(0, e_j)."""
    n = int(np.prod(shape))
    if n > max_dof:
        raise ValueError(f"{n} unknowns exceeds the dense size guard of {max_dof}")
    A = np.empty((n, n))
    e = np.zeros(n)
    for j in range(n):
        e[j] = 1.0
        A[:, j] = np.asarray(rhs(0.0, e.reshape(shape))).ravel()
        e[j] = 0.0
    return A


@dataclass
class SpectrumRecord:
    eigenvalues: np.ndarray

    @property
    def abscissa(self) -> float:
        return float(np.max(self.eigenvalues.real))

    @property
    def radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))


def spectrum(A: np.ndarray) -> SpectrumRecord:
    lam = np.linalg.eigvals(A)
    return SpectrumRecord(lam[np.lexsort((lam.imag, lam.real))])


@dataclass
class Rates:
    h: np.ndarray
    errors: np.ndarray
    pairwise: np.ndarray
    fitted: float


def convergence_rates(h: Sequence[float], errors: Sequence[float]) -> Rates:
    h = np.asarray(h, float)
    e = np.asarray(errors, float)
    if len(h) != len(e) or len(h) < 2:
        raise ValueError("need at least two (h, error) pairs")
    if np.any(e <= 0) or np.any(h <= 0):
        raise ValueError("errors and mesh sizes must be positive")
    pairwise = np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])
    fitted = np.polyfit(np.log(h), np.log(e), 1)[0]
    return Rates(h, e, pairwise, float(fitted))


def common_rate(h: Sequence[float], series: Sequence[Sequence[float]]) -> float:
    """Single slope shared by several error series on the same meshes, one intercept each."""
    lh = np.log(np.asarray(h, float))
    E = np.log(np.asarray(series, float))
    if E.ndim != 2 or E.shape[1] != len(lh) or len(lh) < 2:
        raise ValueError("series must be a list of error lists matching h")
    m = len(E)
    A = np.zeros((m * len(lh), m + 1))
    A[:, 0] = np.tile(lh, m)
    A[np.arange(m * len(lh)), 1 + np.repeat(np.arange(m), len(lh))] = 1.0
    coef = np.linalg.lstsq(A, E.ravel(), rcond=None)[0]
    return float(coef[0])
