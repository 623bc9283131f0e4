"""Semi-discrete DG right-hand side for the velocity-stress system.

State arrays have shape (5, K, Np) holding modal coefficients of
(v1, v2, sxx, syy, sxy).  Volume terms use the strong form on affine
elements and the skew-symmetric form (stress equation integrated by parts)
on curved elements; both are followed by the weight-adjusted mass inverse.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .mesh import BoundaryTag, Geometry, Mesh
from .reference_element import ReferenceElement, basis

NFIELDS = 5
FIELD_NAMES = ("v1", "v2", "sxx", "syy", "sxy")

A1 = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])
A2 = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]])


def normal_matrix(n) -> np.ndarray:
    nx, ny = n
    return np.array([[nx, 0.0], [0.0, ny], [ny, nx]])


def _An(nx, ny, a1, a2):
    """A_n applied to a velocity-like 2-vector."""
    return nx * a1, ny * a2, ny * a1 + nx * a2


def _AnT(nx, ny, s0, s1, s2):
    """A_n^T applied to a Voigt stress-like 3-vector (the traction)."""
    return nx * s0 + ny * s2, ny * s1 + nx * s2


@dataclass
class FluxSpec:
    """Penalty parameters; scalars or per-face arrays of shape (K, 3)."""
    tau_v: float | np.ndarray = 1.0
    tau_sigma: float | np.ndarray = 1.0

    @classmethod
    def central(cls) -> "FluxSpec":
        return cls(0.0, 0.0)

    @classmethod
    def penalty(cls, tau: float = 1.0) -> "FluxSpec":
        return cls(tau, tau)

    @classmethod
    def scaled(cls, mesh: Mesh, rho_q, C_q, gamma_v=1.0, gamma_sigma=1.0) -> "FluxSpec":
        """tau_v = gamma_v sqrt(|<C>| <rho>), tau_sigma = gamma_sigma / sqrt(|<C>| <rho>) per face.

        Element maxima stand in for face values; averages are over the two
        elements sharing the face.
        """
        cmax = np.linalg.eigvalsh(C_q).max(axis=(1, 2))
        rmax = rho_q.max(axis=1)
        Cavg = 0.5 * (cmax[:, None] + cmax[mesh.etoe])
        ravg = 0.5 * (rmax[:, None] + rmax[mesh.etoe])
        s = np.sqrt(Cavg * ravg)
        return cls(gamma_v * s, gamma_sigma / s)

    def validate(self):
        for tau in (self.tau_v, self.tau_sigma):
            if np.any(np.asarray(tau) < 0) or not np.all(np.isfinite(tau)):
                raise ValueError("penalty parameters must be nonnegative")


def _zero_pair(x, y, t, *args):
    z = np.zeros_like(x)
    return z, z


@dataclass
class BoundaryData:
    """Boundary values: velocity(x, y, t) and traction(x, y, t, nx, ny), each -> (c1, c2).

    ``state(x, y, t) -> (5, ...)`` supplies the full exterior state for
    EXACT faces.
    """
    velocity: Callable = _zero_pair
    traction: Callable = _zero_pair
    state: Callable | None = None


def boundary_jumps(tag: BoundaryTag, vM, TM, v_bc=None, t_bc=None):
    """Modified jumps ([v], A_n^T[sigma]) on a boundary face.

    vM and TM are the interior velocity and traction A_n^T sigma^-, each a
    pair of arrays.  Returns (dv, dT) as pairs.
    """
    if tag == BoundaryTag.TRACTION:
        if t_bc is None:
            t_bc = (0.0, 0.0)
        return ((np.zeros_like(vM[0]), np.zeros_like(vM[1])),
                (2 * (t_bc[0] - TM[0]), 2 * (t_bc[1] - TM[1])))
    if tag == BoundaryTag.VELOCITY:
        if v_bc is None:
            raise ValueError("velocity boundary needs boundary data")
        return ((2 * (v_bc[0] - vM[0]), 2 * (v_bc[1] - vM[1])),
                (np.zeros_like(TM[0]), np.zeros_like(TM[1])))
    if tag == BoundaryTag.ABSORBING:
        return (-vM[0], -vM[1]), (-TM[0], -TM[1])
    if tag == BoundaryTag.EXACT:
        # exterior state prescribed: ordinary jumps against the given trace
        if v_bc is None or t_bc is None:
            raise ValueError("exact boundary needs velocity and traction data")
        return ((v_bc[0] - vM[0], v_bc[1] - vM[1]), (t_bc[0] - TM[0], t_bc[1] - TM[1]))
    raise ValueError(f"no boundary rule for tag {BoundaryTag(tag).name}")


def ricker(t, f0, t0):
    a = (np.pi * f0 * (np.asarray(t) - t0)) ** 2
    return (1 - 2 * a) * np.exp(-a)


def locate_point(mesh: Mesh, geom: Geometry, ref: ReferenceElement, x0) -> tuple[int, np.ndarray]:
    """Element containing x0 (lowest index on ties) and its reference coordinates."""
    x0 = np.asarray(x0, float)
    v = mesh.vertices[mesh.EToV]
    e1 = v[:, 1] - v[:, 0]
    e2 = v[:, 2] - v[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    d = x0 - v[:, 0]
    l1 = (d[:, 0] * e2[:, 1] - d[:, 1] * e2[:, 0]) / det
    l2 = (e1[:, 0] * d[:, 1] - e1[:, 1] * d[:, 0]) / det
    tol = 1e-12
    inside = (l1 >= -tol) & (l2 >= -tol) & (l1 + l2 <= 1 + tol)
    if mesh.curved_nodes is not None:
        inside = np.ones(mesh.K, bool)  # try Newton on every element, nearest first
    cand = np.flatnonzero(inside)
    if mesh.curved_nodes is None:
        if len(cand) == 0:
            raise ValueError(f"point {tuple(x0)} is outside the mesh")
        k = int(cand[0])
        return k, np.array([2 * l1[k] - 1, 2 * l2[k] - 1])
    cent = v.mean(axis=1)
    for k in np.argsort(np.hypot(*(cent - x0).T), kind="stable")[:20]:
        rs = np.array([2 * l1[k] - 1, 2 * l2[k] - 1])
        c = geom.coords[:, k]
        from .reference_element import basis_grad
        for _ in range(30):
            V = basis(ref.N, rs[:1], rs[1:])
            Vr, Vs = basis_grad(ref.N, rs[:1], rs[1:])
            xy = (V @ c.T)[0]
            Jm = np.array([[Vr @ c[0], Vs @ c[0]], [Vr @ c[1], Vs @ c[1]]])[..., 0]
            step = np.linalg.solve(Jm, xy - x0)
            rs = rs - step
            if np.abs(step).max() < 1e-14:
                break
        if rs.min() >= -1 - 1e-10 and rs.sum() <= 1e-10:
            return int(k), rs
    raise ValueError(f"point {tuple(x0)} is outside the mesh")


class Source:
    """Base class; subclasses add moments to the velocity/stress right-hand side."""

    def setup(self, op: "ElasticOperator") -> None:
        pass

    def moments(self, op: "ElasticOperator", t: float, R: np.ndarray) -> None:
        pass

    def stress_rate(self, op: "ElasticOperator", t: float) -> np.ndarray | None:
        return None


@dataclass
class RickerPoint(Source):
    """Point source w(x0) beta with Ricker time dependence; beta has 5 components."""
    x0: Sequence[float]
    f0: float
    t0: float
    beta: Sequence[float] = (0.0, 1.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.f0 <= 0 or self.t0 < 0:
            raise ValueError("need f0 > 0 and t0 >= 0")

    def setup(self, op):
        k, rs = locate_point(op.mesh, op.geom, op.ref, self.x0)
        self._k = k
        self._phi = basis(op.ref.N, rs[:1], rs[1:])[0]

    def moments(self, op, t, R):
        amp = ricker(t, self.f0, self.t0)
        R[:, self._k, :] += amp * np.asarray(self.beta, float)[:, None] * self._phi[None, :]


@dataclass
class RickerSmoothed(Source):
    """Gaussian-smoothed Ricker source exp(-(a|x-x0|)^2) beta, integrated by quadrature."""
    x0: Sequence[float]
    f0: float
    t0: float
    a: float
    beta: Sequence[float] = (0.0, 1.0, 0.0, 0.0, 0.0)

    def setup(self, op):
        g = np.exp(-(self.a ** 2) * ((op.geom.xq - self.x0[0]) ** 2 + (op.geom.yq - self.x0[1]) ** 2))
        self._m = (g * op.wJ) @ op.ref.Vq

    def moments(self, op, t, R):
        amp = ricker(t, self.f0, self.t0)
        R += amp * np.asarray(self.beta, float)[:, None, None] * self._m[None]


@dataclass
class StressRateSource(Source):
    """Additive term in d(sigma)/dt sampled at quadrature: fn(x, y, t) -> (3, K, Nq)."""
    fn: Callable

    def stress_rate(self, op, t):
        return self.fn(op.geom.xq, op.geom.yq, t) @ op.ref.Pq.T


def point_source_contribution(x0, beta, ref: ReferenceElement, mesh: Mesh, geom: Geometry) -> np.ndarray:
    """Coefficient increments beta (x) M^-1 phi(x0), shape (5, K, Np)."""
    k, rs = locate_point(mesh, geom, ref, x0)
    phi = basis(ref.N, rs[:1], rs[1:])[0]
    M = ref.Vq.T @ ((ref.quad.weights * geom.J[k])[:, None] * ref.Vq)
    inc = np.zeros((NFIELDS, mesh.K, ref.Np))
    inc[:, k, :] = np.asarray(beta, float)[:, None] * np.linalg.solve(M, phi)[None, :]
    return inc


class ElasticOperator:
    """dQ/dt for Q of shape (5, K, Np)."""

    def __init__(self, ref: ReferenceElement, mesh: Mesh, geom: Geometry, rho_q, C_q,
                 flux: FluxSpec | None = None, bc: BoundaryData | None = None,
                 sources: Sequence[Source] = (), form: str = "auto"):
        self.ref, self.mesh, self.geom = ref, mesh, geom
        self.rho_q, self.C_q = rho_q, C_q
        self.flux = flux or FluxSpec()
        self.flux.validate()
        self.bc = bc or BoundaryData()
        self.sources = list(sources)
        K, Np, Nfq = mesh.K, ref.Np, ref.Nfq
        F = 3 * Nfq
        self.K, self.Np, self.F = K, Np, F

        if form == "auto":
            skew = ~geom.affine
        elif form == "strong":
            if not np.all(geom.affine):
                raise ValueError("strong form requires affine elements")
            skew = np.zeros(K, bool)
        elif form == "skew":
            skew = np.ones(K, bool)
        else:
            raise ValueError(f"unknown form {form!r}")
        self.skew = skew
        self.strong_idx = np.flatnonzero(~skew)
        self.skew_idx = np.flatnonzero(skew)

        self.VqT = np.ascontiguousarray(ref.Vq.T)
        self.PqT = np.ascontiguousarray(ref.Pq.T)
        self.VfT = np.ascontiguousarray(ref.Vfq.reshape(F, Np).T)
        self.Vf = np.ascontiguousarray(ref.Vfq.reshape(F, Np))
        self.wJ = ref.quad.weights * geom.J
        self.sJw = geom.Jf.reshape(K, F) * np.tile(ref.face_quad.weights, 3)
        self.nx = geom.nx.reshape(K, F)
        self.ny = geom.ny.reshape(K, F)
        self.mapP = geom.mapP.reshape(-1)

        def per_point(tau):
            tau = np.asarray(tau, float)
            return np.repeat(tau, Nfq, axis=1) if tau.ndim == 2 else tau
        self.tau_v = per_point(self.flux.tau_v)
        self.tau_s = per_point(self.flux.tau_sigma)

        # weight-adjusted inverse weights with the Jacobian folded in
        self.w_v = 1.0 / (rho_q * geom.J)
        self.W_s = C_q / geom.J[..., None, None]

        # affine factors are constant per element
        s = self.strong_idx
        self.aff = dict(rx=geom.rx[s, :1], sx=geom.sx[s, :1], ry=geom.ry[s, :1],
                        sy=geom.sy[s, :1], J=geom.J[s, :1])
        c = self.skew_idx
        wJ = self.wJ[c]
        self.crv = dict(Grx=wJ * geom.rx[c], Gsx=wJ * geom.sx[c], Gry=wJ * geom.ry[c],
                        Gsy=wJ * geom.sy[c])
        self.skew_pts = np.repeat(skew[:, None], F, axis=1)

        tags = np.repeat(mesh.tags, Nfq, axis=1)  # (K, F)
        self.bnd = {}
        for tag in (BoundaryTag.TRACTION, BoundaryTag.VELOCITY, BoundaryTag.ABSORBING, BoundaryTag.EXACT):
            idx = np.flatnonzero(tags == tag)
            if len(idx):
                self.bnd[tag] = idx
        self._xf = geom.xf.reshape(-1)
        self._yf = geom.yf.reshape(-1)
        for src in self.sources:
            src.setup(self)

    # -- traces -----------------------------------------------------------
    def surface_traces(self, Q):
        """Interior and exterior values at face quadrature points, each (5, K, F)."""
        QM = Q @ self.VfT
        QP = QM.reshape(NFIELDS, -1)[:, self.mapP].reshape(QM.shape)
        return QM, QP

    def jumps(self, Q, t):
        """Velocity jump and traction jump A_n^T[sigma] with boundary rules applied."""
        QM, QP = self.surface_traces(Q)
        nx, ny = self.nx, self.ny
        dQ = QP - QM
        dv1, dv2 = dQ[0], dQ[1]
        dT1, dT2 = _AnT(nx, ny, dQ[2], dQ[3], dQ[4])
        if self.bnd:
            dv1, dv2, dT1, dT2 = (a.reshape(-1) for a in (dv1, dv2, dT1, dT2))
            vM = QM[:2].reshape(2, -1)
            TM1, TM2 = _AnT(nx.reshape(-1), ny.reshape(-1), *QM[2:].reshape(3, -1))
            for tag, idx in self.bnd.items():
                x, y = self._xf[idx], self._yf[idx]
                vb = tb = None
                if tag == BoundaryTag.VELOCITY:
                    vb = self.bc.velocity(x, y, t)
                elif tag == BoundaryTag.TRACTION:
                    tb = self.bc.traction(x, y, t, nx.reshape(-1)[idx], ny.reshape(-1)[idx])
                elif tag == BoundaryTag.EXACT:
                    if self.bc.state is None:
                        raise ValueError("exact boundary faces need BoundaryData.state")
                    U = self.bc.state(x, y, t)
                    vb = (U[0], U[1])
                    tb = _AnT(nx.reshape(-1)[idx], ny.reshape(-1)[idx], U[2], U[3], U[4])
                (a1, a2), (b1, b2) = boundary_jumps(tag, (vM[0, idx], vM[1, idx]),
                                                    (TM1[idx], TM2[idx]), vb, tb)
                dv1[idx], dv2[idx], dT1[idx], dT2[idx] = a1, a2, b1, b2
            shape = QM.shape[1:]
            dv1, dv2, dT1, dT2 = (a.reshape(shape) for a in (dv1, dv2, dT1, dT2))
        return QM, (dv1, dv2), (dT1, dT2)

    # -- right-hand side ---------------------------------------------------
    def surface_flux(self, QM, dv, dT):
        """Face integrands for the five equations; reads only traces and penalties."""
        nx, ny = self.nx, self.ny
        dv1, dv2 = dv
        dT1, dT2 = dT
        tv, ts = 0.5 * self.tau_v, 0.5 * self.tau_s
        Av = _An(nx, ny, dv1, dv2)
        AtAv = _AnT(nx, ny, *Av)
        fv1 = 0.5 * dT1 + tv * AtAv[0]
        fv2 = 0.5 * dT2 + tv * AtAv[1]
        AT = _An(nx, ny, dT1, dT2)
        fs = [0.5 * a + ts * b for a, b in zip(Av, AT)]
        if len(self.skew_idx):
            # integrated-by-parts stress equation sees A_n <v> instead of A_n [v] / 2
            Avm = _An(nx, ny, QM[0], QM[1])
            fs = [np.where(self.skew_pts, f + a, f) for f, a in zip(fs, Avm)]
        return np.stack([fv1, fv2, *fs])

    def moments(self, Q, t):
        """Volume plus surface moment vectors, (5, K, Np)."""
        QM, dv, dT = self.jumps(Q, t)
        flux = self.surface_flux(QM, dv, dT)
        R = (flux * self.sJw) @ self.Vf
        ref = self.ref
        s = self.strong_idx
        if len(s):
            Qs = Q if len(s) == self.K else Q[:, s]
            a = self.aff
            Qr = Qs @ ref.Dr.T
            Qt = Qs @ ref.Ds.T
            Qx = a["rx"] * Qr + a["sx"] * Qt
            Qy = a["ry"] * Qr + a["sy"] * Qt
            vol = np.stack([Qx[2] + Qy[4], Qx[4] + Qy[3], Qx[0], Qy[1], Qx[1] + Qy[0]])
            if len(s) == self.K:
                R += a["J"] * vol
            else:
                R[:, s] += a["J"] * vol
        c = self.skew_idx
        if len(c):
            g = self.crv
            Qc = Q[:, c]
            Sr = Qc[2:] @ ref.Vrq.T
            Ss = Qc[2:] @ ref.Vsq.T
            mv1 = g["Grx"] * Sr[0] + g["Gsx"] * Ss[0] + g["Gry"] * Sr[2] + g["Gsy"] * Ss[2]
            mv2 = g["Grx"] * Sr[2] + g["Gsx"] * Ss[2] + g["Gry"] * Sr[1] + g["Gsy"] * Ss[1]
            vq = Qc[:2] @ self.VqT
            Vr, Vs = ref.Vrq, ref.Vsq
            ms0 = -((g["Grx"] * vq[0]) @ Vr + (g["Gsx"] * vq[0]) @ Vs)
            ms1 = -((g["Gry"] * vq[1]) @ Vr + (g["Gsy"] * vq[1]) @ Vs)
            ms2 = -((g["Grx"] * vq[1] + g["Gry"] * vq[0]) @ Vr + (g["Gsx"] * vq[1] + g["Gsy"] * vq[0]) @ Vs)
            R[:, c] += np.stack([mv1 @ ref.Vq, mv2 @ ref.Vq, ms0, ms1, ms2])
        for src in self.sources:
            src.moments(self, t, R)
        return R

    def apply_mass_inverse(self, R):
        out = np.empty_like(R)
        out[:2] = ((R[:2] @ self.VqT) * self.w_v) @ self.PqT
        rq = R[2:] @ self.VqT
        W = self.W_s
        s0 = W[..., 0, 0] * rq[0] + W[..., 0, 1] * rq[1] + W[..., 0, 2] * rq[2]
        s1 = W[..., 1, 0] * rq[0] + W[..., 1, 1] * rq[1] + W[..., 1, 2] * rq[2]
        s2 = W[..., 2, 0] * rq[0] + W[..., 2, 1] * rq[1] + W[..., 2, 2] * rq[2]
        out[2:] = np.stack([s0, s1, s2]) @ self.PqT
        return out

    def __call__(self, t, Q):
        dQ = self.apply_mass_inverse(self.moments(Q, t))
        for src in self.sources:
            extra = src.stress_rate(self, t)
            if extra is not None:
                dQ[2:] += extra
        return dQ

    def without_sources(self) -> Callable:
        saved = self.sources

        def f(t, Q):
            self.sources = []
            try:
                return self(t, Q)
            finally:
                self.sources = saved
        return f


def rhs_strong(op: ElasticOperator, Q, t=0.0):
    if not np.all(op.geom.affine):
        raise ValueError("strong form requires affine elements")
    if len(op.skew_idx):
        op = ElasticOperator(op.ref, op.mesh, op.geom, op.rho_q, op.C_q, op.flux, op.bc, op.sources, "strong")
    return op(t, Q)


def rhs_skew(op: ElasticOperator, Q, t=0.0):
    if len(op.strong_idx):
        op = ElasticOperator(op.ref, op.mesh, op.geom, op.rho_q, op.C_q, op.flux, op.bc, op.sources, "skew")
    return op(t, Q)
