"""Reference triangle, orthonormal modal basis and quadrature-based operators.

The reference triangle has vertices (-1,-1), (1,-1), (-1,1).  Faces are
numbered 0: s=-1, 1: r+s=0, 2: r=-1, each traversed counterclockwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import eval_jacobi, gammaln, roots_jacobi

N_MIN, N_MAX = 1, 7


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray   # (n, dim)
    weights: np.ndarray  # (n,)

    @property
    def size(self) -> int:
        return len(self.weights)


def gauss_rule(n: int, alpha: float = 0.0, beta: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Jacobi rule for the weight (1-x)^alpha (1+x)^beta on [-1,1]."""
    if n < 1:
        raise ValueError("need at least one point")
    if alpha <= -1 or beta <= -1:
        raise ValueError("Jacobi parameters must exceed -1")
    x, w = roots_jacobi(n, alpha, beta)
    return np.asarray(x, float), np.asarray(w, float)


def jacobi_normalized(x, n: int, alpha: float, beta: float) -> np.ndarray:
    """Jacobi polynomial normalized to unit norm in the (alpha,beta) weighted L2."""
    x = np.asarray(x, float)
    lognorm = ((alpha + beta + 1) * np.log(2.0) - np.log(2 * n + alpha + beta + 1)
               + gammaln(n + alpha + 1) + gammaln(n + beta + 1)
               - gammaln(n + alpha + beta + 1) - gammaln(n + 1))
    return eval_jacobi(n, alpha, beta, x) / np.exp(0.5 * lognorm)


def jacobi_normalized_deriv(x, n: int, alpha: float, beta: float) -> np.ndarray:
    x = np.asarray(x, float)
    if n == 0:
        return np.zeros_like(x)
    return np.sqrt(n * (n + alpha + beta + 1.0)) * jacobi_normalized(x, n - 1, alpha + 1, beta + 1)


def triangle_quadrature(degree: int) -> QuadratureRule:
    """Collapsed-coordinate rule exact for polynomials of total degree <= degree.

    Tensor product of Gauss-Legendre in a and Gauss-Jacobi(1,0) in b with
    degree//2 + 1 points in each direction.  All weights are positive.
    """
    n = degree // 2 + 1
    a, wa = gauss_rule(n, 0.0, 0.0)
    b, wb = gauss_rule(n, 1.0, 0.0)
    A, B = np.meshgrid(a, b, indexing="ij")
    r = 0.5 * (1 + A) * (1 - B) - 1
    s = B
    w = 0.5 * np.outer(wa, wb)
    return QuadratureRule(np.column_stack([r.ravel(), s.ravel()]), w.ravel())


def face_quadrature(n: int) -> QuadratureRule:
    x, w = gauss_rule(n)
    return QuadratureRule(x[:, None], w)


# face parametrization t in [-1,1] -> (r, s), and d(r,s)/dt
_FACE_MAPS = (
    (lambda t: (t, -np.ones_like(t)), (1.0, 0.0)),
    (lambda t: (-t, t), (-1.0, 1.0)),
    (lambda t: (-np.ones_like(t), -t), (0.0, -1.0)),
)
FACE_VERTICES = ((0, 1), (1, 2), (2, 0))


def face_points(t: np.ndarray) -> np.ndarray:
    """Reference coordinates of parameter values t on every face, shape (3, n, 2)."""
    return np.stack([np.column_stack(fmap(t)) for fmap, _ in _FACE_MAPS])


def face_tangents() -> np.ndarray:
    return np.array([d for _, d in _FACE_MAPS])


def _collapse(r, s):
    r = np.asarray(r, float)
    s = np.asarray(s, float)
    denom = 1.0 - s
    safe = np.abs(denom) > 1e-14
    a = np.where(safe, 2.0 * (1.0 + r) / np.where(safe, denom, 1.0) - 1.0, -1.0)
    return a, s


def mode_indices(N: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(N + 1) for j in range(N + 1 - i)]


def basis(N: int, r, s) -> np.ndarray:
    """Orthonormal Dubiner basis evaluated at (r,s); returns (npts, Np)."""
    a, b = _collapse(r, s)
    cols = []
    for i, j in mode_indices(N):
        h1 = jacobi_normalized(a, i, 0, 0)
        h2 = jacobi_normalized(b, j, 2 * i + 1, 0)
        cols.append(np.sqrt(2.0) * h1 * h2 * (1 - b) ** i)
    return np.column_stack(cols)


def basis_grad(N: int, r, s) -> tuple[np.ndarray, np.ndarray]:
    """r and s derivatives of the basis at (r,s), each (npts, Np)."""
    a, b = _collapse(r, s)
    dr_cols, ds_cols = [], []
    for i, j in mode_indices(N):
        fa = jacobi_normalized(a, i, 0, 0)
        dfa = jacobi_normalized_deriv(a, i, 0, 0)
        gb = jacobi_normalized(b, j, 2 * i + 1, 0)
        dgb = jacobi_normalized_deriv(b, j, 2 * i + 1, 0)
        half = 0.5 * (1 - b)
        dr = dfa * gb
        if i > 0:
            dr = dr * half ** (i - 1)
        ds = dfa * (gb * 0.5 * (1 + a))
        if i > 0:
            ds = ds * half ** (i - 1)
        tmp = dgb * half ** i
        if i > 0:
            tmp = tmp - 0.5 * i * gb * half ** (i - 1)
        ds = ds + fa * tmp
        scale = 2.0 ** (i + 0.5)
        dr_cols.append(scale * dr)
        ds_cols.append(scale * ds)
    return np.column_stack(dr_cols), np.column_stack(ds_cols)


def monomial_integral(p: int, q: int) -> float:
    """Exact integral of (1+r)^p (1+s)^q over the reference triangle."""
    # substitution u=(1+r)/2, v=(1+s)/2 maps onto the unit simplex (Jacobian 4)
    from math import factorial
    return 4.0 * 2.0 ** (p + q) * factorial(p) * factorial(q) / factorial(p + q + 2)


# --- warp & blend interpolation nodes, used for isoparametric geometry ---

_ALPHA_OPT = (0.0, 0.0, 1.4152, 0.1001, 0.2751, 0.9800, 1.0999, 1.2832,
              1.3648, 1.4773, 1.4959, 1.5743, 1.5770, 1.6223, 1.6258)


def _gauss_lobatto(N: int) -> np.ndarray:
    if N == 1:
        return np.array([-1.0, 1.0])
    x, _ = gauss_rule(N - 1, 1.0, 1.0)
    return np.concatenate([[-1.0], x, [1.0]])


def _warp_factor(N: int, rout: np.ndarray) -> np.ndarray:
    lgl = _gauss_lobatto(N)
    req = np.linspace(-1, 1, N + 1)
    Veq = np.column_stack([jacobi_normalized(req, i, 0, 0) for i in range(N + 1)])
    P = np.stack([jacobi_normalized(rout, i, 0, 0) for i in range(N + 1)])
    L = np.linalg.solve(Veq.T, P)
    warp = L.T @ (lgl - req)
    zerof = np.abs(rout) < 1 - 1e-10
    sf = 1.0 - (zerof * rout) ** 2
    return warp / sf + warp * (zerof - 1)


def nodes(N: int) -> np.ndarray:
    """Warp & blend interpolation nodes on the reference triangle, (Np, 2)."""
    alpha = _ALPHA_OPT[N - 1] if N < 16 else 5.0 / 3.0
    L1, L3 = [], []
    for n in range(N + 1):
        for m in range(N + 1 - n):
            L1.append(n / N)
            L3.append(m / N)
    L1 = np.array(L1)
    L3 = np.array(L3)
    L2 = 1.0 - L1 - L3
    x = -L2 + L3
    y = (-L2 - L3 + 2 * L1) / np.sqrt(3.0)
    blend = (4 * L2 * L3, 4 * L1 * L3, 4 * L1 * L2)
    wf = (_warp_factor(N, L3 - L2), _warp_factor(N, L1 - L3), _warp_factor(N, L2 - L1))
    lam = (L1, L2, L3)
    angles = (0.0, 2 * np.pi / 3, 4 * np.pi / 3)
    for bl, w, l, th in zip(blend, wf, lam, angles):
        warp = bl * w * (1 + (alpha * l) ** 2)
        x = x + np.cos(th) * warp
        y = y + np.sin(th) * warp
    l1 = (np.sqrt(3.0) * y + 1) / 3
    l2 = (-3 * x - np.sqrt(3.0) * y + 2) / 6
    l3 = (3 * x - np.sqrt(3.0) * y + 2) / 6
    return np.column_stack([-l2 + l3 - l1, -l2 - l3 + l1])


@dataclass
class ReferenceElement:
    N: int
    Np: int
    quad: QuadratureRule
    face_quad: QuadratureRule
    Vq: np.ndarray        # (Nq, Np)
    Vrq: np.ndarray
    Vsq: np.ndarray
    Mhat: np.ndarray      # (Np, Np), identity up to roundoff
    Pq: np.ndarray        # (Np, Nq)
    Shat_r: np.ndarray    # Shat_r[i, j] = int phi_i d(phi_j)/dr
    Shat_s: np.ndarray
    Dr: np.ndarray        # Mhat^-1 Shat_r
    Ds: np.ndarray
    Vfq: np.ndarray       # (3, Nfq, Np)
    Vfr: np.ndarray
    Vfs: np.ndarray
    Lhat_f: np.ndarray    # (3, Np, Nfq)
    nodes: np.ndarray     # (Np, 2) interpolation nodes
    Vnodes: np.ndarray    # basis at nodes
    face_rs: np.ndarray = field(repr=False, default=None)

    @property
    def Nq(self) -> int:
        return self.quad.size

    @property
    def Nfq(self) -> int:
        return self.face_quad.size


@lru_cache(maxsize=None)
def build_reference_element(N: int, quad_degree: int | None = None) -> ReferenceElement:
    """Reference operators for degree N.  quad_degree defaults to 2N+1."""
    if not (N_MIN <= N <= N_MAX):
        raise ValueError(f"degree N must lie in [{N_MIN}, {N_MAX}], got {N}")
    if quad_degree is None:
        quad_degree = 2 * N + 1
    if quad_degree < 2 * N:
        raise ValueError("quadrature must integrate degree 2N exactly")
    Np = (N + 1) * (N + 2) // 2
    quad = triangle_quadrature(quad_degree)
    r, s = quad.points.T
    Vq = basis(N, r, s)
    Vrq, Vsq = basis_grad(N, r, s)
    W = quad.weights
    Mhat = Vq.T @ (W[:, None] * Vq)
    Minv = np.linalg.inv(Mhat)
    Pq = Minv @ (Vq.T * W)
    Shat_r = Vq.T @ (W[:, None] * Vrq)
    Shat_s = Vq.T @ (W[:, None] * Vsq)

    fq = face_quadrature(N + 1)
    frs = face_points(fq.points[:, 0])
    Vfq = np.stack([basis(N, f[:, 0], f[:, 1]) for f in frs])
    grads = [basis_grad(N, f[:, 0], f[:, 1]) for f in frs]
    Vfr = np.stack([g[0] for g in grads])
    Vfs = np.stack([g[1] for g in grads])
    Lhat_f = np.stack([Minv @ (V.T * fq.weights) for V in Vfq])

    nd = nodes(N)
    return ReferenceElement(
        N=N, Np=Np, quad=quad, face_quad=fq, Vq=Vq, Vrq=Vrq, Vsq=Vsq,
        Mhat=Mhat, Pq=Pq, Shat_r=Shat_r, Shat_s=Shat_s,
        Dr=Minv @ Shat_r, Ds=Minv @ Shat_s, Vfq=Vfq, Vfr=Vfr, Vfs=Vfs,
        Lhat_f=Lhat_f, nodes=nd, Vnodes=basis(N, nd[:, 0], nd[:, 1]), face_rs=frs,
    )
