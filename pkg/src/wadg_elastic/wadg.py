"""Weight-adjusted mass matrix inverses applied matrix-free through quadrature.

Coefficient arrays are laid out as (..., K, Np) for scalar fields and
(3, K, Np) for Voigt stress fields.  Weights are sampled at volume
quadrature points: (K, Nq) for scalars, (K, Nq, 3, 3) for matrices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .reference_element import ReferenceElement


def _check_positive(w):
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("weight must be positive and finite at every quadrature point")


def apply_weighted_mass(ref: ReferenceElement, u, weight, J):
    """M_w u, the exact (quadrature) weighted mass matrix applied to u."""
    u = np.asarray(u, float)
    wJ = ref.quad.weights * J
    if np.ndim(weight) == 2 or np.isscalar(weight):
        uq = u @ ref.Vq.T
        return (uq * (weight * wJ)) @ ref.Vq
    if u.shape[0] != 3:
        raise ValueError("matrix weight needs three fields")
    uq = u @ ref.Vq.T
    wu = np.einsum("kqij,jkq->ikq", weight, uq)
    return (wu * wJ) @ ref.Vq


def apply_wadg_inverse_scalar(ref: ReferenceElement, rhs, w, J):
    """M^-1 M_{1/w} M^-1 rhs with the Jacobian folded into the middle weight.

    For affine elements this equals (1/J) Pq diag(1/w) Vq (1/J) Mhat^-1 rhs.
    """
    _check_positive(w)
    return ((rhs @ ref.Vq.T) / (w * J)) @ ref.Pq.T


def apply_wadg_inverse_matrix(ref: ReferenceElement, rhs, C, J):
    """(I x M^-1) M_C (I x M^-1) rhs, with C/J applied pointwise at quadrature."""
    rhs = np.asarray(rhs, float)
    if rhs.shape[0] != 3:
        raise ValueError("matrix weight needs three fields")
    rq = rhs @ ref.Vq.T
    out = np.einsum("kqij,jkq->ikq", C / J[..., None, None], rq)
    return out @ ref.Pq.T


def assemble_weighted_mass_dense(ref: ReferenceElement, weight, J) -> np.ndarray:
    """Dense weighted mass matrices per element: (K, Np, Np) or (K, 3Np, 3Np).

    Matrix weights produce 3x3 blocks of Np x Np matrices, block (i,j)
    weighted by the (i,j) entry of the weight.
    """
    wJ = ref.quad.weights * J
    Vq = ref.Vq
    if np.ndim(weight) == 2:
        return np.einsum("qi,kq,qj->kij", Vq, weight * wJ, Vq)
    K = weight.shape[0]
    Np = ref.Np
    blocks = np.einsum("qa,kqij,kq,qb->kiajb", Vq, weight, wJ, Vq)
    return blocks.reshape(K, 3 * Np, 3 * Np)


def wadg_dense_matrix(ref: ReferenceElement, C, J) -> np.ndarray:
    """The matrix-weighted WADG inverse stored as a dense (3Np)^2 block per element."""
    K = C.shape[0]
    Np = ref.Np
    # Pq diag(C/J) Vq per block pair
    blocks = np.einsum("aq,kqij,qb->kiajb", ref.Pq, C / J[..., None, None], ref.Vq)
    return blocks.reshape(K, 3 * Np, 3 * Np)


def apply_dense(mats: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Apply per-element dense blocks to a (3, K, Np) field."""
    nf, K, Np = rhs.shape
    x = rhs.transpose(1, 0, 2).reshape(K, nf * Np, 1)
    y = np.matmul(mats, x)[..., 0]
    return y.reshape(K, nf, Np).transpose(1, 0, 2)


@dataclass
class PropertyReport:
    projection_error: float    # max |T_W^-1 T_W v - v| / |v|
    bound_lo: float
    bound_hi: float
    ratios: np.ndarray         # (T_W^-1 v, v) / |v|^2 per sample
    bounds_ok: bool


def operator_property_suite(ref: ReferenceElement, W: np.ndarray, n_samples: int = 100,
                            rng: np.random.Generator | None = None, slack: float = 1e-10) -> PropertyReport:
    """Numerical check of the weight-adjusted operator properties on the reference element.

    W has shape (Nq, 3, 3).  T_W v = Pi_N(W v) and T_W^-1 v = M_W^-1 M v.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    Np = ref.Np
    Wk = W[None]
    J = np.ones((1, ref.Nq))
    MW = assemble_weighted_mass_dense(ref, Wk, J)[0]
    Mblk = np.kron(np.eye(3), ref.Mhat)
    Winv_eigs = np.linalg.eigvalsh(np.linalg.inv(W))
    lo, hi = Winv_eigs.min(), Winv_eigs.max()
    errs, ratios = [], []
    for _ in range(n_samples):
        v = rng.standard_normal((3, 1, Np))
        TWv = np.einsum("qij,jkq->ikq", W, v @ ref.Vq.T) @ ref.Pq.T
        x = TWv[:, 0, :].ravel()
        back = np.linalg.solve(MW, Mblk @ x)
        vv = v[:, 0, :].ravel()
        errs.append(np.linalg.norm(back - vv) / np.linalg.norm(vv))
        Tinv_v = np.linalg.solve(MW, Mblk @ vv)
        ratios.append(float(vv @ Mblk @ Tinv_v) / float(vv @ Mblk @ vv))
    ratios = np.array(ratios)
    ok = bool(np.all(ratios >= lo - slack) and np.all(ratios <= hi + slack))
    return PropertyReport(float(max(errs)), float(lo), float(hi), ratios, ok)
