"""Density and stiffness fields in Voigt form (xx, yy, xy)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class MaterialError(ValueError):
    pass


def isotropic_C(lam, mu) -> np.ndarray:
    """Stiffness matrices for Lame parameters; broadcasts to (..., 3, 3)."""
    lam, mu = np.broadcast_arrays(np.asarray(lam, float), np.asarray(mu, float))
    C = np.zeros(lam.shape + (3, 3))
    C[..., 0, 0] = C[..., 1, 1] = 2 * mu + lam
    C[..., 0, 1] = C[..., 1, 0] = lam
    C[..., 2, 2] = mu
    return C


def isotropic_Cinv(lam, mu) -> np.ndarray:
    """Closed-form compliance 1/(4 mu^2 + 4 mu lam) [[2mu+lam, -lam, 0], ...].

    The normal-stress block has determinant (2mu+lam)^2 - lam^2 = 4 mu (mu + lam).
    """
    lam, mu = np.broadcast_arrays(np.asarray(lam, float), np.asarray(mu, float))
    d = 4 * mu ** 2 + 4 * mu * lam
    S = np.zeros(lam.shape + (3, 3))
    S[..., 0, 0] = S[..., 1, 1] = (2 * mu + lam) / d
    S[..., 0, 1] = S[..., 1, 0] = -lam / d
    S[..., 2, 2] = 1.0 / mu
    return S


def _const(v):
    return v if callable(v) else (lambda x, y, _v=float(v): np.full(np.shape(x), _v))


@dataclass
class Material:
    """rho(x, y) and C(x, y) -> (..., 3, 3); constants are allowed for rho."""
    rho: Callable | float
    stiffness: Callable

    def sample(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        rho = np.broadcast_to(_const(self.rho)(x, y), x.shape).astype(float)
        C = np.broadcast_to(self.stiffness(x, y), x.shape + (3, 3)).astype(float)
        return rho, C


def isotropic(rho=1.0, lam=1.0, mu=1.0) -> Material:
    lam_f, mu_f = _const(lam), _const(mu)
    return Material(rho, lambda x, y: isotropic_C(lam_f(x, y), mu_f(x, y)))


def piecewise(mask: Callable, inside: Material, outside: Material) -> Material:
    """inside where mask(x, y) is true, outside elsewhere."""
    def rho(x, y):
        return np.where(mask(x, y), inside.sample(x, y)[0], outside.sample(x, y)[0])

    def stiffness(x, y):
        m = np.asarray(mask(x, y))[..., None, None]
        return np.where(m, inside.sample(x, y)[1], outside.sample(x, y)[1])
    return Material(rho, stiffness)


def anisotropic(rho, C) -> Material:
    C = np.asarray(C, float)
    return Material(rho, lambda x, y: np.broadcast_to(C, np.shape(x) + (3, 3)))


def validate(rho: np.ndarray, C: np.ndarray) -> None:
    if not np.all(np.isfinite(rho)) or not np.all(np.isfinite(C)):
        raise MaterialError("material values must be finite")
    if np.any(rho <= 0):
        raise MaterialError("density must be positive")
    if not np.allclose(C, np.swapaxes(C, -1, -2), rtol=1e-12, atol=1e-14 * np.abs(C).max()):
        raise MaterialError("stiffness must be symmetric")
    lmin = np.linalg.eigvalsh(C.reshape(-1, 3, 3)).min()
    if lmin <= 0:
        raise MaterialError(f"stiffness is not positive definite (min eigenvalue {lmin:.3e})")


def sample_at_quadrature(material: Material, geom) -> tuple[np.ndarray, np.ndarray]:
    rho, C = material.sample(geom.xq, geom.yq)
    validate(rho, C)
    return rho, C


def sup_norm(C: np.ndarray) -> float:
    """Largest spectral norm of the sampled stiffness matrices."""
    return float(np.linalg.eigvalsh(C.reshape(-1, 3, 3)).max())


def random_spd(shape, dmin: float, dmax: float, rng: np.random.Generator) -> np.ndarray:
    """C = U D U^T with D ~ U[dmin, dmax] and U the sign-fixed QR factor of a Gaussian."""
    if not (0 < dmin <= dmax):
        raise MaterialError("need 0 < dmin <= dmax")
    n = int(np.prod(shape))
    G = rng.standard_normal((n, 3, 3))
    Q, R = np.linalg.qr(G)
    Q = Q * np.sign(np.diagonal(R, axis1=1, axis2=2))[:, None, :]
    D = rng.uniform(dmin, dmax, (n, 3))
    C = np.einsum("nij,nj,nkj->nik", Q, D, Q)
    C = 0.5 * (C + np.swapaxes(C, 1, 2))
    return C.reshape(tuple(shape) + (3, 3))
