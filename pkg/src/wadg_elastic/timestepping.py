"""Low-storage RK4(5) time marching and the stable timestep estimate."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

# Carpenter & Kennedy five-stage fourth-order 2N-storage coefficients
RK4A = np.array([
    0.0,
    -567301805773.0 / 1357537059087.0,
    -2404267990393.0 / 2016746695238.0,
    -3550918686646.0 / 2091501179385.0,
    -1275806237668.0 / 842570457699.0,
])
RK4B = np.array([
    1432997174477.0 / 9575080441755.0,
    5161836677717.0 / 13612068292357.0,
    1720146321549.0 / 2090206949498.0,
    3134564353537.0 / 4481467310338.0,
    2277821191437.0 / 14882151754819.0,
])
RK4C = np.array([
    0.0,
    1432997174477.0 / 9575080441755.0,
    2526269341429.0 / 6820363962896.0,
    2006345519317.0 / 3224310063776.0,
    2802321613138.0 / 2924317926251.0,
])


class DivergenceError(RuntimeError):
    pass


def butcher_tableau(a=RK4A, b=RK4B):
    """Equivalent Butcher arrays (A, weights, nodes) of the 2N-storage scheme."""
    s = len(b)
    # stage k increment: dY_k = a_k dY_{k-1} + dt f_k ; y += b_k dY_k
    # so dY_k = sum_j (prod_{m=j+1..k} a_m) f_j
    coef = np.zeros((s, s))
    for k in range(s):
        for j in range(k + 1):
            coef[k, j] = np.prod(a[j + 1:k + 1])
    A = np.zeros((s, s))
    for i in range(1, s):
        for j in range(i):
            A[i, j] = sum(b[k] * coef[k, j] for k in range(j, i))
    w = np.array([sum(b[k] * coef[k, j] for k in range(j, s)) for j in range(s)])
    return A, w, A.sum(axis=1)


def order_conditions(a=RK4A, b=RK4B) -> np.ndarray:
    """Residuals of the eight classical conditions up to order four."""
    A, w, c = butcher_tableau(a, b)
    return np.array([
        w.sum() - 1,
        w @ c - 1 / 2,
        w @ c ** 2 - 1 / 3,
        w @ A @ c - 1 / 6,
        w @ c ** 3 - 1 / 4,
        (w * c) @ A @ c - 1 / 8,
        w @ A @ c ** 2 - 1 / 12,
        w @ A @ A @ c - 1 / 24,
    ])


def lsrk_step(y: np.ndarray, rhs: Callable, t: float, dt: float, res: np.ndarray | None = None):
    """One LSRK4(5) step; exactly five right-hand side evaluations."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if res is None:
        res = np.zeros_like(y)
    else:
        res[...] = 0.0
    for a, b, c in zip(RK4A, RK4B, RK4C):
        res *= a
        res += dt * rhs(t + c * dt, y)
        y = y + b * res
    return y


def trace_constant(N: int) -> float:
    return (N + 1) * (N + 2) / 2


def stable_dt(geom, C_q, N: int, cfl: float = 1.0) -> float:
    """min_k cfl / (sup|C|_2 C_N |J^f|_inf |J^-1|_inf)."""
    if geom.J.size == 0:
        raise ValueError("empty mesh")
    if cfl <= 0:
        raise ValueError("cfl must be positive")
    cnorm = float(np.linalg.eigvalsh(C_q.reshape(-1, 3, 3)).max())
    Jf = geom.Jf.reshape(len(geom.J), -1).max(axis=1)
    Jinv = (1.0 / geom.J).max(axis=1)
    return float(np.min(cfl / (cnorm * trace_constant(N) * Jf * Jinv)))


@dataclass
class TimeConfig:
    t_final: float
    cfl: float = 1.0
    dt: float | None = None   # overrides the stable estimate when given

    def __post_init__(self):
        if self.cfl <= 0:
            raise ValueError("cfl must be positive")
        if self.t_final < 0:
            raise ValueError("t_final must be nonnegative")


def run(y0: np.ndarray, rhs: Callable, t_final: float, dt: float,
        observers: Sequence[Callable] = (), every: int = 1, t0: float = 0.0):
    """March to t_final with fixed dt, shortening the last step to land on it.

    Observers are called as obs(step, t, y) at step 0, every ``every`` steps
    and at the final time.  Returns (y, t, nsteps).
    """
    y = np.array(y0, float, copy=True)
    t = t0
    res = np.zeros_like(y)
    for obs in observers:
        obs(0, t, y)
    if t_final <= t0:
        return y, t, 0
    nsteps = int(np.ceil((t_final - t0) / dt - 1e-12))
    for n in range(1, nsteps + 1):
        h = min(dt, t_final - t) if n == nsteps else dt
        y = lsrk_step(y, rhs, t, h, res)
        t = t_final if n == nsteps else t0 + n * dt
        if not np.all(np.isfinite(y)):
            raise DivergenceError(f"non-finite state at step {n} (t={t:.6g})")
        if observers and (n % every == 0 or n == nsteps):
            for obs in observers:
                obs(n, t, y)
    return y, t, nsteps
