"""Test problems: analytic solutions, media, boundary layouts and sources.

Exact solutions are returned as arrays of shape (5, ...) holding
(v1, v2, sxx, syy, sxy).  Each is built from closed-form displacement
derivatives: v = du/dt and sigma = C (u1_x, u2_y, u1_y + u2_x).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import materials as mat
from .dg import RickerPoint, StressRateSource
from .mesh import BoundaryTag, Mesh, uniform_tri_mesh


@dataclass
class Scenario:
    name: str
    xlim: tuple[float, float]
    ylim: tuple[float, float]
    material: mat.Material | Callable
    t_final: float
    bc: dict = field(default_factory=dict)
    periodic_x: bool = False
    periodic_y: bool = False
    exact: Callable | None = None          # (x, y, t) -> (5, ...)
    initial: Callable | None = None        # (x, y) -> (5, ...); defaults to exact at t=0
    sources: Callable | None = None        # () -> list of Source
    boundary_velocity: Callable | None = None
    mesh_fn: Callable | None = None        # h -> Mesh, overrides the uniform grid
    flux: tuple[float, float] = (1.0, 1.0)
    curvilinear: bool = False
    energy_after: float = 0.0              # sources are inactive after this time
    description: str = ""
    reference: dict = field(default_factory=dict)

    def mesh(self, h: float | None = None, nx: int | None = None, ny: int | None = None) -> Mesh:
        if self.mesh_fn is not None and nx is None:
            return self.mesh_fn(h)
        if nx is None:
            nx = int(round((self.xlim[1] - self.xlim[0]) / h))
            ny = int(round((self.ylim[1] - self.ylim[0]) / h))
        return uniform_tri_mesh(nx, ny, self.xlim, self.ylim, bc=self.bc,
                                periodic_x=self.periodic_x, periodic_y=self.periodic_y)

    def initial_condition(self, x, y):
        if self.initial is not None:
            return self.initial(x, y)
        if self.exact is None:
            raise ValueError(f"scenario {self.name} has no initial condition")
        return self.exact(x, y, 0.0)

    def sample_material(self, geom) -> tuple[np.ndarray, np.ndarray]:
        if isinstance(self.material, mat.Material):
            return mat.sample_at_quadrature(self.material, geom)
        rho, C = self.material(geom)
        mat.validate(rho, C)
        return rho, C


def fields_from_displacement(ut1, ut2, u1x, u1y, u2x, u2y, C) -> np.ndarray:
    e = (u1x, u2y, u1y + u2x)
    s = [C[..., i, 0] * e[0] + C[..., i, 1] * e[1] + C[..., i, 2] * e[2] for i in range(3)]
    return np.stack(np.broadcast_arrays(ut1, ut2, *s))


# ---------------------------------------------------------------------------
# harmonic oscillation of a square

def harmonic_oscillation(rho=1.0, lam=1.0, mu=1.0) -> Scenario:
    w = np.sqrt(2 * mu)
    C = mat.isotropic_C(lam, mu)
    pi = np.pi

    def exact(x, y, t):
        ct, st = np.cos(w * pi * t), np.sin(w * pi * t)
        cx, sx, cy, sy = np.cos(pi * x), np.sin(pi * x), np.cos(pi * y), np.sin(pi * y)
        return fields_from_displacement(
            -w * pi * st * cx * sy, w * pi * st * sx * cy,
            -pi * ct * sx * sy, pi * ct * cx * cy,
            -pi * ct * cx * cy, pi * ct * sx * sy, C)

    return Scenario("harmonic_oscillation", (0.0, 1.0), (0.0, 1.0), mat.isotropic(rho, lam, mu),
                    5.0, exact=exact, description="standing mode of a traction-free unit square",
                    reference=HARMONIC_REFERENCE)


# ---------------------------------------------------------------------------
# Rayleigh surface wave

# Often quoted for this test, but it is the root for lambda = 10 mu, not lambda = mu.
XI_PRINTED = 0.949554083888034


def rayleigh_secular(xi, lam=1.0, mu=1.0):
    kappa = mu / (2 * mu + lam)
    return np.sqrt(1 - xi ** 2) * np.sqrt(1 - xi ** 2 * kappa) - (xi ** 2 / 2 - 1) ** 2


def rayleigh_xi(lam=1.0, mu=1.0) -> float:
    """Nontrivial root of the Rayleigh secular equation in (0, 1)."""
    return brentq(rayleigh_secular, 0.5, 1 - 1e-15, args=(lam, mu), xtol=1e-15, rtol=1e-15)


def rayleigh_wave(lam=1.0, mu=1.0, rho=1.0, omega=2 * np.pi, xi=None, t_final=5.0) -> Scenario:
    if xi is None:
        xi = rayleigh_xi(lam, mu)
    kappa = mu / (2 * mu + lam)
    s1 = np.sqrt(1 - xi ** 2)
    s2 = np.sqrt(1 - xi ** 2 * kappa)
    A = xi ** 2 / 2 - 1
    c = xi * np.sqrt(mu)
    C = mat.isotropic_C(lam, mu)
    w = omega

    def exact(x, y, t):
        e1 = np.exp(-w * x * s1)
        e2 = np.exp(-w * x * s2)
        th = w * (y + c * t)
        ct, st = np.cos(th), np.sin(th)
        return fields_from_displacement(
            -w * c * (e1 + A * e2) * st,
            w * c * (s1 * e1 + A / s2 * e2) * ct,
            -w * (s1 * e1 + A * s2 * e2) * ct,
            -w * (e1 + A * e2) * st,
            -w * (s1 ** 2 * e1 + A * e2) * st,
            w * (s1 * e1 + A / s2 * e2) * ct, C)

    def vbc(x, y, t):
        v = exact(x, y, t)
        return v[0], v[1]

    sc = Scenario("rayleigh_wave", (0.0, 2.0), (0.0, 1.0), mat.isotropic(rho, lam, mu), t_final,
                  bc={"left": "traction", "right": "velocity"}, periodic_y=True,
                  exact=exact, boundary_velocity=vbc,
                  description=f"Rayleigh surface wave, lambda={lam}, mu={mu}, xi={xi:.15g}",
                  reference=RAYLEIGH_REFERENCE if (lam == 1.0 and mu == 1.0) else {})
    sc.xi = xi
    return sc


# ---------------------------------------------------------------------------
# Lamb waveguide mode

LAMB = dict(k=2 * np.pi, omega=13.137063197233, B1=126.1992721468, B2=53.88807700007)


def lamb_wave(curvilinear=False) -> Scenario:
    rho, mu, lam = 1.0, 1.0, 2.0
    k, w, B1, B2 = LAMB["k"], LAMB["omega"], LAMB["B1"], LAMB["B2"]
    p = np.sqrt(w ** 2 / (2 * mu + lam) - k ** 2)
    q = np.sqrt(w ** 2 / mu - k ** 2)
    C = mat.isotropic_C(lam, mu)

    def exact(x, y, t):
        ph = k * x - w * t
        sp, cp = np.sin(ph), np.cos(ph)
        a = -k * B1 * np.cos(p * y) - q * B2 * np.cos(q * y)
        b = -p * B1 * np.sin(p * y) + k * B2 * np.sin(q * y)
        a_y = k * p * B1 * np.sin(p * y) + q * q * B2 * np.sin(q * y)
        b_y = -p * p * B1 * np.cos(p * y) + k * q * B2 * np.cos(q * y)
        return fields_from_displacement(
            -w * a * cp, w * b * sp,
            k * a * cp, a_y * sp, -k * b * sp, b_y * cp, C)

    name = "lamb_wave_curved" if curvilinear else "lamb_wave"
    sc = Scenario(name, (-1.0, 1.0), (-0.5, 0.5), mat.isotropic(rho, lam, mu), 5.0,
                  bc={"bottom": "traction", "top": "traction"}, periodic_x=True, exact=exact,
                  curvilinear=curvilinear,
                  description="Lamb waveguide mode" + (" on a warped mesh" if curvilinear else ""),
                  reference=LAMB_CURVED_REFERENCE if curvilinear else LAMB_REFERENCE)
    sc.p2, sc.q2 = p ** 2, q ** 2
    return sc


# ---------------------------------------------------------------------------
# Stoneley interface wave

STONELEY = dict(c=0.546981324213884, B1=0.2952173626624j, B2=-0.6798795208473,
                B3=0.5220044931212j, B4=-0.9339639688697, k=1.0)
STONELEY_TOP = (10.0, 3.0, 3.0)     # (rho, lambda, mu) for y > 0
STONELEY_BOTTOM = (1.0, 1.0, 1.0)   # y < 0


def stoneley_decay(c=STONELEY["c"]):
    out = []
    for rho, lam, mu in (STONELEY_TOP, STONELEY_BOTTOM):
        out.append((np.sqrt(1 - c ** 2 / ((2 * mu + lam) / rho)), np.sqrt(1 - c ** 2 / (mu / rho))))
    return out


def stoneley_terms():
    """Complex amplitudes and y-exponents of each displacement component per half space.

    Each entry is a list of (amplitude, gamma) with u = Re(sum a e^{gamma y} e^{i(kx - wt)}).
    The sign of B1 is flipped relative to the tabulated value; with that
    change both half-space pairs satisfy displacement and traction continuity.
    """
    k = STONELEY["k"]
    B1, B2, B3, B4 = -STONELEY["B1"], STONELEY["B2"], STONELEY["B3"], STONELEY["B4"]
    (b1p, b1s), (b2p, b2s) = stoneley_decay()
    top = ([(1j * k * B1, -k * b1p), (k * b1s * B2, -k * b1s)],
           [(-k * b1p * B1, -k * b1p), (1j * k * B2, -k * b1s)])
    bottom = ([(1j * k * B3, k * b2p), (-k * b2s * B4, k * b2s)],
              [(k * b2p * B3, k * b2p), (1j * k * B4, k * b2s)])
    return top, bottom


def _stoneley_half(terms, x, y, t, C):
    k, w = STONELEY["k"], STONELEY["c"] * STONELEY["k"]
    E = np.exp(1j * (k * x - w * t))
    u = []
    for comp in terms:
        val = sum(a * np.exp(g * y) for a, g in comp)
        dy = sum(a * g * np.exp(g * y) for a, g in comp)
        u.append((val * E, dy * E))
    (u1, u1y), (u2, u2y) = u
    return fields_from_displacement(
        (-1j * w * u1).real, (-1j * w * u2).real,
        (1j * k * u1).real, u1y.real, (1j * k * u2).real, u2y.real, C)


def stoneley_wave(fitted: bool = True) -> Scenario:
    top, bottom = stoneley_terms()
    Ctop = mat.isotropic_C(STONELEY_TOP[1], STONELEY_TOP[2])
    Cbot = mat.isotropic_C(STONELEY_BOTTOM[1], STONELEY_BOTTOM[2])
    upper = lambda x, y: np.asarray(y) > 0
    material = mat.piecewise(upper, mat.isotropic(*STONELEY_TOP), mat.isotropic(*STONELEY_BOTTOM))

    def exact(x, y, t):
        x, y, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float), np.asarray(t, float))
        out = np.empty((5,) + x.shape)
        m = y > 0
        out[:, m] = _stoneley_half(top, x[m], y[m], t[m], Ctop)
        out[:, ~m] = _stoneley_half(bottom, x[~m], y[~m], t[~m], Cbot)
        return out

    def vbc(x, y, t):
        v = exact(x, y, t)
        return v[0], v[1]

    def mesh_fn(h):
        k1d = stoneley_k1d(h, fitted)
        return uniform_tri_mesh(k1d, 5 * k1d, (-1.0, 1.0), (-5.0, 5.0),
                                bc={s: "velocity" for s in ("left", "right", "bottom", "top")})

    name = "stoneley_wave" if fitted else "stoneley_wave_unfitted"
    return Scenario(name, (-1.0, 1.0), (-5.0, 5.0), material, 5.0,
                    bc={s: "velocity" for s in ("left", "right", "bottom", "top")},
                    exact=exact, boundary_velocity=vbc, mesh_fn=mesh_fn,
                    description="Stoneley wave along a material interface at y=0 ("
                    + ("fitted" if fitted else "unfitted") + " mesh)",
                    reference=STONELEY_REFERENCE if fitted else STONELEY_UNFITTED_REFERENCE)


def stoneley_k1d(h: float, fitted: bool) -> int:
    """Quads per unit length in x is 1/h; odd counts put y=0 inside elements."""
    k1d = int(round(1.0 / h))
    if fitted:
        return k1d if k1d % 2 == 0 else k1d + 1
    return k1d + 1 if k1d % 2 == 0 else k1d


# ---------------------------------------------------------------------------
# manufactured plane wave in a smoothly varying medium

def manufactured_plane_wave(k=np.pi, lam0=2.0, mu=1.0, rho=1.0, amp=0.5,
                            xlim=(-1.0, 1.0), ylim=(-1.0, 1.0), periodic=True) -> Scenario:
    cp = np.sqrt((2 * mu + lam0) / rho)
    cs = np.sqrt(mu / rho)
    C0 = mat.isotropic_C(lam0, mu)
    lam_tilde = lambda x, y: amp * np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y)
    material = mat.isotropic(rho, lambda x, y: lam0 + lam_tilde(x, y), mu)

    def exact(x, y, t):
        z = np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)
        sp, ss = np.sin(k * (x - cp * t)), np.sin(k * (x - cs * t))
        return fields_from_displacement(k * cp * sp + z, k * cs * ss + z, -k * sp + z, z,
                                        -k * ss + z, z, C0)

    def div_v(x, y, t):
        return k * k * cp * np.cos(k * (x - cp * t))

    def fsig(x, y, t):
        f = -lam_tilde(x, y) * div_v(x, y, t)
        return np.stack([f, f, np.zeros_like(f)])

    def vbc(x, y, t):
        v = exact(x, y, t)
        return v[0], v[1]

    def mesh_fn(h):
        # h = 1/K1D with K1D quads per side, as for the Stoneley meshes
        k1d = int(round(1.0 / h))
        return uniform_tri_mesh(k1d, k1d, xlim, ylim, bc=bc, periodic_x=periodic, periodic_y=periodic)

    bc = {} if periodic else {s: "velocity" for s in ("left", "right", "bottom", "top")}
    sc = Scenario("manufactured_plane_wave", xlim, ylim, material, 5.0,
                  periodic_x=periodic, periodic_y=periodic,
                  bc=bc, exact=exact, boundary_velocity=None if periodic else vbc, mesh_fn=mesh_fn,
                  sources=lambda: [StressRateSource(fsig)],
                  description="plane wave with a manufactured stress-rate source",
                  reference=MANUFACTURED_REFERENCE)
    sc.div_v = div_v
    sc.stress_source = fsig
    return sc


# ---------------------------------------------------------------------------
# smoothly heterogeneous medium without a closed-form solution

def heterogeneous_reference() -> Scenario:
    pi = np.pi
    material = mat.isotropic(1.0, lambda x, y: 1 + 0.25 * np.sin(pi * x) * np.sin(pi * y),
                             lambda x, y: 1 + 0.25 * np.cos(pi * x) * np.cos(pi * y))

    def initial(x, y):
        z = np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)
        return np.stack([np.cos(pi * x) * np.sin(pi * y) + z, -np.sin(pi * x) * np.cos(pi * y) + z, z, z, z])

    return Scenario("heterogeneous_reference", (-1.0, 1.0), (-1.0, 1.0), material, 0.5,
                    initial=initial,
                    description="smooth heterogeneous isotropic medium, traction-free; "
                    "accuracy checked by self-convergence")


# ---------------------------------------------------------------------------
# application problems

def stiff_inclusion(t0=0.025, t_final=0.4) -> Scenario:
    inside = lambda x, y: (np.abs(x) <= 0.5) & (np.abs(y) <= 0.1)
    material = mat.piecewise(inside, mat.isotropic(1.0, 200.0, 100.0), mat.isotropic(1.0, 2.0, 1.0))

    def vbc(x, y, t):
        amp = np.sin(np.pi * t / t0) if t < t0 else 0.0
        return np.full_like(x, amp), np.zeros_like(x)

    return Scenario("stiff_inclusion", (-1.0, 1.0), (-0.5, 0.5), material, t_final,
                    bc={"left": "velocity"}, initial=lambda x, y: np.zeros((5,) + np.shape(x)),
                    boundary_velocity=vbc, energy_after=t0,
                    description="pulse entering from x=-1 hits an inclusion ten times stiffer")


ANISO_LEFT = np.array([[0.165, 0.05, 0.0], [0.05, 0.062, 0.0], [0.0, 0.0, 0.0396]])
ANISO_RIGHT = np.array([[0.165, 0.0858, 0.0], [0.0858, 0.165, 0.0], [0.0, 0.0, 0.0396]])


def aniso_two_media(f0=0.17, t_final=60.0) -> Scenario:
    t0 = 1.0 / f0
    material = mat.piecewise(lambda x, y: np.asarray(x) < 0,
                             mat.anisotropic(7100.0, ANISO_LEFT), mat.anisotropic(7100.0, ANISO_RIGHT))
    return Scenario("aniso_two_media", (-0.32, 0.32), (-0.32, 0.32), material, t_final,
                    initial=lambda x, y: np.zeros((5,) + np.shape(x)),
                    sources=lambda: [RickerPoint((-0.02, 0.0), f0, t0, (0, 1, 0, 0, 0))],
                    flux=(0.5, 0.5), energy_after=4 * t0,
                    description="Ricker point source in two anisotropic half spaces")


def random_media(dmin=0.1, dmax=1.0, seed=0) -> Scenario:
    def sample(geom):
        rng = np.random.default_rng(seed)
        C = mat.random_spd(geom.J.shape, dmin, dmax, rng)
        return np.ones(geom.J.shape), C

    return Scenario(f"random_media", (0.0, 1.0), (0.0, 1.0), sample, 1.0,
                    initial=lambda x, y: np.zeros((5,) + np.shape(x)),
                    description=f"random SPD stiffness per quadrature point, eigenvalues in [{dmin}, {dmax}]")


INCOMPRESSIBLE_MU = (1.0, 0.1, 0.01, 0.001, 0.0001)


def incompressible_sweep() -> list[Scenario]:
    return [rayleigh_wave(lam=1.0, mu=mu, t_final=1.0 / (4 * np.sqrt(mu))) for mu in INCOMPRESSIBLE_MU]


REGISTRY: dict[str, Callable[[], Scenario]] = {
    "harmonic_oscillation": harmonic_oscillation,
    "rayleigh_wave": rayleigh_wave,
    "lamb_wave": lamb_wave,
    "lamb_wave_curved": lambda: lamb_wave(curvilinear=True),
    "stoneley_wave": stoneley_wave,
    "stoneley_wave_unfitted": lambda: stoneley_wave(fitted=False),
    "manufactured_plane_wave": manufactured_plane_wave,
    "heterogeneous_reference": heterogeneous_reference,
    "stiff_inclusion": stiff_inclusion,
    "aniso_two_media": aniso_two_media,
    "random_media": random_media,
}


def get(name: str, **kwargs) -> Scenario:
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; choose from {sorted(REGISTRY)}") from None
    return factory(**kwargs)


# ---------------------------------------------------------------------------
# published error tables: {flux: {N: [(h, error), ...]}}

_H = (0.5, 0.25, 0.125, 0.0625)


def _table(rows):
    return {N: list(zip(_H, errs)) for N, errs in rows.items()}


HARMONIC_REFERENCE = {
    "penalty": _table({
        1: (0.281186, 0.0607224, 0.0114231, 0.00232631),
        2: (0.010807, 0.00109063, 0.000126864, 1.53214e-5),
        3: (0.000760654, 4.44169e-5, 2.63258e-6, 1.62546e-7),
        4: (4.68589e-5, 1.48545e-6, 4.55009e-8, 1.39823e-9),
        5: (3.03577e-6, 4.50412e-8, 6.98053e-10, 1.17913e-11),
    }),
    "central": _table({
        1: (0.439397, 0.200219, 0.0909291, 0.0440705),
        2: (0.0555882, 0.00915474, 0.0014232, 0.000226124),
        3: (0.00789363, 0.000967494, 0.000120029, 1.499e-5),
    }),
    "slopes": {"penalty": {1: 2.30, 2: 3.05, 3: 4.02, 4: 5.02, 5: 5.89},
               "central": {1: 1.04, 2: 2.65, 3: 3.00}},
}

RAYLEIGH_REFERENCE = {
    "penalty": _table({
        1: (0.987525, 0.856084, 0.272343, 0.0495455),
        2: (0.762022, 0.0822137, 0.00510445, 0.000517961),
        3: (0.133471, 0.00400974, 0.000280342, 1.93442e-5),
    }),
    "slopes": {"penalty": {1: 2.46, 2: 3.30, 3: 3.86}},
}

LAMB_REFERENCE = {
    "penalty": _table({
        2: (1.01296, 0.503696, 0.0316637, 0.00188428),
        3: (0.865781, 0.0445608, 0.00158453, 0.000113704),
    }),
    "slopes": {"penalty": {2: 4.07, 3: 3.80}},
}

LAMB_CURVED_REFERENCE = {
    "penalty": _table({
        2: (1.00509, 0.679352, 0.0814806, 0.00463964),
        3: (0.998103, 0.190567, 0.00603429, 0.000324808),
    }),
    "slopes": {"penalty": {2: 4.13, 3: 4.22}},
}

STONELEY_REFERENCE = {
    "penalty": _table({
        1: (0.291816, 0.110431, 0.0409099, 0.0140493),
        2: (0.0360738, 0.00627358, 0.00107612, 0.0001848),
        3: (0.00234802, 0.000185264, 1.51976e-5, 1.28801e-6),
    }),
    "slopes": {"penalty": {1: 1.54, 2: 2.54, 3: 3.56}},
}

STONELEY_UNFITTED_REFERENCE = {
    "penalty": _table({
        1: (0.1507, 0.0796, 0.0495, 0.0331),
        2: (0.0820, 0.0594, 0.0427, 0.0307),
        3: (0.0640, 0.0435, 0.0306, 0.0216),
        4: (0.0593, 0.0436, 0.0318, 0.0229),
    }),
    "slopes": {"penalty": {1: 0.5, 2: 0.5, 3: 0.5, 4: 0.5}},
}

MANUFACTURED_REFERENCE = {
    "penalty": _table({
        1: (1.00045, 0.550577, 0.104337, 0.0152592),
        2: (0.305771, 0.0242762, 0.00206544, 0.000255504),
        3: (0.0404346, 0.00159769, 0.000121514, 9.09561e-6),
    }),
    "slopes": {"penalty": {1: 2.77, 2: 3.01, 3: 3.74}},
}

# N=3, h=1/8, lambda=1, mu in INCOMPRESSIBLE_MU
INCOMPRESSIBLE_REFERENCE = {
    "v": (1.8867e-4, 1.6925e-4, 1.8509e-4, 2.2520e-4, 2.8301e-4),
    "sigma": (6.6596e-4, 7.8157e-4, 1.5353e-3, 3.1239e-3, 5.6341e-3),
}
