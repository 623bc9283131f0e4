"""Glue between scenarios and the solver: build, march, measure."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import analysis
from .dg import BoundaryData, ElasticOperator, FluxSpec
from .mesh import Geometry, Mesh, geometric_factors, warp_lamb_mesh
from .reference_element import ReferenceElement, build_reference_element
from .scenarios import Scenario
from .timestepping import run, stable_dt


@dataclass
class Problem:
    scenario: Scenario
    ref: ReferenceElement
    mesh: Mesh
    geom: Geometry
    rho_q: np.ndarray
    C_q: np.ndarray
    op: ElasticOperator
    h: float

    def initial_state(self) -> np.ndarray:
        return analysis.project(self.scenario.initial_condition, self.ref, self.geom)

    def dt(self, cfl: float = 1.0) -> float:
        return stable_dt(self.geom, self.C_q, self.ref.N, cfl)

    def energy(self, Q) -> float:
        return analysis.discrete_energy(Q, self.rho_q, self.C_q, self.ref, self.geom)


def make_flux(kind: str, mesh, rho_q, C_q, tau=None, gamma=(1.0, 1.0), default=(1.0, 1.0)) -> FluxSpec:
    if kind == "central":
        return FluxSpec.central()
    if kind == "penalty":
        tv, ts = default if tau is None else (tau if np.ndim(tau) else (tau, tau))
        return FluxSpec(tv, ts)
    if kind == "scaled":
        return FluxSpec.scaled(mesh, rho_q, C_q, *gamma)
    raise ValueError(f"unknown flux {kind!r}")


def setup(scenario: Scenario, N: int, h: float | None = None, nx: int | None = None,
          ny: int | None = None, flux: str = "penalty", tau=None, gamma=(1.0, 1.0),
          quad_degree: int | None = None, form: str = "auto", curvilinear: bool | None = None) -> Problem:
    ref = build_reference_element(N, quad_degree)
    mesh = scenario.mesh(h, nx, ny)
    if h is None:
        h = (scenario.xlim[1] - scenario.xlim[0]) / nx
    if scenario.curvilinear if curvilinear is None else curvilinear:
        mesh = warp_lamb_mesh(mesh, ref)
    geom = geometric_factors(mesh, ref)
    rho_q, C_q = scenario.sample_material(geom)
    fs = make_flux(flux, mesh, rho_q, C_q, tau, gamma, scenario.flux)
    bc = BoundaryData()
    if scenario.boundary_velocity is not None:
        bc.velocity = scenario.boundary_velocity
    if scenario.exact is not None:
        bc.state = scenario.exact
    sources = scenario.sources() if scenario.sources else []
    op = ElasticOperator(ref, mesh, geom, rho_q, C_q, fs, bc, sources, form)
    return Problem(scenario, ref, mesh, geom, rho_q, C_q, op, h)


def solve(problem: Problem, t_final: float | None = None, cfl: float = 1.0, dt: float | None = None,
          observers=(), every: int = 1):
    sc = problem.scenario
    T = sc.t_final if t_final is None else t_final
    Q0 = problem.initial_state()
    dt = problem.dt(cfl) if dt is None else dt
    return run(Q0, problem.op, T, dt, observers, every)


def error_run(scenario: Scenario, N: int, h: float, flux: str = "penalty", t_final=None,
              cfl: float = 1.0, **kw) -> analysis.ErrorRecord:
    """Run a scenario with an exact solution and measure the final error."""
    tic = time.perf_counter()
    pb = setup(scenario, N, h, flux=flux, **kw)
    Q, t, nsteps = solve(pb, t_final, cfl)
    rec = analysis.l2_error(Q, scenario.exact, t, pb.ref, pb.geom, N, h, flux)
    rec.runtime = time.perf_counter() - tic
    rec.extra["steps"] = nsteps
    rec.extra["K"] = pb.mesh.K
    return rec
