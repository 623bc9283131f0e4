import numpy as np
import pytest
from hypothesis import given, strategies as st

from wadg_elastic import analysis, driver, scenarios as S
from wadg_elastic.dg import ElasticOperator, FluxSpec
from wadg_elastic.materials import isotropic_C, random_spd
from wadg_elastic.mesh import geometric_factors, uniform_tri_mesh, warp_lamb_mesh
from wadg_elastic.reference_element import build_reference_element


def affine_setup(N=2, n=2, periodic=False):
    ref = build_reference_element(N)
    mesh = uniform_tri_mesh(n, n, periodic_x=periodic, periodic_y=periodic)
    return ref, mesh, geometric_factors(mesh, ref)


def test_polynomial_solution_has_zero_error():
    ref, mesh, g = affine_setup(3)
    exact = lambda x, y, t: np.stack([x ** 3, y * x, 1 + 0 * x, x - y, y ** 2 * x])
    Q = analysis.project(lambda x, y: exact(x, y, 0), ref, g)
    assert analysis.l2_error(Q, exact, 0.0, ref, g).relative < 1e-12


def test_zero_solution_has_unit_error():
    sc = S.harmonic_oscillation()
    ref, mesh, g = affine_setup(2)
    rec = analysis.l2_error(np.zeros((5, mesh.K, ref.Np)), sc.exact, 0.3, ref, g)
    assert rec.relative == pytest.approx(1.0, abs=1e-15)
    assert rec.velocity_relative == pytest.approx(1.0) and rec.stress_relative == pytest.approx(1.0)
    with pytest.raises(ValueError):
        analysis.l2_error(np.zeros((5, mesh.K, ref.Np)), None, 0.0, ref, g)


def test_projection_on_curved_mesh_converges():
    # on curved elements polynomials in x, y are not reproduced exactly
    ref = build_reference_element(3)
    fn = lambda x, y: np.stack([x ** 2, y, x * y, 0 * x, 1 + 0 * x])
    errs = []
    for n in (8, 16):
        mesh = warp_lamb_mesh(uniform_tri_mesh(n, n // 2, (-1, 1), (-0.5, 0.5), periodic_x=True), ref)
        g = geometric_factors(mesh, ref)
        Q = analysis.project(fn, ref, g)
        errs.append(analysis.l2_error(Q, lambda x, y, t: fn(x, y), 0.0, ref, g).field_errors)
    # fields in y alone stay at roundoff; the x-dependent ones approach rate N + 1
    assert np.max([errs[1][i] for i in (1, 3, 4)]) < 1e-13
    assert np.log2(errs[0][[0, 2]] / errs[1][[0, 2]]).min() >= 3.5


def test_energy_values():
    ref, mesh, g = affine_setup(2)
    rho = np.ones(g.J.shape)
    C = np.broadcast_to(isotropic_C(1.0, 1.0), g.J.shape + (3, 3))
    Z = np.zeros((5, mesh.K, ref.Np))
    assert analysis.discrete_energy(Z, rho, C, ref, g) == 0
    Q = analysis.project(lambda x, y: np.stack([1 + 0 * x, 0 * x, 0 * x, 0 * x, 0 * x]), ref, g)
    assert analysis.discrete_energy(Q, rho, C, ref, g) == pytest.approx(0.5, abs=1e-14)


def test_exact_harmonic_energy_is_constant():
    sc = S.harmonic_oscillation()
    ref = build_reference_element(5)
    g = geometric_factors(sc.mesh(0.125), ref)
    rho, C = sc.sample_material(g)
    es = []
    for t in (0.0, 0.37, 1.1, 2.9):
        # energy straight from quadrature samples of the exact solution
        u = sc.exact(g.xq, g.yq, t)
        wJ = ref.quad.weights * g.J
        s = np.moveaxis(u[2:], 0, -1)
        Cs = np.linalg.solve(C, s[..., None])[..., 0]
        es.append(0.5 * np.sum((rho * (u[0] ** 2 + u[1] ** 2) + np.sum(Cs * s, -1)) * wJ))
    assert np.ptp(es) < 1e-10 * es[0]


def test_wadg_energy_matches_discrete_for_constant_media():
    pb = driver.setup(S.harmonic_oscillation(), 2, 0.5)
    Q = np.random.default_rng(0).standard_normal((5, pb.mesh.K, pb.ref.Np))
    assert analysis.wadg_energy(Q, pb.op) == pytest.approx(pb.energy(Q), rel=1e-10)


def test_assemble_operator_basic():
    A = analysis.assemble_operator(lambda t, q: np.zeros_like(q), (2, 3))
    assert A.shape == (6, 6) and not A.any()
    with pytest.raises(ValueError):
        analysis.assemble_operator(lambda t, q: q, (100, 100), max_dof=6000)


def test_assembled_operator_linear():
    ref, mesh, g = affine_setup(2)
    C = random_spd(g.J.shape, 0.1, 1.0, np.random.default_rng(1))
    op = ElasticOperator(ref, mesh, g, np.ones(g.J.shape), C, FluxSpec.penalty())
    shape = (5, mesh.K, ref.Np)
    A = analysis.assemble_operator(op, shape)
    rng = np.random.default_rng(2)
    x, y = rng.standard_normal((2,) + shape)
    scale = np.abs(A).max()
    assert np.abs(A @ (x + y).ravel() - A @ x.ravel() - A @ y.ravel()).max() < 1e-12 * scale * 10
    assert np.abs(A @ x.ravel() - op(0.0, x).ravel()).max() < 1e-12 * scale * 10


def test_central_flux_skew_adjoint_in_wadg_inner_product():
    ref, mesh, g = affine_setup(2, 2, periodic=True)
    C = random_spd(g.J.shape, 0.1, 1.0, np.random.default_rng(3))
    op = ElasticOperator(ref, mesh, g, np.ones(g.J.shape), C, FluxSpec.central())
    shape = (5, mesh.K, ref.Np)
    A = analysis.assemble_operator(op, shape)
    # W = inverse of the block mass inverse; B = W A must be skew
    Minv = analysis.assemble_operator(lambda t, q: op.apply_mass_inverse(q), shape)
    W = np.linalg.inv(Minv)
    B = W @ A
    x = np.random.default_rng(4).standard_normal(A.shape[0])
    assert abs(x @ B @ x) < 1e-10 * (x @ x) * np.abs(B).max()
    assert np.abs(B + B.T).max() < 1e-10 * np.abs(B).max()


def test_spectrum_simple_cases():
    rec = analysis.spectrum(np.diag([3.0, -1.0, 2.0]))
    assert np.allclose(rec.eigenvalues, [-1, 2, 3])
    rot = analysis.spectrum(np.array([[0.0, -1.0], [1.0, 0.0]]))
    assert np.allclose(sorted(rot.eigenvalues.imag), [-1, 1]) and np.allclose(rot.eigenvalues.real, 0)
    assert rot.radius == pytest.approx(1.0) and rot.abscissa == pytest.approx(0.0, abs=1e-15)


def test_spectrum_residuals():
    A = np.random.default_rng(5).standard_normal((20, 20))
    lam, V = np.linalg.eig(A)
    rec = analysis.spectrum(A)
    assert np.allclose(np.sort_complex(rec.eigenvalues), np.sort_complex(lam))
    for i in range(20):
        assert np.linalg.norm(A @ V[:, i] - lam[i] * V[:, i]) <= 1e-8 * np.linalg.norm(A, 2)
    assert np.all(np.diff(rec.eigenvalues.real) >= 0)


def test_rates():
    r = analysis.convergence_rates([0.5, 0.25], [1e-2, 1.25e-3])
    assert r.pairwise[0] == pytest.approx(3.0) and r.fitted == pytest.approx(3.0)
    assert analysis.convergence_rates([0.5, 0.25], [1e-3, 1e-3]).pairwise[0] == 0
    with pytest.raises(ValueError):
        analysis.convergence_rates([0.5, 0.25], [0.0, 1.0])
    with pytest.raises(ValueError):
        analysis.convergence_rates([0.5], [1.0])


def test_published_harmonic_slope():
    hs, es = zip(*S.HARMONIC_REFERENCE["penalty"][2])
    # the printed slope triangles use the finest pair
    assert analysis.convergence_rates(hs, es).pairwise[-1] == pytest.approx(3.05, abs=0.005)


@given(st.floats(0.5, 6.0), st.floats(1e-3, 10.0))
def test_rates_recover_power_law(p, c):
    h = np.array([0.5, 0.25, 0.125, 0.0625])
    r = analysis.convergence_rates(h, c * h ** p)
    assert np.allclose(r.pairwise, p) and r.fitted == pytest.approx(p)


def test_common_rate():
    h = np.array([0.5, 0.25, 0.125])
    assert analysis.common_rate(h, [3 * h ** 0.5, 0.1 * h ** 0.5]) == pytest.approx(0.5)
    # equal-weight average of the individual slopes when each series is a power law
    assert analysis.common_rate(h, [h ** 1.0, h ** 2.0]) == pytest.approx(1.5)
    with pytest.raises(ValueError):
        analysis.common_rate(h, [h[:2]])


def test_sample_points_matches_exact_polynomial():
    ref, mesh, g = affine_setup(3, 3)
    fn = lambda x, y: np.stack([x ** 3 - y, x * y, 2 + 0 * x, y ** 2, x - y ** 3])
    Q = analysis.project(fn, ref, g)
    rng = np.random.default_rng(6)
    x, y = rng.uniform(0, 1, (2, 500))
    assert np.abs(analysis.sample_points(Q, ref, mesh, g, x, y) - fn(x, y)).max() < 1e-12
    X, Y, vals = analysis.sample_grid(Q, ref, mesh, g, 7, 5)
    assert vals.shape == (5, 35) and X.min() == 0 and Y.max() == 1
    assert np.abs(vals - fn(X, Y)).max() < 1e-12
    with pytest.raises(ValueError):
        analysis.sample_points(Q, ref, mesh, g, [1.5], [0.5])


def test_sample_points_curved():
    ref = build_reference_element(2)
    mesh = warp_lamb_mesh(uniform_tri_mesh(4, 2, (-1, 1), (-0.5, 0.5), periodic_x=True), ref)
    g = geometric_factors(mesh, ref)
    Q = np.zeros((5, mesh.K, ref.Np))
    Q[:, :, 0] = np.sqrt(2)
    vals = analysis.sample_points(Q, ref, mesh, g, [0.1, -0.7], [0.2, -0.1])
    assert np.allclose(vals, 1.0)
