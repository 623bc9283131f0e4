import numpy as np
import pytest
from hypothesis import given, strategies as st

from wadg_elastic import materials as mat
from wadg_elastic.mesh import geometric_factors, uniform_tri_mesh
from wadg_elastic.reference_element import build_reference_element
from wadg_elastic.scenarios import stoneley_wave


def test_isotropic_values():
    assert np.array_equal(mat.isotropic_C(2.0, 1.0), [[4, 2, 0], [2, 4, 0], [0, 0, 1]])
    assert np.array_equal(mat.isotropic_C(0.0, 1.0), [[2, 0, 0], [0, 2, 0], [0, 0, 1]])


def test_closed_form_inverse():
    S = mat.isotropic_Cinv(2.0, 1.0)
    # prefactor 1/(4 mu^2 + 4 mu lam) = 1/12; a 1/(4 mu^2 + mu lam) prefactor gives twice this
    expect = np.array([[1 / 3, -1 / 6, 0], [-1 / 6, 1 / 3, 0], [0, 0, 1]])
    assert np.abs(S - expect).max() < 1e-15
    assert np.abs(S - np.linalg.inv(mat.isotropic_C(2.0, 1.0))).max() < 1e-14


@given(st.floats(0.01, 100), st.floats(0.0, 1.0))
def test_inverse_formula_random(mu, frac):
    # lambda in (-2mu/3, 100 mu] so that 2mu + 3lambda > 0
    lam = mu * (-2 / 3 + 1e-3 + frac * (100 + 2 / 3))
    C = mat.isotropic_C(lam, mu)
    assert np.abs(C @ mat.isotropic_Cinv(lam, mu) - np.eye(3)).max() < 1e-12


def test_validate_rejects_bad_fields():
    C = mat.isotropic_C(np.ones(4), np.ones(4))
    with pytest.raises(mat.MaterialError):
        mat.validate(np.array([1.0, 1.0, 0.0, 1.0]), C)
    bad = C.copy()
    bad[1] = mat.isotropic_C(1.0, -1.0)
    with pytest.raises(mat.MaterialError):
        mat.validate(np.ones(4), bad)
    asym = C.copy()
    asym[0, 0, 1] += 0.5
    with pytest.raises(mat.MaterialError):
        mat.validate(np.ones(4), asym)


def test_random_spd_identity_when_degenerate():
    C = mat.random_spd((5, 7), 1.0, 1.0, np.random.default_rng(3))
    assert np.abs(C - np.eye(3)).max() < 1e-14


@given(st.integers(0, 2 ** 31), st.floats(1e-5, 1.0), st.floats(1.0, 10.0))
def test_random_spd_eigenvalue_bounds(seed, dmin, factor):
    dmax = dmin * factor
    C = mat.random_spd((40,), dmin, dmax, np.random.default_rng(seed))
    ev = np.linalg.eigvalsh(C)
    assert ev.min() >= dmin - 1e-12 and ev.max() <= dmax + 1e-12
    assert np.array_equal(C, np.swapaxes(C, 1, 2))


def test_random_spd_deterministic():
    a = mat.random_spd((10, 3), 0.1, 1.0, np.random.default_rng(42))
    b = mat.random_spd((10, 3), 0.1, 1.0, np.random.default_rng(42))
    assert np.array_equal(a, b)
    with pytest.raises(mat.MaterialError):
        mat.random_spd((2,), 1.0, 0.5, np.random.default_rng(0))


def test_constant_sample():
    ref = build_reference_element(2)
    g = geometric_factors(uniform_tri_mesh(2, 2), ref)
    rho, C = mat.sample_at_quadrature(mat.isotropic(3.0, 2.0, 1.0), g)
    assert np.all(rho == 3.0)
    assert np.array_equal(C, np.broadcast_to(mat.isotropic_C(2.0, 1.0), C.shape))


def test_stoneley_media_piecewise_constant_on_fitted_mesh():
    sc = stoneley_wave()
    ref = build_reference_element(2)
    g = geometric_factors(sc.mesh(0.25), ref)
    rho, C = sc.sample_material(g)
    assert np.ptp(rho, axis=1).max() == 0 and np.ptp(C, axis=1).max() == 0
    top = g.yq[:, 0] > 0
    assert np.all(rho[top] == 10) and np.all(rho[~top] == 1)
    assert np.array_equal(C[top][0, 0], mat.isotropic_C(3.0, 3.0))
    assert np.array_equal(C[~top][0, 0], mat.isotropic_C(1.0, 1.0))


def test_manufactured_lambda_spot_values():
    from wadg_elastic.scenarios import manufactured_plane_wave
    sc = manufactured_plane_wave()
    ref = build_reference_element(2)
    g = geometric_factors(sc.mesh(0.5), ref)
    _, C = sc.sample_material(g)
    x, y = g.xq[3, 2], g.yq[3, 2]
    lam = 2 + 0.5 * np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y)
    assert abs(C[3, 2, 0, 1] - lam) < 1e-14 and abs(C[3, 2, 0, 0] - (2 + lam)) < 1e-14


def test_sup_norm():
    C = mat.isotropic_C(np.array([1.0, 2.0]), np.array([1.0, 1.0]))
    assert mat.sup_norm(C) == pytest.approx(6.0)
