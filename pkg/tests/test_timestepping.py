import numpy as np
import pytest

from wadg_elastic.materials import isotropic_C
from wadg_elastic.mesh import geometric_factors, uniform_tri_mesh
from wadg_elastic.reference_element import build_reference_element
from wadg_elastic.timestepping import (
    DivergenceError, TimeConfig, lsrk_step, order_conditions, run, stable_dt, trace_constant,
)

from _oracle import DT_N4_H4


def test_order_conditions():
    assert np.abs(order_conditions()).max() < 1e-13


def test_zero_rhs_leaves_state_unchanged():
    y = np.random.default_rng(0).standard_normal((5, 3, 4))
    out = lsrk_step(y, lambda t, y: np.zeros_like(y), 0.0, 0.1)
    assert np.array_equal(out, y)


def test_five_evaluations_per_step():
    calls = []

    def f(t, y):
        calls.append(t)
        return -y
    lsrk_step(np.ones(3), f, 0.0, 0.1)
    assert len(calls) == 5


def decay_error(n):
    y, t, _ = run(np.array([1.0]), lambda t, y: -y, 1.0, 1.0 / n)
    return abs(y[0] - np.exp(-1.0))


def test_scalar_convergence_order():
    e = [decay_error(n) for n in (10, 20, 40)]
    rates = np.log2(np.array(e[:-1]) / np.array(e[1:]))
    assert np.all(np.abs(rates - 4.0) <= 0.1), rates


def test_oscillator_energy_drift():
    def drift(dt):
        y, _, _ = run(np.array([1.0, 0.0]), lambda t, y: np.array([y[1], -y[0]]), 2 * np.pi, dt)
        return abs(0.5 * (y @ y) - 0.5)
    d1, d2 = drift(2 * np.pi / 40), drift(2 * np.pi / 80)
    assert np.log2(d1 / d2) >= 4 - 0.1


def test_time_dependent_rhs():
    # y' = cos t with y(0) = 0: exercises the stage times
    y, t, _ = run(np.array([0.0]), lambda t, y: np.array([np.cos(t)]), 1.3, 0.01)
    assert abs(y[0] - np.sin(1.3)) < 1e-10


def test_run_lands_on_final_time_and_observers():
    seen = []
    y, t, n = run(np.zeros(2), lambda t, y: np.ones(2), 1.05, 0.1,
                  observers=[lambda step, t, y: seen.append((step, t))], every=4)
    assert t == 1.05 and n == 11
    assert np.allclose(y, 1.05)
    assert [s for s, _ in seen] == [0, 4, 8, 11]


def test_zero_final_time_returns_initial_state():
    y0 = np.arange(4.0)
    y, t, n = run(y0, lambda t, y: -y, 0.0, 0.1)
    assert n == 0 and np.array_equal(y, y0) and y is not y0


def test_determinism():
    rhs = lambda t, y: np.sin(y) - 0.3 * y
    y0 = np.linspace(-1, 1, 7)
    a = run(y0, rhs, 2.0, 0.03)[0]
    b = run(y0, rhs, 2.0, 0.03)[0]
    assert a.tobytes() == b.tobytes()


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_detected():
    with pytest.raises(DivergenceError, match="step"):
        run(np.ones(1), lambda t, y: y * 1e200, 1.0, 0.5)
    with pytest.raises(ValueError):
        lsrk_step(np.ones(1), lambda t, y: y, 0.0, 0.0)


def _dt(n, scale_C=1.0, length=1.0, N=4):
    ref = build_reference_element(N)
    g = geometric_factors(uniform_tri_mesh(n, n, (0, length), (0, length)), ref)
    C = np.broadcast_to(scale_C * isotropic_C(1.0, 1.0), g.J.shape + (3, 3))
    return stable_dt(g, C, N)


def test_dt_anchor():
    assert abs(_dt(4) - DT_N4_H4) < 1e-15


def test_dt_scaling_laws():
    assert _dt(4, length=2.0) == pytest.approx(2 * _dt(4), rel=1e-12)
    assert _dt(4, scale_C=4.0) == pytest.approx(_dt(4) / 4, rel=1e-12)
    assert trace_constant(4) == 15


def test_time_config_validation():
    with pytest.raises(ValueError):
        TimeConfig(1.0, cfl=0.0)
    with pytest.raises(ValueError):
        TimeConfig(-1.0)
