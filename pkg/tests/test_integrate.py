import math

import numpy as np
import pytest

from cepzeeman.integrate import IntegrationError, IntegratorConfig, dopri45, rk4_fixed


def rotation(t, y):
    return 1j * 3.0 * y


def test_dopri_exponential():
    sol = dopri45(rotation, (0.0, 5.0), [1.0], rtol=1e-11, atol=1e-13)
    assert sol.y[-1, 0] == pytest.approx(np.exp(15j), abs=1e-9)
    assert sol.t[-1] == 5.0
    assert sol.accepted > 0


def test_dopri_backward():
    sol = dopri45(rotation, (5.0, 0.0), [np.exp(15j)], rtol=1e-11, atol=1e-13)
    assert sol.y[-1, 0] == pytest.approx(1.0, abs=1e-9)


def test_dense_output_on_fixed_grid():
    # coarse steps, dense samples: continuous extension accuracy
    t_eval = np.linspace(0, 4, 401)
    sol = dopri45(rotation, (0.0, 4.0), [1.0], rtol=1e-9, atol=1e-12, t_eval=t_eval)
    np.testing.assert_allclose(sol.y[:, 0], np.exp(3j * t_eval), atol=1e-7)
    assert sol.accepted < 400


def test_counts_rejected_steps():
    # chirped rotation: steps that were fine a moment ago become too long
    def f(t, y):
        return 1j * (1 + 100 * t * t) * y
    sol = dopri45(f, (0.0, 3.0), [1.0], rtol=1e-9, atol=1e-12)
    assert sol.rejected > 0
    assert sol.y[-1, 0] == pytest.approx(np.exp(1j * (3 + 900)), abs=1e-6)


def test_underflow_raises_with_time():
    def blowup(t, y):
        return np.array([1.0 / (1.0 - t) ** 2 + 0j])
    with pytest.raises(IntegrationError) as exc:
        dopri45(blowup, (0.0, 2.0), [0.0], rtol=1e-10, atol=1e-12)
    assert 0.9 < exc.value.t <= 1.0


def test_step_budget():
    with pytest.raises(IntegrationError):
        dopri45(rotation, (0.0, 100.0), [1.0], max_steps=10)


def test_rk4_fourth_order():
    errs = []
    for n in (50, 100, 200, 400):
        sol = rk4_fixed(rotation, (0.0, 2.0), [1.0], n)
        errs.append(abs(sol.y[-1, 0] - np.exp(6j)))
    slopes = -np.diff(np.log2(errs))
    assert np.all(np.abs(slopes - 4) < 0.3)


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=0)
    with pytest.raises(ValueError):
        IntegratorConfig(max_step=-1)
    with pytest.raises(ValueError):
        IntegratorConfig(samples=1)
