import math

import numpy as np
import pytest

import eqm


def test_interaction_energy_two_atoms():
    pts = np.array([[0.0, 0.0], [math.exp(-1.0), 0.0]])
    w = np.array([0.5, 0.5])
    assert eqm.interaction_energy(pts, w) == pytest.approx(0.5)


def test_wasserstein_point_translation():
    a = np.array([[0.0, 0.0]])
    b = np.array([[3.0, 4.0]])
    one = np.array([1.0])
    assert eqm.wasserstein_d2(a, one, b, one) == pytest.approx(12.5)


def test_solve_transport_plan_marginals():
    x = np.array([[0.0], [1.0]])
    y = np.array([[0.25]])
    out = eqm.solve_transport(x, np.array([0.5, 0.5]), y, np.array([1.0]))
    total = sum(m for _, _, m in out["pairs"])
    assert total == pytest.approx(1.0)
    assert out["cost"] == pytest.approx(0.5 * (0.5 * 0.25**2 + 0.5 * 0.75**2))


def test_fourier_energy_unit_disk():
    n = 128
    h = 12.0 / n
    xs = -6.0 + h * (np.arange(n) + 0.5)
    xx, yy = np.meshgrid(xs, xs, indexing="ij")
    cells = (xx**2 + yy**2 <= 1.0).astype(float)
    e = eqm.fourier_energy(cells, [-6.0, -6.0], [h, h], 4.0)
    assert e == pytest.approx(0.25, abs=0.02)


def test_minimize_1d_point_target():
    grid = list(np.linspace(-2.5, 2.5, 101))
    out = eqm.minimize_1d(grid, [0.0], [1.0])
    assert out["lambda"] == pytest.approx(1.0, abs=0.02)
    assert out["max_support_dev"] <= 1e-5
    assert sum(out["weights"]) == pytest.approx(1.0)


def test_gas_semicircle_statistics():
    out = eqm.sample_gas(n=32, g=2.0, sweeps=1000, burn_in=300, seed=7)
    vals = out["positions"]
    assert len(vals) == 32 * 1000
    assert eqm.ks_statistic(vals, 2.0) <= 0.08
    assert eqm.semicircle_cdf(0.0, 2.0) == pytest.approx(0.5)
    assert eqm.semicircle_density(0.0, 2.0) > 0.0
