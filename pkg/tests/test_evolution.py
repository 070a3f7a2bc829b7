"""Implicit-Euler semigroup: conservation, positivity, contraction, probes."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from subfp import (
    NormSpec,
    Weight,
    default_probes,
    evolve,
    find_splitting_constants,
    operator_norm_curve,
    operator_norm_lower_bound,
    split_generator,
    step_implicit,
)
from subfp.evolution import resolvent_factorization


def _bump(grid, center=3.0, width=1.0):
    x = grid.centers[:, 0]
    f = np.exp(-((x - center) / width) ** 2)
    return f / np.sum(f * grid.volumes)


# =====================================================================
# single implicit steps
# =====================================================================

def test_steady_state_is_a_fixed_point(gen512, G512):
    for dt in (1e-3, 1.0, 50.0):
        out = step_implicit(G512.values, dt, gen512)
        assert np.max(np.abs(out - G512.values)) <= 1e-11 * np.max(G512.values)


def test_positivity_unconditional(gen512, rng):
    f = rng.random(gen512.grid.n_cells)
    out = step_implicit(f, 10.0, gen512)
    assert np.min(out) >= -1e-14


def test_mass_conserved_per_step(gen512, rng):
    vols = gen512.grid.volumes
    f = rng.random(gen512.grid.n_cells)
    out = step_implicit(f, 2.0, gen512)
    assert abs(np.sum(out * vols) - np.sum(f * vols)) <= 1e-12 * np.sum(f * vols)


def test_step_validates_dt(gen512):
    with pytest.raises(ValueError):
        step_implicit(np.ones(gen512.grid.n_cells), -0.1, gen512)


def test_absorbed_part_loses_mass(gen512):
    # B = L - M chi_R removes mass at rate M inside the ball
    pair = split_generator(gen512, 2.0, 4.0)
    x = gen512.grid.centers[:, 0]
    f = np.where(np.abs(x) < 3.0, 1.0, 0.0)
    vols = gen512.grid.volumes
    out = step_implicit(f, 0.5, pair.dissipative)
    assert np.sum(out * vols) < 0.999 * np.sum(f * vols)


def test_factorization_reuse_is_exact(gen512, rng):
    f = rng.random(gen512.grid.n_cells)
    fa = resolvent_factorization(gen512, 0.25)
    fb = resolvent_factorization(gen512, 0.25)
    a = step_implicit(f, 0.25, gen512, factorization=fa)
    b = step_implicit(f, 0.25, gen512, factorization=fb)
    assert np.max(np.abs(a - b)) == 0.0


def test_discrete_semigroup_property(gen512, rng):
    # eight steps of S_dt equal five followed by three, independently factored
    f = rng.random(gen512.grid.n_cells)
    fa = resolvent_factorization(gen512, 0.25)
    fb = resolvent_factorization(gen512, 0.25)
    g8 = f.copy()
    for _ in range(8):
        g8 = step_implicit(g8, 0.25, gen512, factorization=fa)
    g53 = f.copy()
    for _ in range(5):
        g53 = step_implicit(g53, 0.25, gen512, factorization=fa)
    for _ in range(3):
        g53 = step_implicit(g53, 0.25, gen512, factorization=fb)
    assert np.max(np.abs(g8 - g53)) <= 1e-12 * np.max(np.abs(g8))


def test_first_order_time_accuracy(gen512, G512):
    # halving dt halves the error against a fine-step reference
    grid = gen512.grid
    f0 = _bump(grid) - G512.values
    T = 1.0

    def run(n_steps):
        dt = T / n_steps
        fac = resolvent_factorization(gen512, dt)
        g = f0.copy()
        for _ in range(n_steps):
            g = step_implicit(g, dt, gen512, factorization=fac)
        return g

    ref = run(512)
    e8 = np.sum(np.abs(run(8) - ref)) * grid.volumes[0]
    e16 = np.sum(np.abs(run(16) - ref)) * grid.volumes[0]
    assert 1.7 <= e8 / e16 <= 2.3


# =====================================================================
# trajectories
# =====================================================================

def test_evolve_from_steady_stays_there(gen512, G512):
    traj = evolve(G512.values, np.linspace(0.0, 10.0, 21), gen512)
    drift = np.max(np.abs(traj.snapshots - G512.values[None, :]))
    assert drift <= 1e-9 * np.max(G512.values)


def test_trajectory_mass_and_positivity(gen512):
    grid = gen512.grid
    f0 = _bump(grid, center=1.0, width=2.0)
    traj = evolve(f0, np.geomspace(0.01, 50.0, 30), gen512)
    assert np.max(np.abs(traj.masses - traj.masses[0])) <= 1e-11 * traj.masses[0]
    assert np.min(traj.snapshots) >= -1e-14


def test_mean_zero_l1_contracts(gen512, G512):
    grid = gen512.grid
    f0 = _bump(grid)
    f0 = f0 - G512.values * np.sum(f0 * grid.volumes)
    traj = evolve(f0, np.linspace(0.0, 20.0, 41), gen512)
    l1 = np.sum(np.abs(traj.snapshots), axis=1) * grid.volumes[0]
    assert np.all(np.diff(l1) <= 1e-12 * l1[0])


def test_evolve_validates_times(gen512):
    f = np.ones(gen512.grid.n_cells)
    with pytest.raises(ValueError):
        evolve(f, np.array([0.0, 2.0, 1.0]), gen512)
    with pytest.raises(ValueError):
        evolve(f, np.array([-1.0, 2.0]), gen512)


def test_trajectory_density_accessor(gen512):
    f0 = _bump(gen512.grid)
    traj = evolve(f0, np.array([0.0, 1.0]), gen512)
    d = traj.density(0)
    assert_allclose(d.values, f0, rtol=1e-14)
    assert traj.snapshots.shape == (2, gen512.grid.n_cells)


# =====================================================================
# operator norm probes
# =====================================================================

def test_default_probes_shape_and_determinism(grid512):
    a = default_probes(grid512)
    b = default_probes(grid512)
    assert_allclose(a, b)
    assert a.shape[0] == grid512.n_cells   # probes live in the columns
    assert a.shape[1] >= 16


def test_semigroup_l1_curve_is_exactly_one(gen512):
    # mass conservation + positivity: delta probes realize ratio 1 at all t
    spec = NormSpec(p=1.0, weight=Weight.polynomial(2.0, 0.5), theta=0.0)
    curve = operator_norm_curve(gen512, np.array([1e-4, 1e-2, 0.1, 1.0]),
                                spec, spec)
    assert np.all(curve <= 1.0 + 1e-10)
    assert np.all(curve >= 1.0 - 1e-9)


def test_absorbed_semigroup_contracts_weighted_l2(gen512, field1d):
    w = Weight.polynomial(2.0, 0.5)
    M, R, cert = find_splitting_constants(field1d, w, 2.0)
    assert cert.passed
    pair = split_generator(gen512, M, R)
    spec = NormSpec(p=2.0, weight=w, theta=1.0)
    times = np.array([1e-3, 0.1, 1.0, 5.0])
    curve = operator_norm_curve(pair.dissipative, times, spec, spec)
    assert np.all(curve <= 1.0 + 1e-10)
    assert curve[-1] < curve[0]     # genuine decay, not saturation


def test_lower_bound_consistent_with_curve(gen512):
    spec = NormSpec(p=1.0, weight=Weight.polynomial(2.0, 0.5), theta=0.0)
    probes = default_probes(gen512.grid)
    t = 0.5
    lo = operator_norm_lower_bound(gen512, t, spec, spec, probes)
    curve = operator_norm_curve(gen512, np.array([t]), spec, spec,
                                probes=probes)
    assert_allclose(lo, curve[0], rtol=1e-8)


def test_h1_destination_norms_run(gen512):
    src = NormSpec(p=1.0, weight=Weight.polynomial(2.0, 0.5), theta=0.0)
    curve = operator_norm_curve(gen512, np.array([0.5, 1.0]), src, "h1_seminorm")
    assert np.all(np.isfinite(curve)) and np.all(curve > 0.0)
