"""Steady states, tail diagnostics, and rightmost spectra.

For gradient drifts the scheme's steady state must coincide with the
renormalized Gibbs vector exp(-V(x_i))/Z_h to roundoff, which gives a
sharp external oracle.  For the rotated non-gradient field exp(-V) stays
invariant (the swirl is divergence-structured), so the same oracle applies
in 2D.  Long-time integration is kept as an independent cross-check.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from subfp import (
    Density,
    build_generator,
    build_grid,
    canonical_gradient_field,
    evolve,
    rightmost_spectrum,
    rotated_field,
    solve_steady,
    tail_bound_check,
)


def _gibbs(grid, field):
    g = np.exp(-field.potential(grid.centers))
    return g / np.sum(g * grid.volumes)


# =====================================================================
# exactness against the Gibbs oracle
# =====================================================================

def test_steady_matches_gibbs_1d(field1d):
    grid = build_grid(1, 30.0, 1024)
    gen = build_generator(grid, field1d)
    G = solve_steady(gen)
    oracle = _gibbs(grid, field1d)
    assert np.max(np.abs(G.values - oracle) / oracle) <= 1e-8


def test_steady_matches_gibbs_2d_rotated():
    base = canonical_gradient_field(0.5, dim=2)
    rot = rotated_field(base, 0.7)
    grid = build_grid(2, 15.0, 64)
    gen = build_generator(grid, rot)
    G = solve_steady(gen)
    oracle = _gibbs(grid, base)
    assert np.max(np.abs(G.values - oracle) / oracle) <= 1e-6


def test_zero_field_steady_is_uniform():
    grid = build_grid(2, 3.0, 16)
    gen = build_generator(grid, None)
    G = solve_steady(gen)
    assert_allclose(G.values, 1.0 / 36.0, rtol=1e-11)


def test_steady_basic_properties(G512, grid512):
    assert G512.nonnegative
    assert G512.min_value > 0.0
    assert_allclose(G512.mass, 1.0, rtol=1e-13)
    assert G512.values.shape == (grid512.n_cells,)


def test_steady_unique_across_seeds(gen512, rng):
    vols = gen512.grid.volumes
    sols = []
    for _ in range(5):
        seed = rng.random(gen512.grid.n_cells) + 0.01
        sols.append(solve_steady(gen512, seed=seed).values)
    for i, a in enumerate(sols):
        for b in sols[:i]:
            assert float(np.sum(np.abs(a - b) * vols)) <= 1e-8


def test_long_time_evolution_reaches_steady(gen512, G512):
    # independent cross-check: integrate a bump far past the mixing time
    x = gen512.grid.centers[:, 0]
    f0 = np.exp(-((x - 3.0) ** 2))
    f0 /= np.sum(f0 * gen512.grid.volumes)
    traj = evolve(f0, np.array([0.0, 300.0, 600.0]), gen512)
    err = float(np.sum(np.abs(traj.snapshots[-1] - G512.values)
                       * gen512.grid.volumes))
    assert err <= 1e-5


# =====================================================================
# density container
# =====================================================================

def test_density_validates_shape(grid512):
    with pytest.raises(ValueError):
        Density(grid512, np.ones(7))


def test_density_normalized(grid512):
    d = Density(grid512, np.full(grid512.n_cells, 3.0))
    n = d.normalized()
    assert_allclose(n.mass, 1.0, rtol=1e-14)


# =====================================================================
# tail lower-bound diagnostic
# =====================================================================

@pytest.fixture(scope="module")
def G_wide(field1d):
    grid = build_grid(1, 300.0, 4096)
    return solve_steady(build_generator(grid, field1d))


def test_tail_bound_subcritical_weight_passes(G_wide):
    rep = tail_bound_check(G_wide, 1.5, 0.5)
    assert rep.passed
    assert rep.ratio <= 10.0


def test_tail_bound_supercritical_weight_fails(G_wide):
    # kappa above 1/gamma: exp(kappa <x>^gamma) G is no longer integrable
    # in the limit and the shell ratio blows past the threshold
    rep = tail_bound_check(G_wide, 2.5, 0.5)
    assert not rep.passed
    assert rep.ratio > 10.0


def test_tail_bound_flat_state_fails():
    grid = build_grid(1, 300.0, 4096)
    G = solve_steady(build_generator(grid, None))
    assert not tail_bound_check(G, 1.5, 0.5).passed
    assert not tail_bound_check(G, 0.5, 0.5).passed


def test_tail_bound_validates_kappa(G_wide):
    with pytest.raises(ValueError):
        tail_bound_check(G_wide, -1.0, 0.5)


# =====================================================================
# rightmost spectrum
# =====================================================================

def test_spectrum_zero_mode_is_steady(gen512, G512):
    rep = rightmost_spectrum(gen512, count=5)
    lam = rep.eigenvalues
    assert rep.zero_multiplicity == 1
    assert np.min(np.abs(lam)) <= 1e-10 * rep.scale
    others = np.sort(lam.real)[:-1]
    assert np.all(others < 0.0)
    assert rep.gap > 0.0


def test_spectrum_dense_and_arpack_agree(field1d):
    grid = build_grid(1, 25.0, 256)
    gen = build_generator(grid, field1d)
    dense = rightmost_spectrum(gen, count=4)
    arpack = rightmost_spectrum(gen, count=4, dense_cutoff=10)
    assert dense.method == "dense"
    assert arpack.method != "dense"
    lam_d = np.sort(dense.eigenvalues.real)[-2]
    lam_a = np.sort(arpack.eigenvalues.real)[-2]
    assert_allclose(lam_a, lam_d, rtol=1e-8)


def test_spectral_gap_shrinks_with_domain(field1d):
    # no classical gap survives the truncation limit for gamma < 1
    gaps = []
    for L in (25.0, 50.0, 100.0):
        gen = build_generator(build_grid(1, L, 1024), field1d)
        gaps.append(rightmost_spectrum(gen, count=4).gap)
    assert gaps[0] > gaps[1] > gaps[2]
