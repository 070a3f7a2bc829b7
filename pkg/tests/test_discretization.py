"""Finite-volume generator: grids, flux scheme, splitting, adjoint.

The scheme writes each face flux with exponential fitting so that the
Gibbs density exp(-V)/Z is a discrete steady state to roundoff.  Zero-flux
boundaries make every column of the matrix sum to zero against cell
volumes (mass conservation) and the sign pattern is that of an M-matrix,
which is what implicit Euler needs for unconditional positivity.
"""

import os

import numpy as np
import pytest
import scipy.sparse as sp
from numpy.testing import assert_allclose

from subfp import (
    Weight,
    adjoint_generator,
    build_generator,
    build_grid,
    canonical_gradient_field,
    default_scan_points,
    dissipation_asymptote,
    export_coo,
    find_splitting_constants,
    rotated_field,
    split_generator,
)
from subfp.discretization import bernoulli


# =====================================================================
# grids
# =====================================================================

def test_grid_1d_example():
    grid = build_grid(1, 10.0, 10)
    assert_allclose(grid.centers[:, 0], np.arange(-9.0, 10.0, 2.0))
    assert grid.h == 2.0


def test_grid_2d_example():
    grid = build_grid(2, 1.0, 4)
    assert grid.n_cells == 16
    assert_allclose(grid.volumes, 0.25)
    assert_allclose(np.sum(grid.volumes), 4.0)   # (2L)^dim


def test_grid_spacing_example():
    grid = build_grid(1, 50.0, 4096)
    assert grid.h == 100.0 / 4096.0


def test_grid_total_volume():
    grid = build_grid(2, 7.0, 12)
    assert_allclose(np.sum(grid.volumes), 14.0 ** 2, rtol=1e-13)


def test_grid_validation():
    with pytest.raises(ValueError):
        build_grid(3, 10.0, 16)
    with pytest.raises(ValueError):
        build_grid(1, -1.0, 16)
    with pytest.raises(ValueError):
        build_grid(1, 10.0, 1)


def test_grid_index_of_roundtrip():
    grid = build_grid(2, 5.0, 8)
    for k in (0, 13, 63):
        assert grid.index_of(grid.centers[k]) == k


# =====================================================================
# flux weights
# =====================================================================

def test_bernoulli_identities():
    w = np.array([-30.0, -2.0, -1e-8, 0.0, 1e-8, 2.0, 30.0])
    b = bernoulli(w)
    assert np.all(b > 0.0)
    assert_allclose(b[3], 1.0, rtol=1e-15)
    # B(-w) = B(w) e^w
    assert_allclose(bernoulli(-w[5:]), b[5:] * np.exp(w[5:]), rtol=1e-12)
    # no overflow far out
    assert np.isfinite(bernoulli(np.array([700.0, -700.0]))).all()


# =====================================================================
# generator structure
# =====================================================================

def test_zero_field_gives_neumann_laplacian():
    grid = build_grid(1, 4.0, 8)
    gen = build_generator(grid, None)
    A = gen.matrix.toarray() * grid.h ** 2
    assert_allclose(A[3], [0, 0, 1, -2, 1, 0, 0, 0], atol=1e-13)
    assert_allclose(A[0], [-1, 1, 0, 0, 0, 0, 0, 0], atol=1e-13)
    # constants are steady under zero flux
    assert_allclose(gen.matrix @ np.ones(8), 0.0, atol=1e-14)


def _structure_checks(gen):
    A = gen.matrix.tocsr()
    scale = gen.norm_scale()
    colsums = gen.grid.volumes @ A
    assert np.max(np.abs(colsums)) <= 1e-12 * scale
    off = A - sp.diags(A.diagonal())
    assert off.nnz == 0 or off.data.min() >= -1e-14 * scale
    assert A.diagonal().max() <= 1e-14 * scale


def test_mass_conservation_and_sign_pattern_1d(gen512):
    _structure_checks(gen512)


def test_mass_conservation_and_sign_pattern_2d_rotated():
    base = canonical_gradient_field(0.5, dim=2)
    rot = rotated_field(base, 0.7)
    gen = build_generator(build_grid(2, 12.0, 32), rot)
    _structure_checks(gen)
    assert "stream" in gen.meta.get("scheme", "")


def test_gibbs_in_discrete_kernel_1d(field1d):
    grid = build_grid(1, 30.0, 1024)
    gen = build_generator(grid, field1d)
    g = np.exp(-field1d.potential(grid.centers))
    g /= np.sum(g * grid.volumes)
    resid = np.max(np.abs(gen.matrix @ g)) / (gen.norm_scale() * np.max(g))
    assert resid <= 1e-13


def test_gibbs_in_discrete_kernel_2d_swirl():
    # the stream-function discretization keeps exp(-V) steady exactly even
    # with the non-gradient part switched on
    base = canonical_gradient_field(0.5, dim=2)
    rot = rotated_field(base, 0.7)
    grid = build_grid(2, 15.0, 48)
    gen = build_generator(grid, rot)
    g = np.exp(-base.potential(grid.centers))
    g /= np.sum(g * grid.volumes)
    resid = np.max(np.abs(gen.matrix @ g)) / (gen.norm_scale() * np.max(g))
    assert resid <= 1e-13


def test_dimension_mismatch_rejected(field1d):
    with pytest.raises(ValueError):
        build_generator(build_grid(2, 5.0, 8), field1d)


def test_resolvent_positivity(gen512, rng):
    # (I - dt L)^{-1} has nonnegative entries: random nonneg data stays so
    import scipy.sparse.linalg as spla

    dt = 10.0
    n = gen512.grid.n_cells
    A = sp.identity(n, format="csc") - dt * gen512.matrix.tocsc()
    lu = spla.splu(A)
    for _ in range(3):
        f = rng.random(n)
        assert np.min(lu.solve(f)) >= -1e-14


# =====================================================================
# splitting L = A + B
# =====================================================================

def test_split_zero_m_is_identity_split(gen512):
    pair = split_generator(gen512, 0.0, 3.0)
    assert (pair.bounded != 0).nnz == 0
    assert (pair.dissipative.matrix - gen512.matrix).nnz == 0


def test_split_reassembles_exactly(gen512):
    pair = split_generator(gen512, 2.0, 4.0)
    back = pair.bounded + pair.dissipative.matrix
    assert np.max(np.abs((back - gen512.matrix).toarray())) == 0.0


def test_split_diagonal_profile(gen512):
    M, R = 2.0, 4.0
    pair = split_generator(gen512, M, R)
    a = pair.a_diag
    x = np.abs(gen512.grid.centers[:, 0])
    origin = int(np.argmin(x))
    assert_allclose(a[origin], M, rtol=1e-12)
    assert np.all(a[x > 2 * R] == 0.0)
    assert np.all((0.0 <= a) & (a <= M + 1e-15))


def test_chi_profile_sandwich(gen512):
    pair = split_generator(gen512, 1.0, 4.0)
    x = np.abs(gen512.grid.centers[:, 0])
    chi = pair.chi
    assert np.all(chi[x <= 4.0] == 1.0)
    assert np.all(chi[x >= 8.0] == 0.0)


# =====================================================================
# certified splitting constants
# =====================================================================

def test_splitting_certificate_polynomial(field1d):
    w = Weight.polynomial(2.0, 0.5)
    M, R, cert = find_splitting_constants(field1d, w, 2.0)
    assert cert.passed
    assert cert.max_value <= 0.0
    assert cert.n_scan >= 10000
    assert M > 0.0 and R > 0.0


def test_splitting_rejects_unreachable_target(field1d):
    w = Weight.polynomial(2.0, 0.5)
    a_star = dissipation_asymptote(w, 2.0, field1d)
    with pytest.raises(ValueError):
        find_splitting_constants(field1d, w, 2.0, a_target=1.5 * a_star)


def test_splitting_stretched_weight_generous_target(field1d):
    # sub-gamma stretch: the profile decays faster than the comparison
    # scale, so even targets close to a* certify with small (M, R)
    w = Weight.stretched(0.5, 0.3, 0.5)
    a_star = dissipation_asymptote(w, 2.0, field1d)
    M, R, cert = find_splitting_constants(field1d, w, 2.0, a_target=0.9 * a_star)
    assert cert.passed and cert.max_value <= 0.0


def test_default_scan_points_deterministic():
    a = default_scan_points(1)
    b = default_scan_points(1)
    assert_allclose(a, b)
    assert len(a) >= 10000


# =====================================================================
# adjoint
# =====================================================================

def test_adjoint_is_an_involution(gen512):
    adj = adjoint_generator(gen512)
    back = adjoint_generator(adj)
    assert np.max(np.abs((back.matrix - gen512.matrix).toarray())) <= 1e-15


def test_adjoint_duality_pairing(gen512, rng):
    # <L f, g>_vol = <f, L* g>_vol
    vols = gen512.grid.volumes
    adj = adjoint_generator(gen512)
    for _ in range(3):
        f = rng.standard_normal(gen512.grid.n_cells)
        g = rng.standard_normal(gen512.grid.n_cells)
        lhs = float(np.sum(vols * (gen512.matrix @ f) * g))
        rhs = float(np.sum(vols * f * (adj.matrix @ g)))
        assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs), 1.0)


def test_adjoint_kills_constants(gen512):
    # mass conservation of L becomes L* 1 = 0
    adj = adjoint_generator(gen512)
    assert np.max(np.abs(adj.matrix @ np.ones(gen512.grid.n_cells))) \
        <= 1e-12 * gen512.norm_scale()


# =====================================================================
# matrix export
# =====================================================================

def test_export_coo_roundtrip(tmp_path, gen512):
    path = os.path.join(tmp_path, "gen.coo")
    export_coo(gen512, path)
    rows, cols, vals = [], [], []
    with open(path) as fh:
        for line in fh:
            i, j, v = line.split()
            rows.append(int(i)); cols.append(int(j)); vals.append(float(v))
    n = gen512.grid.n_cells
    back = sp.coo_matrix((vals, (rows, cols)), shape=(n, n))
    assert np.max(np.abs((back - gen512.matrix).toarray())) == 0.0
