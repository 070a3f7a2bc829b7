"""Decay measurement and certification machinery.

Turns trajectories into distance-to-equilibrium series, fits polynomial and
stretched-exponential rates in the coordinates that make each model linear,
checks envelope domination, and computes the constants behind the decay:
the weak Poincare constant of the steady state (a constrained generalized
eigenvalue), Lyapunov drift margins, convex relative entropies, Nash
quotients, and the interpolation chain between weighted L^2 norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Union

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .discretization import Grid
from .evolution import Trajectory, _column_norms
from .force_field import ForceField, fd_gradient
from .steady_state import Density
from .util import bracket, cutoff
from .weights import NormSpec, Weight, DecayEnvelope

NormLike = Union[NormSpec, tuple, str]


@dataclass
class CellNorm:
    """A p-norm against explicit per-cell weight values (left-hand norms)."""

    p: float
    weights: np.ndarray
    label: str = "custom"


def norm_of(values: np.ndarray, norm: NormLike, grid: Grid) -> float:
    if isinstance(norm, CellNorm):
        norm = (norm.p, norm.weights)
    return float(_column_norms(np.asarray(values, dtype=float)[:, None],
                               norm, grid)[0])


@dataclass
class DecaySeries:
    """Distances to equilibrium at the trajectory's output times."""

    times: np.ndarray
    distances: np.ndarray
    label: str = ""
    initial_mass: float = 0.0

    def __len__(self) -> int:
        return len(self.times)


def decay_series(traj: Trajectory, steady: Density, norm: NormLike,
                 label: str = "") -> DecaySeries:
    """d(t_k) = || f(t_k) - M(f_0) G || in the requested norm."""
    m0 = float(traj.masses[0])
    diffs = traj.snapshots - m0 * steady.values[None, :]
    if isinstance(norm, CellNorm):
        norm = (norm.p, norm.weights)
    dist = _column_norms(diffs.T, norm, traj.grid)
    return DecaySeries(times=traj.times.copy(), distances=dist, label=label,
                       initial_mass=m0)


@dataclass
class DecayFit:
    """A fitted decay model d(t) ~ amplitude * envelope(t)."""

    kind: str                      # "polynomial" | "stretched"
    exponent: float                # beta, or lam for stretched
    sigma: float                   # stretch power (0 for polynomial)
    amplitude: float
    window: tuple
    n_points: int
    r_squared: float

    @property
    def envelope(self) -> Optional[DecayEnvelope]:
        if self.exponent <= 0.0:
            return None
        if self.kind == "polynomial":
            return DecayEnvelope.polynomial(self.exponent)
        return DecayEnvelope.stretched(self.exponent, self.sigma)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind, "exponent": self.exponent, "sigma": self.sigma,
            "amplitude": self.amplitude, "window": list(self.window),
            "n_points": self.n_points, "r_squared": self.r_squared,
        }


def select_fit_window(series: DecaySeries, gap: Optional[float] = None,
                      burn_fraction: float = 0.5,
                      min_points: int = 8) -> tuple:
    """Fit window skipping the initial transient and the gap-dominated tail.

    Starts once the distance has dropped below `burn_fraction` of its initial
    value.  On a truncated domain the instantaneous rate -d(log d)/dt falls
    toward the spectral gap, where plain exponential decay takes over; when a
    gap is supplied the window ends as soon as the local rate comes within a
    factor 1.25 of it.
    """
    ok = series.distances > 0.0
    t, d = series.times[ok], series.distances[ok]
    if len(t) < min_points:
        raise ValueError(f"only {len(t)} positive distances in the series")
    start = int(np.argmax(d <= burn_fraction * d[0])) if d[0] > 0 else 0
    if d[start] > burn_fraction * d[0]:
        start = 0                      # never dropped that far; keep everything
    end = len(t)
    if gap is not None and gap > 0.0:
        logd = np.log(d)
        with np.errstate(divide="ignore"):
            slopes = np.diff(logd) / np.diff(t)
        for k in range(start + min_points, len(slopes)):
            if -slopes[k] <= 1.25 * gap:
                end = k + 1
                break
    if end - start < min_points:
        start = max(0, end - min_points)
    if end - start < min_points:
        raise ValueError(
            f"window [{start}:{end}] keeps fewer than {min_points} points")
    return (float(t[start]), float(t[end - 1]))


def _window_data(series: DecaySeries, window: Optional[tuple],
                 gap: Optional[float]) -> tuple[np.ndarray, np.ndarray, tuple]:
    if window is None:
        window = select_fit_window(series, gap=gap)
    t0, t1 = window
    keep = (series.times >= t0) & (series.times <= t1) & (series.distances > 0.0)
    t, d = series.times[keep], series.distances[keep]
    if len(t) < 8:
        raise ValueError(f"fewer than 8 positive distances in window {window}")
    return t, d, window


def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares slope/intercept and R^2 of y against x."""
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 and ss_res == 0.0 else \
        (0.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot)
    return float(coef[0]), float(coef[1]), r2


def fit_polynomial_rate(series: DecaySeries, window: Optional[tuple] = None,
                        gap: Optional[float] = None) -> DecayFit:
    """Fit d(t) ~ C (1+t)^-beta by least squares in log/log1p coordinates."""
    t, d, window = _window_data(series, window, gap)
    slope, intercept, r2 = _linear_fit(np.log1p(t), np.log(d))
    return DecayFit(kind="polynomial", exponent=-slope, sigma=0.0,
                    amplitude=float(np.exp(intercept)), window=window,
                    n_points=len(t), r_squared=r2)


def fit_stretched_rate(series: DecaySeries, sigma: float,
                       window: Optional[tuple] = None,
                       gap: Optional[float] = None) -> DecayFit:
    """Fit d(t) ~ C exp(-lam t^sigma) by least squares in t^sigma coordinates."""
    if not (0.0 < sigma <= 1.0):
        raise ValueError(f"sigma must lie in (0, 1], got {sigma}")
    t, d, window = _window_data(series, window, gap)
    slope, intercept, r2 = _linear_fit(t ** sigma, np.log(d))
    return DecayFit(kind="stretched", exponent=-slope, sigma=sigma,
                    amplitude=float(np.exp(intercept)), window=window,
                    n_points=len(t), r_squared=r2)


def envelope_check(series: DecaySeries, envelope: DecayEnvelope,
                   C: float) -> float:
    """max_k [ d(t_k) - C * Theta(t_k) * d(0) ]; <= 0 means dominated."""
    if C <= 0.0:
        raise ValueError("C must be positive")
    theta = envelope.value(series.times)
    return float(np.max(series.distances - C * theta * series.distances[0]))


def calibrated_envelope_margin(series: DecaySeries, envelope: DecayEnvelope,
                               t_anchor: float) -> tuple[float, float]:
    """Calibrate C so the envelope touches d at t_anchor, then check the rest."""
    k = int(np.argmin(np.abs(series.times - t_anchor)))
    d0 = series.distances[0]
    if d0 <= 0.0 or series.distances[k] <= 0.0:
        raise ValueError("cannot calibrate on zero distances")
    C = float(series.distances[k] / (envelope.value(series.times[k]) * d0))
    later = series.times >= series.times[k]
    sub = DecaySeries(series.times[later], series.distances[later],
                      series.label, series.initial_mass)
    sub.distances = sub.distances.copy()
    margin = float(np.max(sub.distances - C * envelope.value(sub.times) * d0))
    return margin, C


def _logmean(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Logarithmic mean (a-b)/log(a/b), stable near a = b; positive inputs."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    u = np.log(b) - np.log(a)
    small = np.abs(u) < 1e-5
    out = np.empty_like(a)
    us = u[small]
    # (e^u - 1)/u = 1 + u/2 + u^2/6 + ...
    out[small] = a[small] * (1.0 + us / 2.0 + us * us / 6.0)
    ub = u[~small]
    out[~small] = a[~small] * np.expm1(ub) / ub
    return out


def _face_pairs(grid: Grid):
    n = grid.n
    if grid.dim == 1:
        idx = np.arange(n)
        yield idx[:-1], idx[1:]
    else:
        idx = np.arange(n * n).reshape(n, n)
        yield idx[:-1, :].ravel(), idx[1:, :].ravel()
        yield idx[:, :-1].ravel(), idx[:, 1:].ravel()


def steady_stiffness(G: Density, gen=None) -> sp.csr_matrix:
    """Stiffness K with u^T K u = integral |grad u|^2 G, discretely.

    Given the generator, K is its additive symmetrization in the
    G-weighted pairing: edge weight s_ij = (vol_i l_ij G_j + vol_j l_ji G_i)/2,
    which reproduces the scheme's dissipation -<Lf, f/G> exactly, for
    non-reversible generators too.  Without it, faces carry the conductance
    (log G_i - log G_j)/(1/G_j - 1/G_i); for gradient fields the two
    constructions coincide because the discrete steady state is the Gibbs
    density at the cell centers.
    """
    grid = G.grid
    N = grid.n_cells
    if gen is not None:
        A = sp.diags(grid.volumes) @ gen.matrix @ sp.diags(G.values)
        S = 0.5 * (A + A.T)
        S = S.tolil()
        S.setdiag(0.0)
        S = S.tocsr()
        S.eliminate_zeros()
        deg = np.asarray(S.sum(axis=1)).ravel()
        return (sp.diags(deg) - S).tocsr()
    scale = grid.h ** (grid.dim - 2)
    rows, cols, vals = [], [], []
    for left, right in _face_pairs(grid):
        gl, gr = G.values[left], G.values[right]
        c = gl * gr / _logmean(gl, gr) * scale
        rows += [left, right, left, right]
        cols += [right, left, left, right]
        vals += [-c, -c, c, c]
    K = sp.coo_matrix((np.concatenate(vals),
                       (np.concatenate(rows), np.concatenate(cols))),
                      shape=(N, N)).tocsr()
    return K


@dataclass
class PoincareReport:
    """Constrained smallest generalized eigenvalue of (stiffness, mass)."""

    mu: float
    rhs_power: float
    method: str
    pencil_eigenvalues: np.ndarray
    feasible_count: int

    def as_dict(self) -> dict:
        return {
            "mu": self.mu, "rhs_power": self.rhs_power, "method": self.method,
            "pencil_eigenvalues": [float(v) for v in self.pencil_eigenvalues],
            "feasible_count": self.feasible_count,
        }


def weak_poincare_constant(G: Density, gamma: float,
                           rhs_power: Optional[float] = None,
                           k_eigs: int = 6, gen=None) -> PoincareReport:
    """Best mu with int |grad u|^2 G >= mu int u^2 <x>^rhs_power G on
    the mean-zero subspace {sum vol u G = 0}.

    rhs_power defaults to 2(gamma-1); rhs_power = 0 recovers the classical
    Poincare constant, which degrades as the domain grows (no spectral gap
    survives the truncation limit for gamma < 1).

    The constrained minimum is found exactly: pencil eigenvectors that already
    satisfy the constraint are candidates, and the remaining candidate is the
    unique root of mu -> g^T (K - mu W)^{-1} g between 0 and the first
    infeasible pencil eigenvalue (the function is strictly increasing there).
    """
    if not (0.0 < gamma < 1.0):
        raise ValueError("gamma must lie in (0, 1)")
    if np.min(G.values) <= 0.0:
        raise ValueError("G must be strictly positive")
    grid = G.grid
    if rhs_power is None:
        rhs_power = 2.0 * (gamma - 1.0)
    K = steady_stiffness(G, gen=gen)
    w_diag = grid.volumes * bracket(grid.centers) ** rhs_power * G.values
    g = grid.volumes * G.values
    N = grid.n_cells
    k_eigs = min(k_eigs, N - 2)

    # smallest pencil eigenpairs of K u = lam W u via the symmetric reduction
    d_inv = 1.0 / np.sqrt(w_diag)
    S = sp.diags(d_inv) @ K @ sp.diags(d_inv)
    if grid.dim == 1:
        Sc = S.tocsr()
        main = Sc.diagonal()
        off = Sc.diagonal(1)
        lam, Z = scipy.linalg.eigh_tridiagonal(
            main, off, select="i", select_range=(0, k_eigs - 1))
        method = "tridiagonal-pencil"
    else:
        shift = -1e-10 * float(np.max(np.abs(S.diagonal())))
        v0 = np.ones(N) / np.sqrt(N)
        lam, Z = spla.eigsh(S.tocsc(), k=k_eigs, sigma=shift, which="LM", v0=v0)
        order = np.argsort(lam)
        lam, Z = lam[order], Z[:, order]
        method = "shift-invert-pencil"
    vecs = d_inv[:, None] * Z            # pencil eigenvectors, W-orthonormal

    g_dot = np.abs(vecs.T @ g)
    g_scale = np.linalg.norm(g) * np.linalg.norm(vecs, axis=0)
    lam_scale = max(float(lam[-1]), 1e-300)
    feasible = [float(lam[i]) for i in range(len(lam))
                if lam[i] > 1e-10 * lam_scale and g_dot[i] <= 1e-8 * g_scale[i]]
    poles = [float(lam[i]) for i in range(len(lam))
             if lam[i] > 1e-10 * lam_scale and g_dot[i] > 1e-8 * g_scale[i]]

    candidates = list(feasible)
    hi = poles[0] if poles else float(lam[-1])
    W = sp.diags(w_diag)

    def secular(mu: float) -> float:
        lu = spla.splu((K - mu * W).tocsc())
        return float(g @ lu.solve(g))

    lo = 1e-9 * hi
    f_hi = secular(hi * (1.0 - 1e-9))
    if f_hi > 0.0 and secular(lo) < 0.0:
        root = scipy.optimize.brentq(secular, lo, hi * (1.0 - 1e-9),
                                     xtol=1e-14 * hi, rtol=1e-12)
        candidates.append(float(root))
    elif f_hi < 0.0:
        candidates.append(float(hi))          # root sits at/beyond the bracket end
    if not candidates:
        raise RuntimeError("no feasible candidate for the constrained minimum")
    return PoincareReport(mu=float(min(candidates)), rhs_power=float(rhs_power),
                          method=method, pencil_eigenvalues=np.asarray(lam),
                          feasible_count=len(feasible))


@dataclass
class LyapunovReport:
    passed: bool
    max_margin: float
    argmax_point: np.ndarray
    zeta0: float
    M: float
    R: float

    def as_dict(self) -> dict:
        return {
            "passed": self.passed, "max_margin": self.max_margin,
            "argmax_point": [float(v) for v in np.atleast_1d(self.argmax_point)],
            "zeta0": self.zeta0, "M": self.M, "R": self.R,
        }


def lyapunov_check(field: ForceField, w, zeta0: float, M: float, R: float,
                   samples: np.ndarray) -> LyapunovReport:
    """Margin of the drift condition Lap w - grad V . grad w <= w (-zeta + M chi_R)
    with the decaying rate zeta(x) = zeta0 <x>^(2(gamma-1)).

    The reported margin is normalized by w, so exponential weights stay
    representable at any radius: Weight instances go through their
    closed-form log derivatives and never evaluate w itself.  Positive
    callables fall back to finite differences.  Positive max margin means
    the condition fails.
    """
    pts = np.asarray(samples, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, field.dim)
    if field.grad_potential is None:
        raise ValueError("field carries no potential gradient")
    gradV = field.grad_potential(pts)
    if isinstance(w, Weight):
        lap_over = w.laplacian_over_value(pts)
        grad_over = w.grad_over_value(pts)
    else:
        wv = np.asarray(w(pts), dtype=float)
        if np.any(wv <= 0.0):
            raise ValueError("w must be strictly positive")
        grad_over = fd_gradient(w, pts) / wv[:, None]
        h = 1e-4 * bracket(pts)
        lap_w = np.zeros(len(pts))
        for j in range(field.dim):
            step = np.zeros_like(pts)
            step[:, j] = h
            lap_w += (w(pts + step) - 2.0 * wv + w(pts - step)) / (h * h)
        lap_over = lap_w / wv
    zeta = zeta0 * bracket(pts) ** (2.0 * (field.gamma - 1.0))
    margin = lap_over - np.sum(gradV * grad_over, axis=-1) \
        + zeta - M * cutoff(pts, R)
    worst = int(np.argmax(margin))
    return LyapunovReport(passed=bool(margin[worst] <= 0.0),
                          max_margin=float(margin[worst]),
                          argmax_point=pts[worst], zeta0=float(zeta0),
                          M=float(M), R=float(R))


_CONVEX_PROFILES: dict[str, Callable] = {
    "square": lambda s: s * s,
    "abs": np.abs,
}


def convex_profile(name: str, c: float = 0.0) -> Callable:
    """Built-in convex profiles: 'square', 'abs', 'pos_shift' ((s-c)+)."""
    if name == "pos_shift":
        return lambda s: np.maximum(s - c, 0.0)
    try:
        return _CONVEX_PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown convex profile {name!r}") from None


@dataclass
class EntropySeries:
    times: np.ndarray
    values: np.ndarray
    nonincreasing: bool
    max_uptick: float
    tolerance: float

    def as_dict(self) -> dict:
        return {
            "times": [float(t) for t in self.times],
            "values": [float(v) for v in self.values],
            "nonincreasing": self.nonincreasing,
            "max_uptick": self.max_uptick,
            "tolerance": self.tolerance,
        }


def entropy_series(traj: Trajectory, steady: Density, profile,
                   rel_tol: float = 1e-9) -> EntropySeries:
    """H(t_k) = sum vol j(f/G) G for a convex profile j.

    The discrete flow dissipates every such functional (the generator has
    nonnegative off-diagonal entries, conservative columns, and kernel G), so
    upticks beyond rel_tol * |H(0)| flag a broken discretization.
    """
    if isinstance(profile, str):
        profile = convex_profile(profile)
    if np.min(steady.values) <= 0.0:
        raise ValueError("steady state must be strictly positive")
    u = traj.snapshots / steady.values[None, :]
    H = (profile(u) * steady.values[None, :]) @ traj.grid.volumes
    diffs = np.diff(H)
    tol = rel_tol * abs(H[0]) if H[0] != 0.0 else rel_tol
    max_up = float(np.max(diffs)) if len(diffs) else 0.0
    return EntropySeries(times=traj.times.copy(), values=H,
                         nonincreasing=bool(max_up <= tol),
                         max_uptick=max_up, tolerance=tol)


def nash_quotient(g, grid: Optional[Grid] = None) -> float:
    """||g||_2^2 / ( ||grad g||_2^(2d/(d+2)) ||g||_1^(4/(d+2)) ), discrete.

    Scale invariant: dilations leave the continuum quotient unchanged, so
    comparable values across probe families signal a genuine inequality
    constant rather than a units artifact.
    """
    if isinstance(g, Density):
        grid = g.grid
        vals = g.values
    else:
        vals = np.asarray(g, dtype=float)
        if grid is None:
            raise ValueError("grid needed for raw arrays")
    if np.all(vals == 0.0):
        raise ValueError("Nash quotient of the zero function")
    vol = grid.volumes[0]
    l2sq = float(np.sum(vals * vals) * vol)
    l1 = float(np.sum(np.abs(vals)) * vol)
    h = grid.h
    gradsq = 0.0
    if grid.dim == 1:
        d = np.diff(vals)
        gradsq = float(np.sum(d * d) * vol / (h * h))
    else:
        shaped = vals.reshape(grid.n, grid.n)
        for axis in (0, 1):
            d = np.diff(shaped, axis=axis)
            gradsq += float(np.sum(d * d) * vol / (h * h))
    if gradsq == 0.0:
        return math.inf
    d_ = grid.dim
    return l2sq / (gradsq ** (d_ / (d_ + 2.0)) * l1 ** (4.0 / (d_ + 2.0)))


@dataclass
class InterpolationReport:
    """Checks for the three-space interpolation chain along a trajectory."""

    c_alpha: float
    alpha: float
    mu: float
    diff_max_violation: float
    diff_passed: bool
    envelope_constant: float
    alpha_best: float
    e0: np.ndarray
    e1: np.ndarray
    e2: np.ndarray

    def as_dict(self) -> dict:
        return {
            "c_alpha": self.c_alpha, "alpha": self.alpha, "mu": self.mu,
            "diff_max_violation": self.diff_max_violation,
            "diff_passed": self.diff_passed,
            "envelope_constant": self.envelope_constant,
            "alpha_best": self.alpha_best,
            "e0": [float(v) for v in self.e0],
            "e1": [float(v) for v in self.e1],
            "e2": [float(v) for v in self.e2],
        }


def interpolation_chain_check(traj: Trajectory, steady: Density, alpha: float,
                              mu: Optional[float] = None,
                              gamma: Optional[float] = None,
                              slack: float = 0.05) -> InterpolationReport:
    """Verify the norm interpolation and the differential decay inequality.

    E0, E1 weigh f by G^(-1/2) <x>^(gamma-1) and G^(-1/2); E2 is sup |f/G|.
    Checks (i) ||f||_E1 <= C ||f||_E0^(1/alpha) ||f||_E2^(1-1/alpha) with the
    best C over the trajectory, (ii) the finite-difference version of
    d/dt E1^2 <= -2 mu E0^2 (right endpoint, relative slack), and (iii) the
    best constant in E1(t) <= C t^(-1/(alpha-1)) E2(0).

    Requires mean-zero initial data.
    """
    if alpha <= 1.0:
        raise ValueError("alpha must exceed 1")
    grid = traj.grid
    m0 = float(traj.masses[0])
    scale_l1 = float(np.sum(np.abs(traj.snapshots[0]) * grid.volumes))
    if abs(m0) > 1e-12 * max(scale_l1, 1e-300):
        raise ValueError(f"initial datum must be mean-zero (mass {m0:.3e})")
    if gamma is None:
        gamma = traj.meta.get("gamma")
        if gamma is None:
            raise ValueError("gamma not recorded in trajectory; pass it explicitly")
    if mu is None:
        mu = weak_poincare_constant(steady, gamma).mu

    b = bracket(grid.centers)
    Ginv = 1.0 / steady.values
    w0 = np.sqrt(Ginv) * b ** (gamma - 1.0)
    w1 = np.sqrt(Ginv)
    snaps = traj.snapshots
    e0 = np.sqrt(((snaps * w0[None, :]) ** 2) @ grid.volumes)
    e1 = np.sqrt(((snaps * w1[None, :]) ** 2) @ grid.volumes)
    e2 = np.max(np.abs(snaps) * Ginv[None, :], axis=1)

    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = e1 / (e0 ** (1.0 / alpha) * e2 ** (1.0 - 1.0 / alpha))
    c_alpha = float(np.nanmax(ratios))

    t = traj.times
    lhs = np.diff(e1 ** 2) / np.diff(t)
    rhs = -2.0 * mu * e0[1:] ** 2
    viol = lhs - rhs
    ref = float(np.max(2.0 * mu * e0[1:] ** 2)) if len(e0) > 1 else 0.0
    diff_max = float(np.max(viol)) if len(viol) else 0.0
    diff_passed = bool(diff_max <= slack * ref + 1e-14 * max(ref, 1.0))

    pos = t > 0.0
    env_c = float(np.max(e1[pos] * t[pos] ** (1.0 / (alpha - 1.0)) / e2[0])) \
        if np.any(pos) and e2[0] > 0 else math.inf

    alphas = np.arange(1.1, 6.01, 0.05)
    best_alpha, best_c = alpha, math.inf
    for a in alphas:
        with np.errstate(divide="ignore", invalid="ignore"):
            c = float(np.nanmax(e1 / (e0 ** (1.0 / a) * e2 ** (1.0 - 1.0 / a))))
        if c < best_c:
            best_alpha, best_c = float(a), c
    return InterpolationReport(
        c_alpha=c_alpha, alpha=float(alpha), mu=float(mu),
        diff_max_violation=diff_max, diff_passed=diff_passed,
        envelope_constant=env_c, alpha_best=best_alpha,
        e0=e0, e1=e1, e2=e2)
