"""Steady states and spectral structure of the discrete generator.

The discrete generator has a one-dimensional kernel spanned by a strictly
positive vector (the steady state); every other eigenvalue has negative real
part.  The solver below recovers the kernel by shifted inverse iteration,
which stays positive because the resolvent of an M-matrix maps nonnegative
vectors to nonnegative vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .discretization import Generator, Grid
from .util import bracket, radius


@dataclass
class Density:
    """Cell values on a grid, with cached mass and positivity flags."""

    grid: Grid
    values: np.ndarray
    _mass: Optional[float] = dc_field(default=None, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_cells,):
            raise ValueError(
                f"values shape {self.values.shape} does not match grid "
                f"({self.grid.n_cells} cells)")

    @property
    def mass(self) -> float:
        if self._mass is None:
            self._mass = float(np.sum(self.grid.volumes * self.values))
        return self._mass

    @property
    def min_value(self) -> float:
        return float(np.min(self.values))

    @property
    def nonnegative(self) -> bool:
        return bool(self.min_value >= 0.0)

    def normalized(self) -> "Density":
        m = self.mass
        if m == 0.0:
            raise ValueError("cannot normalize a zero-mass density")
        return Density(self.grid, self.values / m)


def solve_steady(gen: Generator, seed: Optional[np.ndarray] = None,
                 tol: float = 1e-10, max_iter: int = 50) -> Density:
    """Positive unit-mass kernel vector of the generator.

    Shifted inverse iteration on (L - eps I) with eps = 1e-8 ||L||; each sweep
    renormalizes to unit mass.  Convergence requires both
    ||L G|| <= tol * ||L|| * ||G|| and componentwise stagnation of the
    iterates; the residual alone cannot certify relative accuracy in the far
    tail, where G is many orders of magnitude below its peak.
    """
    mat = gen.matrix
    scale = gen.norm_scale()
    eps = 1e-8 * scale
    lu = spla.splu((mat - eps * sp.identity(mat.shape[0], format="csr")).tocsc())
    vols = gen.grid.volumes
    v = np.ones(mat.shape[0]) if seed is None else np.asarray(seed, dtype=float)
    if np.sum(vols * v) <= 0.0 and seed is not None:
        raise ValueError("seed must have positive mass")
    history = []
    for _ in range(max_iter):
        prev = v
        v = lu.solve(v)
        v = v / np.sum(vols * v)      # signed mass also repairs the shift's sign flip
        res = float(np.linalg.norm(mat @ v) / (scale * np.linalg.norm(v)))
        diff = np.abs(v - prev)
        with np.errstate(divide="ignore", invalid="ignore"):
            change = np.where(diff == 0.0, 0.0, diff / np.abs(v))
        history.append(res)
        if res <= tol and float(np.max(change)) <= 1e-12:
            break
    else:
        raise RuntimeError(
            f"steady-state iteration did not reach {tol:.1e}; "
            f"residual history: {['%.3e' % r for r in history]}")
    if np.min(v) <= 0.0:
        raise RuntimeError(
            f"steady state lost positivity (min = {np.min(v):.3e}); "
            "the generator is not an admissible discretization")
    return Density(gen.grid, v)


@dataclass
class TailReport:
    """Comparison of G against the reference envelope exp(-kappa <x>^gamma)."""

    passed: bool
    sup_inner: float
    sup_outer: float
    ratio: float
    shell_edges: np.ndarray
    shell_sups: np.ndarray
    kappa: float
    gamma: float

    def as_dict(self) -> dict:
        return {
            "passed": self.passed, "sup_inner": self.sup_inner,
            "sup_outer": self.sup_outer, "ratio": self.ratio,
            "shell_edges": [float(v) for v in self.shell_edges],
            "shell_sups": [float(v) for v in self.shell_sups],
            "kappa": self.kappa, "gamma": self.gamma,
        }


def tail_bound_check(G: Density, kappa: float, gamma: float,
                     n_shells: int = 8) -> TailReport:
    """Check sup G exp(kappa <x>^gamma) over the outer half of the domain
    against the inner half (factor-10 tolerance), with a radial shell profile.
    """
    if kappa <= 0.0:
        raise ValueError("kappa must be positive")
    grid = G.grid
    r = radius(grid.centers)
    u = G.values * np.exp(kappa * bracket(grid.centers) ** gamma)
    half = 0.5 * grid.half_width
    inner, outer = r <= half, r > half
    sup_in = float(np.max(u[inner]))
    sup_out = float(np.max(u[outer])) if np.any(outer) else 0.0
    edges = np.linspace(0.0, float(np.max(r)) + 1e-12, n_shells + 1)
    sups = np.zeros(n_shells)
    for i in range(n_shells):
        m = (r >= edges[i]) & (r < edges[i + 1])
        sups[i] = float(np.max(u[m])) if np.any(m) else 0.0
    ratio = sup_out / sup_in if sup_in > 0.0 else np.inf
    return TailReport(passed=bool(ratio <= 10.0), sup_inner=sup_in,
                      sup_outer=sup_out, ratio=float(ratio),
                      shell_edges=edges, shell_sups=sups,
                      kappa=float(kappa), gamma=float(gamma))


@dataclass
class SpectrumReport:
    """Rightmost eigenvalues, sorted by descending real part."""

    eigenvalues: np.ndarray       # complex
    residuals: np.ndarray
    zero_multiplicity: int
    method: str
    scale: float

    @property
    def gap(self) -> float:
        """|Re| of the rightmost nonzero eigenvalue."""
        nz = [ev for ev in self.eigenvalues if abs(ev) > 1e-9 * max(self.scale, 1.0)]
        if not nz:
            return 0.0
        return float(-max(ev.real for ev in nz))

    def as_dict(self) -> dict:
        return {
            "eigenvalues": [[float(ev.real), float(ev.imag)]
                            for ev in self.eigenvalues],
            "residuals": [float(r) for r in self.residuals],
            "zero_multiplicity": self.zero_multiplicity,
            "method": self.method,
            "scale": self.scale,
            "gap": self.gap,
        }


def _rank_of_vectors(vecs: list[np.ndarray], tol: float = 1e-8) -> int:
    """Numerical rank of a small set of unit vectors (second-singular-value test)."""
    A = np.column_stack([v / np.linalg.norm(v) for v in vecs])
    s = scipy.linalg.svdvals(A)
    return int(np.sum(s > tol))


def rightmost_spectrum(gen: Generator, count: int = 6,
                       dense_cutoff: int = 600) -> SpectrumReport:
    """Eigenvalues of largest real part, via shift-invert Arnoldi.

    Small problems (n_cells <= dense_cutoff) use a dense solve; this is also
    the cross-check path.  Multiplicity of the zero eigenvalue is estimated by
    a rank test on the Ritz vectors found within |lambda| <= 1e-9 * max(1, ||L||).
    """
    mat = gen.matrix
    N = mat.shape[0]
    scale = gen.norm_scale()
    count = min(count, N - 2)
    if N <= dense_cutoff:
        dense = mat.toarray()
        lam, vec = scipy.linalg.eig(dense)
        order = np.argsort(-lam.real)[:count]
        lam, vec = lam[order], vec[:, order]
        method = "dense"
    else:
        sigma = 1e-8 * scale
        v0 = np.ones(N) / np.sqrt(N)
        lam, vec = spla.eigs(mat.tocsc().astype(float), k=count + 2,
                             sigma=sigma, which="LM", v0=v0)
        order = np.argsort(-lam.real)[:count]
        lam, vec = lam[order], vec[:, order]
        method = "arpack-shift-invert"
    res = np.array([
        np.linalg.norm(mat @ vec[:, i] - lam[i] * vec[:, i])
        / np.linalg.norm(vec[:, i]) for i in range(len(lam))])
    ztol = 1e-9 * max(scale, 1.0)
    zero_idx = [i for i in range(len(lam)) if abs(lam[i]) <= ztol]
    if len(zero_idx) <= 1:
        mult = len(zero_idx)
    else:
        mult = _rank_of_vectors([vec[:, i].real if np.allclose(vec[:, i].imag, 0)
                                 else vec[:, i] for i in zero_idx])
    return SpectrumReport(eigenvalues=lam, residuals=res,
                          zero_multiplicity=mult, method=method, scale=scale)
