"""Shared small helpers: point-array handling and the smoothed radius."""

from __future__ import annotations

import numpy as np


def as_points(x, dim: int) -> np.ndarray:
    """Coerce a single point or an array of points to shape (n, dim)."""
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 0:
        if dim != 1:
            raise ValueError(f"scalar point given for dim={dim}")
        return pts.reshape(1, 1)
    if pts.ndim == 1:
        if dim == 1 and pts.shape[0] != 1:
            # a batch of scalar abscissae
            return pts.reshape(-1, 1)
        return pts.reshape(1, dim)
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ValueError(f"expected points of shape (n, {dim}), got {pts.shape}")
    return pts


def radius(pts: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(pts * pts, axis=-1))


def bracket(pts: np.ndarray) -> np.ndarray:
    """Smoothed radius sqrt(1 + |x|^2), evaluated rowwise."""
    return np.sqrt(1.0 + np.sum(pts * pts, axis=-1))


def bracket_r(r: np.ndarray) -> np.ndarray:
    """Smoothed radius as a function of the plain radius."""
    r = np.asarray(r, dtype=float)
    return np.sqrt(1.0 + r * r)


def cutoff_profile(u) -> np.ndarray:
    """C^2 radial bump profile: 1 for u <= 1, 0 for u >= 2, quintic ramp between."""
    u = np.asarray(u, dtype=float)
    t = np.clip(u - 1.0, 0.0, 1.0)
    ramp = t * t * t * (10.0 + t * (6.0 * t - 15.0))
    return 1.0 - ramp


def cutoff(pts: np.ndarray, R: float) -> np.ndarray:
    """chi_R(x) = chi(|x|/R): 1 inside B_R, 0 outside B_2R."""
    if R <= 0.0:
        raise ValueError("cutoff radius must be positive")
    return cutoff_profile(radius(pts) / R)


def log_dirs(dim: int, n_radii: int, n_dirs: int, r_min: float, r_max: float,
             seed: int = 0) -> np.ndarray:
    """Log-spaced radii crossed with directions; deterministic given seed."""
    radii = np.geomspace(r_min, r_max, n_radii)
    if dim == 1:
        dirs = np.array([[1.0], [-1.0]])
    else:
        rng = np.random.default_rng(seed)
        ang = np.sort(rng.uniform(0.0, 2.0 * np.pi, size=n_dirs))
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        if dim == 3:
            dirs = np.column_stack([dirs, np.zeros(len(dirs))])
    pts = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, dim)
    return pts
