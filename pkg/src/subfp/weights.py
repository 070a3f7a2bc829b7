"""Weight families, weighted norms and pointwise dissipation profiles.

Three weight families drive every estimate in the package: polynomial
m = <x>^k, stretched-exponential m = exp(kappa <x>^s) with 0 < s < gamma,
and the critical exponential s = gamma with kappa gamma < 1.  The closed-form
logarithmic derivatives of each family feed the pointwise profile psi that
certifies dissipativity of the truncated generator in L^p(m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .force_field import ForceField
from .util import as_points, bracket, cutoff, log_dirs

POLYNOMIAL = "polynomial"
STRETCHED = "stretched"
CRITICAL = "critical"


@dataclass(frozen=True)
class Weight:
    """One of the three confinement weight families.

    family   one of "polynomial", "stretched", "critical"
    gamma    confinement exponent of the force field the weight is used with
    k        polynomial exponent (polynomial family only)
    kappa    exponential strength (exponential families)
    s        exponential radius power; equals gamma for the critical family
    """

    family: str
    gamma: float
    k: float = 0.0
    kappa: float = 0.0
    s: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.gamma < 1.0):
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.family == POLYNOMIAL:
            if self.k <= 0.0:
                raise ValueError("polynomial weight needs k > 0")
        elif self.family == STRETCHED:
            if self.kappa <= 0.0:
                raise ValueError("stretched weight needs kappa > 0")
            if not (0.0 < self.s < self.gamma):
                raise ValueError(
                    f"stretched weight needs 0 < s < gamma, got s={self.s}")
        elif self.family == CRITICAL:
            if not (0.0 < self.kappa * self.gamma < 1.0):
                raise ValueError(
                    f"critical weight needs kappa*gamma in (0, 1), "
                    f"got {self.kappa * self.gamma}")
            object.__setattr__(self, "s", self.gamma)
        else:
            raise ValueError(f"unknown weight family {self.family!r}")

    @classmethod
    def polynomial(cls, k: float, gamma: float) -> "Weight":
        return cls(family=POLYNOMIAL, gamma=gamma, k=k)

    @classmethod
    def stretched(cls, kappa: float, s: float, gamma: float) -> "Weight":
        return cls(family=STRETCHED, gamma=gamma, kappa=kappa, s=s)

    @classmethod
    def critical(cls, kappa: float, gamma: float) -> "Weight":
        return cls(family=CRITICAL, gamma=gamma, kappa=kappa)

    @property
    def scale_exponent(self) -> float:
        """The s entering the dissipation comparison scale <x>^(gamma+s-2)."""
        return 0.0 if self.family == POLYNOMIAL else self.s

    def log_value(self, x) -> np.ndarray:
        pts = np.asarray(x, dtype=float)
        b = bracket(pts)
        if self.family == POLYNOMIAL:
            return self.k * np.log(b)
        return self.kappa * b ** self.s

    def value(self, x, theta: float = 1.0) -> np.ndarray:
        """m(x)^theta."""
        return np.exp(theta * self.log_value(x))

    def grad_over_value(self, x) -> np.ndarray:
        """grad m / m, shape (n, dim)."""
        pts = np.asarray(x, dtype=float)
        b = bracket(pts)
        if self.family == POLYNOMIAL:
            coef = self.k * b ** (-2.0)
        else:
            coef = self.kappa * self.s * b ** (self.s - 2.0)
        return pts * coef[..., None]

    def grad_sq_over_value_sq(self, x) -> np.ndarray:
        """|grad m|^2 / m^2."""
        pts = np.asarray(x, dtype=float)
        b = bracket(pts)
        r2 = np.sum(pts * pts, axis=-1)
        if self.family == POLYNOMIAL:
            return self.k ** 2 * r2 * b ** (-4.0)
        return (self.kappa * self.s) ** 2 * r2 * b ** (2.0 * self.s - 4.0)

    def laplacian_over_value(self, x) -> np.ndarray:
        """Laplacian m / m."""
        pts = np.asarray(x, dtype=float)
        d = pts.shape[-1]
        b = bracket(pts)
        r2 = np.sum(pts * pts, axis=-1)
        if self.family == POLYNOMIAL:
            return self.k * d * b ** (-2.0) + self.k * (self.k - 2.0) * r2 * b ** (-4.0)
        ks = self.kappa * self.s
        return (ks * d * b ** (self.s - 2.0)
                + ks * (self.s - 2.0) * r2 * b ** (self.s - 4.0)
                + ks ** 2 * r2 * b ** (2.0 * self.s - 4.0))

    def as_dict(self) -> dict:
        out = {"family": self.family, "gamma": self.gamma}
        if self.family == POLYNOMIAL:
            out["k"] = self.k
        else:
            out["kappa"] = self.kappa
            out["s"] = self.s
        return out


@dataclass(frozen=True)
class NormSpec:
    """An L^p(m^theta) norm: p-norm of f * m(x)^theta against cell volumes."""

    p: float
    weight: Weight
    theta: float = 1.0

    def __post_init__(self):
        if not (self.p >= 1.0):
            raise ValueError(f"p must be >= 1, got {self.p}")
        if not (0.0 <= self.theta <= 1.0):
            raise ValueError(f"theta must lie in [0, 1], got {self.theta}")

    def as_dict(self) -> dict:
        d = {"p": self.p, "theta": self.theta}
        d.update(self.weight.as_dict())
        return d


class CriticalExponents(NamedTuple):
    """Stretched-rate ceilings: for the full semigroup and the truncated part."""
    generator: float
    dissipative: float


def critical_weight_exponent(p: float, d: int, c_div: float) -> float:
    """Smallest polynomial exponent k* = max(d, c_div)/p' usable for L^p decay.

    p' is the conjugate exponent; p=1 gives 0, p=inf gives max(d, c_div).
    """
    if p < 1.0:
        raise ValueError("p must be >= 1")
    base = max(float(d), float(c_div))
    if p == 1.0:
        return 0.0
    if math.isinf(p):
        return base
    return base * (p - 1.0) / p


def critical_stretch_exponents(case: int, gamma: float) -> CriticalExponents:
    """Ceilings for the sigma in exp(-lambda t^sigma) decay.

    Fields whose non-gradient part leaves the steady state invariant (case 1)
    allow sigma = gamma/(2-gamma) for the full semigroup; the general case 2
    only reaches 1/floor(2/gamma) there.  The truncated dissipative part
    always allows gamma/(2-gamma).
    """
    if not (0.0 < gamma < 1.0):
        raise ValueError("gamma must lie in (0, 1)")
    sigma_b = gamma / (2.0 - gamma)
    if case == 1:
        return CriticalExponents(sigma_b, sigma_b)
    if case == 2:
        # guard the floor against 2/gamma landing just under an integer
        return CriticalExponents(1.0 / math.floor(2.0 / gamma + 1e-12), sigma_b)
    raise ValueError(f"case must be 1 or 2, got {case}")


def stretched_rate_limit(kappa: float, theta: float, gamma: float) -> float:
    """Best stretched-exponential rate constant for the critical weight.

    lambda* = (kappa (1-theta))^((2-2 gamma)/(2-gamma))
              * (kappa gamma (1 - kappa gamma))^(gamma/(2-gamma)),
    valid for 0 < kappa gamma < 1 and theta in [0, 1).
    """
    if not (0.0 < gamma < 1.0):
        raise ValueError("gamma must lie in (0, 1)")
    if not (0.0 < kappa * gamma < 1.0):
        raise ValueError("need 0 < kappa*gamma < 1")
    if not (0.0 <= theta < 1.0):
        raise ValueError("theta must lie in [0, 1)")
    kg = kappa * gamma
    return ((kappa * (1.0 - theta)) ** ((2.0 - 2.0 * gamma) / (2.0 - gamma))
            * (kg * (1.0 - kg)) ** (gamma / (2.0 - gamma)))


@dataclass(frozen=True)
class DecayEnvelope:
    """Decay envelope Theta(t): (1+t)^-beta or exp(-lam t^sigma)."""

    kind: str
    beta: float = 0.0
    lam: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        if self.kind == POLYNOMIAL:
            if self.beta <= 0.0:
                raise ValueError("polynomial envelope needs beta > 0")
        elif self.kind == STRETCHED:
            if self.lam <= 0.0 or not (0.0 < self.sigma <= 1.0):
                raise ValueError("stretched envelope needs lam > 0, sigma in (0, 1]")
        else:
            raise ValueError(f"unknown envelope kind {self.kind!r}")

    @classmethod
    def polynomial(cls, beta: float) -> "DecayEnvelope":
        return cls(kind=POLYNOMIAL, beta=beta)

    @classmethod
    def stretched(cls, lam: float, sigma: float) -> "DecayEnvelope":
        return cls(kind=STRETCHED, lam=lam, sigma=sigma)

    def value(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any(t < 0.0):
            raise ValueError("envelope times must be >= 0")
        if self.kind == POLYNOMIAL:
            return (1.0 + t) ** (-self.beta)
        return np.exp(-self.lam * t ** self.sigma)

    def as_dict(self) -> dict:
        if self.kind == POLYNOMIAL:
            return {"kind": self.kind, "beta": self.beta}
        return {"kind": self.kind, "lam": self.lam, "sigma": self.sigma}


def envelope_value(envelope: DecayEnvelope, t) -> np.ndarray:
    return envelope.value(t)


def weighted_lp_norm(f, spec: NormSpec, grid=None) -> float:
    """Discrete L^p(m^theta) norm of a cell-value vector.

    `f` may be a Density (carrying its grid) or a plain vector with `grid`
    supplied.  p = inf is the plain maximum of |f| m^theta.
    """
    if grid is None:
        grid = f.grid
        values = np.asarray(f.values, dtype=float)
    else:
        values = np.asarray(f, dtype=float)
    w = spec.weight.value(grid.centers, theta=spec.theta)
    g = np.abs(values) * w
    if math.isinf(spec.p):
        return float(np.max(g))
    return float(np.sum(grid.volumes * g ** spec.p) ** (1.0 / spec.p))


def _profile_terms(weight: Weight, field: ForceField, pts: np.ndarray,
                   M: float, R: float):
    if abs(weight.gamma - field.gamma) > 1e-12:
        raise ValueError("weight and field disagree on gamma")
    lap = weight.laplacian_over_value(pts)
    gsq = weight.grad_sq_over_value_sq(pts)
    glm = weight.grad_over_value(pts)
    div = field.divergence(pts)
    drift = np.sum(field.force(pts) * glm, axis=-1)
    absorb = M * cutoff(pts, R) if M != 0.0 else 0.0
    return lap, gsq, div, drift, absorb


def dissipation_profile(weight: Weight, p: float, field: ForceField, x,
                        M: float = 0.0, R: float = 1.0):
    """Pointwise multiplier controlling d/dt of the L^p(m) norm.

    psi(x) = ((2-p)/p) Lap(m)/m + (2/p') |grad m|^2/m^2 + (1/p') div F
             - F . grad m / m - M chi_R(x),
    with p' the conjugate exponent.  Negative values (after absorption by the
    M chi_R term) certify dissipativity of the truncated generator.
    """
    if not (1.0 <= p) or math.isinf(p):
        raise ValueError("p must lie in [1, inf)")
    pts = as_points(x, field.dim)
    inv_pp = 1.0 - 1.0 / p
    lap, gsq, div, drift, absorb = _profile_terms(weight, field, pts, M, R)
    out = ((2.0 - p) / p) * lap + 2.0 * inv_pp * gsq + inv_pp * div - drift - absorb
    return float(out[0]) if np.asarray(x).ndim == 1 and len(out) == 1 else out


def adjoint_dissipation_profile(weight: Weight, p: float, field: ForceField, x,
                                M: float = 0.0, R: float = 1.0):
    """Same as dissipation_profile but for the adjoint flow.

    psi_*(x) = ((p-2)/p) Lap(m)/m + (2/p) |grad m|^2/m^2 + (1/p) div F
               - F . grad m / m - M chi_R(x);  p = inf is the limit
    Lap(m)/m - F . grad m/m - M chi_R.
    """
    if not (1.0 <= p):
        raise ValueError("p must lie in [1, inf]")
    pts = as_points(x, field.dim)
    if math.isinf(p):
        c_lap, c_gsq, c_div = 1.0, 0.0, 0.0
    else:
        c_lap, c_gsq, c_div = (p - 2.0) / p, 2.0 / p, 1.0 / p
    lap, gsq, div, drift, absorb = _profile_terms(weight, field, pts, M, R)
    out = c_lap * lap + c_gsq * gsq + c_div * div - drift - absorb
    return float(out[0]) if np.asarray(x).ndim == 1 and len(out) == 1 else out


def dissipation_asymptote(weight: Weight, p: float, field: ForceField,
                          r_min: float = 1e2, r_max: float = 1e6,
                          n_radii: int = 9, n_dirs: int = 16) -> float:
    """Largest a such that psi <= -a <x>^(gamma+s-2) can hold at infinity.

    Measured as -max over a far-field scan of psi * <x>^(2-gamma-s) with the
    absorption term switched off (s = 0 for polynomial weights).  Taking the
    max over the whole probed tail keeps the estimate conservative.
    """
    pts = log_dirs(field.dim, n_radii, n_dirs, r_min, r_max, seed=3)
    psi = dissipation_profile(weight, p, field, pts, M=0.0, R=1.0)
    scale = bracket(pts) ** (2.0 - field.gamma - weight.scale_exponent)
    return float(-np.max(psi * scale))
