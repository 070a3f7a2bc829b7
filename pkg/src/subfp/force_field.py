"""Confining force fields with weak (sublinear) growth.

A field F on R^d is admissible when, outside a ball of radius r0, its radial
component satisfies x.F(x) >= c <x>^(gamma-1) |x| with exponent
gamma in (0, 1), its divergence grows no faster than |x|^(gamma-2), and its
Jacobian is bounded by <x>^(gamma-2) everywhere.  Here <x> = sqrt(1+|x|^2).
The canonical example is the gradient of V(x) = <x>^gamma / gamma; adding a
rotational part that leaves exp(-V) invariant in divergence form keeps the
same steady state.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .util import as_points, bracket, radius

Vec = Callable[[np.ndarray], np.ndarray]

_FD_REL_STEP = 1e-5   # central differences use h = 1e-5 * <x> per coordinate
_CONSISTENCY_TOL = 1e-6


def _fd_step(pts: np.ndarray) -> np.ndarray:
    return _FD_REL_STEP * bracket(pts)


def fd_divergence(force: Vec, pts: np.ndarray) -> np.ndarray:
    """Central-difference divergence of a vector field at each row of pts."""
    n, dim = pts.shape
    h = _fd_step(pts)
    out = np.zeros(n)
    for j in range(dim):
        step = np.zeros_like(pts)
        step[:, j] = h
        out += (force(pts + step)[:, j] - force(pts - step)[:, j]) / (2.0 * h)
    return out


def fd_jacobian(force: Vec, pts: np.ndarray) -> np.ndarray:
    """Central-difference Jacobian, shape (n, dim, dim); J[i, a, b] = dF_a/dx_b."""
    n, dim = pts.shape
    h = _fd_step(pts)
    out = np.zeros((n, dim, dim))
    for j in range(dim):
        step = np.zeros_like(pts)
        step[:, j] = h
        out[:, :, j] = (force(pts + step) - force(pts - step)) / (2.0 * h)[:, None]
    return out


def fd_gradient(scalar: Callable[[np.ndarray], np.ndarray], pts: np.ndarray) -> np.ndarray:
    n, dim = pts.shape
    h = _fd_step(pts)
    out = np.zeros((n, dim))
    for j in range(dim):
        step = np.zeros_like(pts)
        step[:, j] = h
        out[:, j] = (scalar(pts + step) - scalar(pts - step)) / (2.0 * h)
    return out


def default_samples(dim: int, n: int = 100, r_max: float = 10.0, seed: int = 0) -> np.ndarray:
    """Deterministic sample cloud covering radii from ~0 to r_max."""
    rng = np.random.default_rng(seed)
    r = r_max * rng.uniform(0.0, 1.0, size=n) ** 1.5
    d = rng.normal(size=(n, dim))
    d /= np.maximum(np.linalg.norm(d, axis=1, keepdims=True), 1e-300)
    return r[:, None] * d


@dataclass
class ConditionReport:
    """Measured admissibility constants for a force field on a sample set."""

    inf_radial_constant: float
    sup_div_constant: float
    sup_jacobian_constant: float
    passed: bool
    n_samples: int
    r0: float
    dim: int
    # the divergence bound used downstream must dominate the dimension;
    # recorded, never enforced
    div_constant_covers_dim: bool = False
    effective_div_constant: float = 0.0

    def as_dict(self) -> dict:
        return {
            "inf_radial_constant": self.inf_radial_constant,
            "sup_div_constant": self.sup_div_constant,
            "sup_jacobian_constant": self.sup_jacobian_constant,
            "passed": self.passed,
            "n_samples": self.n_samples,
            "r0": self.r0,
            "dim": self.dim,
            "div_constant_covers_dim": self.div_constant_covers_dim,
            "effective_div_constant": self.effective_div_constant,
        }


@dataclass
class ForceField:
    """A confining drift together with its first-order data.

    Parameters
    ----------
    dim : spatial dimension (1 or 2 in practice).
    gamma : growth exponent of the radial confinement, strictly inside (0, 1).
    force : map (n, dim) -> (n, dim).
    divergence : map (n, dim) -> (n,); central differences of `force` if omitted.
    jacobian : map (n, dim) -> (n, dim, dim); finite differences if omitted.
    potential : optional scalar V with F = grad V (+ rotational remainder).
    grad_potential : exact gradient of `potential` when known in closed form.
    nongradient : the remainder F - grad V when the field carries one.
    stream : scalar psi with exp(-V) * nongradient = J grad psi (2D only);
        lets the discretization keep exp(-V) in its kernel exactly.
    r0 : radius outside which the radial lower bound is asserted.
    """

    dim: int
    gamma: float
    force: Vec
    divergence: Optional[Callable[[np.ndarray], np.ndarray]] = None
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    potential: Optional[Callable[[np.ndarray], np.ndarray]] = None
    grad_potential: Optional[Vec] = None
    nongradient: Optional[Vec] = None
    stream: Optional[Callable[[np.ndarray], np.ndarray]] = None
    r0: float = 1.0
    label: str = "field"
    check_consistency: bool = True
    _meta: dict = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not (0.0 < self.gamma < 1.0):
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if self.r0 <= 0.0:
            raise ValueError("r0 must be positive")
        fd_div = self.divergence is None
        fd_jac = self.jacobian is None
        if fd_div:
            self.divergence = lambda pts: fd_divergence(self.force, pts)
            self._meta["divergence"] = "finite-difference"
        if fd_jac:
            self.jacobian = lambda pts: fd_jacobian(self.force, pts)
            self._meta["jacobian"] = "finite-difference"
        if self.potential is not None and self.grad_potential is None:
            self.grad_potential = lambda pts: fd_gradient(self.potential, pts)
            self._meta["grad_potential"] = "finite-difference"
        if self.check_consistency and not (fd_div and fd_jac):
            self._spot_check(check_div=not fd_div, check_jac=not fd_jac)

    # closed-form divergence/Jacobian must agree with differences of `force`
    def _spot_check(self, n: int = 100, check_div: bool = True, check_jac: bool = True):
        pts = default_samples(self.dim, n=n, r_max=5.0, seed=7)
        if check_div:
            div_fd = fd_divergence(self.force, pts)
            div_cf = self.divergence(pts)
            err = np.max(np.abs(div_fd - div_cf) / (1.0 + np.abs(div_cf)))
            if err > _CONSISTENCY_TOL:
                raise ValueError(
                    f"declared divergence disagrees with finite differences ({err:.3e})")
        if check_jac:
            jac_fd = fd_jacobian(self.force, pts)
            jac_cf = self.jacobian(pts)
            jerr = np.max(np.abs(jac_fd - jac_cf) / (1.0 + np.abs(jac_cf)))
            if jerr > _CONSISTENCY_TOL:
                raise ValueError(
                    f"declared Jacobian disagrees with finite differences ({jerr:.3e})")

    def __call__(self, x) -> np.ndarray:
        return self.force(as_points(x, self.dim))


def canonical_gradient_field(gamma: float, scale: float = 1.0, dim: int = 1,
                             r0: float = 1.0) -> ForceField:
    """Gradient field of V(x) = scale * <x>^gamma / gamma.

    F(x) = scale * x <x>^(gamma-2); the associated invariant density is
    proportional to exp(-V).
    """
    if scale <= 0.0:
        raise ValueError("scale must be positive")

    def force(pts):
        b = bracket(pts)
        return scale * pts * (b ** (gamma - 2.0))[:, None]

    def divergence(pts):
        b = bracket(pts)
        r2 = np.sum(pts * pts, axis=-1)
        return scale * (dim * b ** (gamma - 2.0)
                        + (gamma - 2.0) * r2 * b ** (gamma - 4.0))

    def jacobian(pts):
        b = bracket(pts)
        eye = np.eye(dim)
        out = eye[None, :, :] * (b ** (gamma - 2.0))[:, None, None]
        out = out + (gamma - 2.0) * (b ** (gamma - 4.0))[:, None, None] \
            * pts[:, :, None] * pts[:, None, :]
        return scale * out

    def potential(pts):
        return scale * bracket(pts) ** gamma / gamma

    return ForceField(
        dim=dim, gamma=gamma, force=force, divergence=divergence,
        jacobian=jacobian, potential=potential, grad_potential=force,
        nongradient=None, r0=r0, label=f"canonical(gamma={gamma}, scale={scale})",
    )


# 90-degree rotation; x . Jx = 0, so rotation never touches radial confinement
_J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


def rotated_field(base: ForceField, amplitude: float,
                  modulation: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                  modulation_grad: Optional[Vec] = None) -> ForceField:
    """Add a solenoidal swirl amplitude * mod(x) * Jx <x>^(gamma-2) to `base`.

    With a radial modulation the added part leaves exp(-V) invariant in
    divergence form, so the steady state of the base field survives.
    amplitude = 0 returns a field identical to `base` up to the label.
    """
    if base.dim != 2:
        raise ValueError("rotation needs a two-dimensional base field")
    if base.potential is None:
        raise ValueError("base field must carry a potential")
    gamma = base.gamma

    if modulation is None:
        mod = lambda pts: np.ones(len(pts))
        mod_grad = lambda pts: np.zeros_like(pts)
    else:
        mod = modulation
        mod_grad = modulation_grad or (lambda pts: fd_gradient(mod, pts))

    def swirl(pts):
        b = bracket(pts)
        jx = pts @ _J2.T
        return amplitude * mod(pts)[:, None] * jx * (b ** (gamma - 2.0))[:, None]

    def force(pts):
        return base.force(pts) + swirl(pts)

    def divergence(pts):
        # div(Jx <x>^(g-2)) = 0 identically, so only the modulation gradient remains
        b = bracket(pts)
        jx = pts @ _J2.T
        extra = amplitude * b ** (gamma - 2.0) * np.sum(mod_grad(pts) * jx, axis=-1)
        return base.divergence(pts) + extra

    def jacobian(pts):
        b = bracket(pts)
        jx = pts @ _J2.T
        m = mod(pts)
        core = _J2[None, :, :] * (b ** (gamma - 2.0))[:, None, None] \
            + (gamma - 2.0) * (b ** (gamma - 4.0))[:, None, None] \
            * jx[:, :, None] * pts[:, None, :]
        outer = (b ** (gamma - 2.0))[:, None, None] * jx[:, :, None] * mod_grad(pts)[:, None, :]
        return base.jacobian(pts) + amplitude * (m[:, None, None] * core + outer)

    grad_pot = base.grad_potential if base.grad_potential is not None else base.force

    stream = None
    if modulation is None and amplitude != 0.0:
        scale = _radial_gradient_scale(base)
        if scale is not None:
            # grad psi = amplitude exp(-V) x <x>^(g-2), so psi has closed form
            stream = lambda pts: -(amplitude / scale) * np.exp(-base.potential(pts))

    return ForceField(
        dim=2, gamma=gamma, force=force, divergence=divergence, jacobian=jacobian,
        potential=base.potential, grad_potential=grad_pot, nongradient=swirl,
        stream=stream, r0=base.r0, label=f"{base.label}+swirl(a={amplitude})",
    )


def _radial_gradient_scale(base: ForceField) -> Optional[float]:
    """scale s with grad V = s x <x>^(gamma-2), or None if V is not of that form."""
    pts = np.array([[0.5, 0.0], [0.0, 1.5], [3.0, 0.0], [5.0, 5.0], [0.0, 9.0]])
    g = base.grad_potential(pts)
    b = bracket(pts)
    ref = pts * (b ** (base.gamma - 2.0))[:, None]
    s = np.sum(g * ref, axis=1) / np.sum(ref * ref, axis=1)
    resid = np.max(np.abs(g - s[:, None] * ref)) / np.max(np.abs(g))
    if resid > 1e-10 or np.ptp(s) > 1e-10 * np.abs(s[0]) or s[0] <= 0.0:
        return None
    return float(s[0])


_EXPR_NAMES = {
    "exp": np.exp, "log": np.log, "sqrt": np.sqrt, "sin": np.sin, "cos": np.cos,
    "tan": np.tan, "abs": np.abs, "tanh": np.tanh, "pi": np.pi, "e": np.e,
    "minimum": np.minimum, "maximum": np.maximum, "where": np.where,
}


def expression_field(gamma: float, components: list[str], dim: int = 1,
                     r0: float = 1.0, potential: Optional[str] = None) -> ForceField:
    """Build a field from coordinate expressions (variables x1..xd, r, b=<x>).

    Derivatives fall back to central finite differences.  Intended for config
    files; expressions are evaluated with a numpy-only namespace.
    """
    if len(components) != dim:
        raise ValueError(f"need {dim} component expression(s), got {len(components)}")
    codes = [compile(c, f"<component {i+1}>", "eval") for i, c in enumerate(components)]
    pot_code = compile(potential, "<potential>", "eval") if potential else None

    def namespace(pts):
        ns = dict(_EXPR_NAMES)
        for j in range(dim):
            ns[f"x{j+1}"] = pts[:, j]
        if dim == 1:
            ns["x"] = pts[:, 0]
        ns["r"] = radius(pts)
        ns["r2"] = np.sum(pts * pts, axis=-1)
        ns["b"] = bracket(pts)
        ns["gamma"] = gamma
        return ns

    def force(pts):
        ns = namespace(pts)
        cols = [np.broadcast_to(np.asarray(eval(code, {"__builtins__": {}}, ns), dtype=float),
                                (len(pts),)) for code in codes]
        return np.stack(cols, axis=1)

    pot_fn = None
    if pot_code is not None:
        def pot_fn(pts):
            ns = namespace(pts)
            return np.broadcast_to(
                np.asarray(eval(pot_code, {"__builtins__": {}}, ns), dtype=float),
                (len(pts),)).copy()

    return ForceField(dim=dim, gamma=gamma, force=force, potential=pot_fn,
                      r0=r0, label="expression", check_consistency=False)


def verify_conditions(field: ForceField, samples, r0: Optional[float] = None) -> ConditionReport:
    """Measure the admissibility constants of `field` on a sample cloud.

    Outside the ball of radius r0 the report takes the infimum of
    x.F / (|x| <x>^(gamma-1)) and the supremum of div F / |x|^(gamma-2);
    the Jacobian bound sup |DF| / <x>^(gamma-2) runs over every sample.
    Passing means positive radial confinement with finite upper constants.
    """
    pts = as_points(samples, field.dim)
    if r0 is None:
        r0 = field.r0
    r = radius(pts)
    b = bracket(pts)
    outside = r >= r0
    if not np.any(outside):
        raise ValueError("no samples outside radius r0")

    fo = field.force(pts[outside])
    ro, bo = r[outside], b[outside]
    radial = np.sum(pts[outside] * fo, axis=-1) / (ro * bo ** (field.gamma - 1.0))
    divr = field.divergence(pts[outside]) / ro ** (field.gamma - 2.0)

    jac = field.jacobian(pts)
    jnorm = np.linalg.norm(jac, ord=2, axis=(1, 2))
    jac_const = float(np.max(jnorm / b ** (field.gamma - 2.0)))

    inf_radial = float(np.min(radial))
    sup_div = float(np.max(divr))
    passed = inf_radial > 0.0 and np.isfinite(sup_div) and np.isfinite(jac_const)
    return ConditionReport(
        inf_radial_constant=inf_radial,
        sup_div_constant=sup_div,
        sup_jacobian_constant=jac_const,
        passed=bool(passed),
        n_samples=len(pts),
        r0=float(r0),
        dim=field.dim,
        div_constant_covers_dim=bool(sup_div >= field.dim),
        effective_div_constant=float(max(sup_div, field.dim)),
    )


def case1_structure_residual(field: ForceField, samples,
                             potential: Optional[Callable] = None) -> float:
    """Max |div(exp(-V) (F - grad V))| over the samples, by central differences.

    Zero residual is the structural condition under which exp(-V) stays the
    steady state despite a non-gradient part.  When `potential` is omitted the
    field's own potential and exact gradient are used.
    """
    pts = as_points(samples, field.dim)
    if potential is None:
        if field.potential is None:
            raise ValueError("field carries no potential and none was supplied")
        pot = field.potential
        grad_pot = field.grad_potential
    else:
        pot = potential
        grad_pot = lambda q: fd_gradient(pot, q)

    def weighted_rest(q):
        return np.exp(-pot(q))[:, None] * (field.force(q) - grad_pot(q))

    div = fd_divergence(weighted_rest, pts)
    return float(np.max(np.abs(div)))
