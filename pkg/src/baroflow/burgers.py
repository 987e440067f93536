"""Closed-form 1D machinery for the pressure law p(rho) = rho^3/3 (lambda =
3/rho): Riemann invariants u +/- rho each satisfy Burgers' equation, so the
pre-shock solution, the exact Jacobi field, and the conjugate times along the
constant geodesic are all available in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import optimize

from .errors import DomainError, ShockError
from .geodesic import FluidState
from .grids import (
    CircleGrid,
    ScalarField,
    VectorField,
    check_same_grid,
    circle_interp,
    circle_interp_antideriv,
    derivative,
)


@dataclass(frozen=True)
class RiemannData:
    """Riemann invariants alpha_plus = u + rho, alpha_minus = u - rho at t=0."""

    alpha_plus: ScalarField
    alpha_minus: ScalarField

    def __post_init__(self):
        check_same_grid(self.alpha_plus, self.alpha_minus)
        if np.any(self.alpha_plus.values <= self.alpha_minus.values):
            raise DomainError("alpha_plus must exceed alpha_minus (rho > 0)")

    @property
    def grid(self) -> CircleGrid:
        return self.alpha_plus.grid


def riemann_invariants(u0: ScalarField | VectorField, rho0: ScalarField) -> RiemannData:
    uvals = u0.values[0] if isinstance(u0, VectorField) else u0.values
    if np.any(rho0.values <= 0):
        raise DomainError("density must be positive pointwise")
    g = rho0.grid
    return RiemannData(ScalarField(g, uvals + rho0.values),
                       ScalarField(g, uvals - rho0.values))


def _max_negative_slope(alpha0: ScalarField) -> float:
    """max_x of -alpha0'(x) over the continuum (trig interpolant), refined
    from the grid maximum by bounded scalar minimization."""
    vals = alpha0.values
    g = alpha0.grid
    fine = np.linspace(0.0, 2 * np.pi, 8 * g.n, endpoint=False)
    slope = -circle_interp(vals, fine, deriv=1)
    k = int(np.argmax(slope))
    lo, hi = fine[k] - 2 * np.pi / (8 * g.n), fine[k] + 2 * np.pi / (8 * g.n)
    res = optimize.minimize_scalar(
        lambda x: float(circle_interp(vals, x, deriv=1)[0]),
        bounds=(lo, hi), method="bounded", options={"xatol": 1e-13},
    )
    return max(float(slope[k]), -float(res.fun))


def shock_time(alpha0: ScalarField) -> float:
    """T* = 1/max(-alpha0'), or +inf if alpha0 is nondecreasing."""
    m = _max_negative_slope(alpha0)
    if m <= 1e-13:
        return float("inf")
    return 1.0 / m


@dataclass(frozen=True)
class CharacteristicFlow:
    """The Burgers characteristic flow xi(t,x) = x + t alpha0(x) and its
    spatial inverse chi, valid for t below the shock time."""

    alpha0: ScalarField

    @cached_property
    def shock_time(self) -> float:
        return shock_time(self.alpha0)

    def forward(self, t: float, x) -> np.ndarray:
        return np.asarray(x, dtype=float) + t * circle_interp(self.alpha0.values, x)

    def invert(self, t: float, x) -> np.ndarray:
        """Solve x = chi + t alpha0(chi) for chi (lift on the real line) by
        safeguarded Newton iteration, bisection fallback."""
        if t >= self.shock_time:
            raise ShockError(f"t={t} is at or past the shock time {self.shock_time}")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        vals = self.alpha0.values
        # range of the interpolant (which can overshoot the grid samples),
        # padded so that xi increasing guarantees the root is bracketed
        fine = np.linspace(0.0, 2 * np.pi, 8 * len(vals), endpoint=False)
        afine = circle_interp(vals, fine)
        spread = float(np.max(afine) - np.min(afine))
        pad = 1e-2 * spread + 1e-9
        amin, amax = float(np.min(afine)) - pad, float(np.max(afine)) + pad
        lo = x - t * amax
        hi = x - t * amin
        chi = x - t * circle_interp(vals, x)  # one fixed-point sweep as the seed
        chi = np.clip(chi, lo, hi)
        for _ in range(100):
            f = chi + t * circle_interp(vals, chi) - x
            lo = np.where(f < 0, chi, lo)
            hi = np.where(f > 0, chi, hi)
            if np.max(np.abs(f)) < 1e-13:
                break
            fp = 1.0 + t * circle_interp(vals, chi, deriv=1)
            step = np.where(fp > 1e-10, f / np.where(fp > 1e-10, fp, 1.0), 0.0)
            nxt = chi - step
            bad = (nxt <= lo) | (nxt >= hi) | (fp <= 1e-10)
            chi = np.where(bad, 0.5 * (lo + hi), nxt)
        return chi


def exact_state(u0: ScalarField | VectorField, rho0: ScalarField, t: float) -> FluidState:
    """Pre-shock solution by tracing both Riemann invariants back along their
    characteristics; returns the barotropic state (q = rho)."""
    inv = riemann_invariants(u0, rho0)
    g = inv.grid
    flow_p = CharacteristicFlow(inv.alpha_plus)
    flow_m = CharacteristicFlow(inv.alpha_minus)
    tstar = min(flow_p.shock_time, flow_m.shock_time)
    if t >= tstar:
        raise ShockError(f"t={t} is at or past the shock time {tstar}")
    chi_p = flow_p.invert(t, g.x)
    chi_m = flow_m.invert(t, g.x)
    ap = circle_interp(inv.alpha_plus.values, chi_p)
    am = circle_interp(inv.alpha_minus.values, chi_m)
    u = ScalarField(g, 0.5 * (ap + am))
    rho = ScalarField(g, 0.5 * (ap - am))
    return FluidState(VectorField(g, u.values[None]), rho, ScalarField(g, rho.values.copy()))


def exact_jacobi(u0: ScalarField | VectorField, rho0: ScalarField,
                 v0: ScalarField | VectorField, t: float) -> VectorField:
    """Exact Jacobi field with J(0)=0, J'(0)=(v0, 0):
    rho(t,x) j(t,x) = (1/2) int_{chi_+(t,x)}^{chi_-(t,x)} v0(y) dy.

    The integral uses the exact antiderivative of the trigonometric
    interpolant of v0, with the inverse characteristics lifted to the real
    line so the endpoints are well defined for any t."""
    vvals = v0.values[0] if isinstance(v0, VectorField) else v0.values
    inv = riemann_invariants(u0, rho0)
    g = inv.grid
    flow_p = CharacteristicFlow(inv.alpha_plus)
    flow_m = CharacteristicFlow(inv.alpha_minus)
    tstar = min(flow_p.shock_time, flow_m.shock_time)
    if t >= tstar:
        raise ShockError(f"t={t} is at or past the shock time {tstar}")
    chi_p = flow_p.invert(t, g.x)
    chi_m = flow_m.invert(t, g.x)
    rho = 0.5 * (circle_interp(inv.alpha_plus.values, chi_p)
                 - circle_interp(inv.alpha_minus.values, chi_m))
    V = circle_interp_antideriv(vvals, np.concatenate([chi_m, chi_p]))
    j = 0.5 * (V[: g.n] - V[g.n:]) / rho
    return VectorField(g, j[None])


def conjugate_times(n: int, m_max: int) -> list[float]:
    """Conjugate times 2 pi m / n along the constant geodesic for the mode
    v0 = cos(nx)."""
    if n < 1 or m_max < 1:
        raise DomainError("n and m_max must be positive integers")
    return [2 * np.pi * m / n for m in range(1, m_max + 1)]


def conjugate_j(n: int, t, x) -> np.ndarray:
    """Closed-form Jacobi field j(t,x) = sin(nt) cos(n(x-t))/n along the
    constant geodesic u0 = rho0 = 1 with v0 = cos(nx)."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    return np.sin(n * t) * np.cos(n * (x - t)) / n


def conjugate_G(n: int, t, x) -> np.ndarray:
    """Closed-form function-direction displacement G(t,x) =
    (4/3n) sin(nx) sin^2(nt/2) along the same geodesic."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    return (4.0 / (3 * n)) * np.sin(n * x) * np.sin(n * t / 2) ** 2


def conjugate_g(n: int, t, x) -> np.ndarray:
    """g(t,x) = (2/3) sigma(t,x) with sigma = (1/2)(v0(x-2t) - v0(x))."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    sigma = 0.5 * (np.cos(n * (x - 2 * t)) - np.cos(n * x))
    return (2.0 / 3.0) * sigma


def pde_residual(u0: ScalarField | VectorField, rho0: ScalarField, t: float,
                 dt: float = 1e-5) -> float:
    """Sup norm of u_t + u u_x + rho rho_x at time t (centered difference in
    time, spectral in space); a consistency check on exact_state."""
    sp = exact_state(u0, rho0, t + dt)
    sm = exact_state(u0, rho0, t - dt)
    s0 = exact_state(u0, rho0, t)
    g = rho0.grid
    ut = (sp.u.values[0] - sm.u.values[0]) / (2 * dt)
    ux = derivative(ScalarField(g, s0.u.values[0])).values
    rx = derivative(s0.rho).values
    return float(np.max(np.abs(ut + s0.u.values[0] * ux + s0.rho.values * rx)))
