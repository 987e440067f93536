"""Warped-product metric on velocity/function pairs: inner product, Christoffel
map, the symmetric operator Q, sectional curvature quadrature, and the 1D
comparison curvature of the energy-conformal (Jacobi) metric."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from . import grids
from .errors import DomainError, NormalizationError
from .grids import ScalarField, VectorField, check_same_grid, integrate
from .pressure import PressureModel


@dataclass(frozen=True)
class TangentVector:
    """Tangent to the product configuration space: a vector field plus a scalar."""

    u: VectorField
    f: ScalarField

    def __post_init__(self):
        check_same_grid(self.u, self.f)

    @property
    def grid(self):
        return self.f.grid


@dataclass(frozen=True)
class CurvatureReport:
    term_R: float
    term_div: float
    term_Q: float
    term_grad: float
    total: float
    normalized: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def _check_density(rho: ScalarField):
    if np.any(rho.values <= 0):
        raise DomainError("density must be positive pointwise")


def metric_inner(U: TangentVector, V: TangentVector, rho: ScalarField, model: PressureModel) -> float:
    """<<U, V>> = int [lambda(rho) f g + rho <u, v>] dmu."""
    check_same_grid(U.f, V.f, rho)
    _check_density(rho)
    lam = model.lam(rho.values)
    dens = lam * U.f.values * V.f.values + rho.values * grids.inner(U.u, V.u).values
    return integrate(ScalarField(rho.grid, dens))


def christoffel(U: TangentVector, V: TangentVector, rho: ScalarField, model: PressureModel) -> TangentVector:
    """Explicit Christoffel map: (z, j) with j = (phi/lambda)(f div v + g div u)
    and z = (1/rho) grad(phi(rho) f g)."""
    g = check_same_grid(U.f, V.f, rho)
    _check_density(rho)
    phi = model.phi(rho.values)
    lam = model.lam(rho.values)
    div_u = grids.div(U.u).values
    div_v = grids.div(V.u).values
    j = ScalarField(g, phi / lam * (U.f.values * div_v + V.f.values * div_u))
    z_raw = grids.grad(ScalarField(g, phi * U.f.values * V.f.values))
    z = VectorField(g, z_raw.values / rho.values)
    return TangentVector(z, j)


def christoffel_weak(U: TangentVector, V: TangentVector, W: TangentVector,
                     rho: ScalarField, model: PressureModel) -> float:
    """Weak form <<Gamma(U,V), W>> = int phi(rho)(h f div v + h g div u - f g div w)."""
    g = check_same_grid(U.f, V.f, W.f, rho)
    phi = model.phi(rho.values)
    dens = phi * (
        W.f.values * U.f.values * grids.div(V.u).values
        + W.f.values * V.f.values * grids.div(U.u).values
        - U.f.values * V.f.values * grids.div(W.u).values
    )
    return integrate(ScalarField(g, dens))


def q_operator(u: VectorField, v: VectorField) -> ScalarField:
    """Q(u,v) = div(nabla_u v) - u(div v) - (div u)(div v)."""
    g = check_same_grid(u, v)
    div_v = grids.div(v)
    out = (
        grids.div(grids.covariant_derivative(u, v)).values
        - grids.directional(u, div_v).values
        - grids.div(u).values * div_v.values
    )
    return ScalarField(g, out)


def density_functional_derivative(alpha: ScalarField, phi_fn, rho: ScalarField,
                                  w: VectorField, dphi_fn=None) -> float:
    """Derivative of Phi(eta) = int alpha phi_fn(rho) dmu along the flow of w:
    -int div(rho w) alpha phi_fn'(rho) dmu."""
    g = check_same_grid(alpha, rho, w)
    _check_density(rho)
    if dphi_fn is None:
        h = 1e-6 * rho.values
        dphi = (np.asarray(phi_fn(rho.values + h)) - np.asarray(phi_fn(rho.values - h))) / (2 * h)
    else:
        dphi = np.asarray(dphi_fn(rho.values))
    flux = grids.div(VectorField(g, rho.values * w.values)).values
    return -integrate(ScalarField(g, flux * alpha.values * dphi))


def sectional_curvature(U: TangentVector, V: TangentVector, rho: ScalarField,
                        model: PressureModel) -> CurvatureReport:
    """Unnormalized sectional curvature <<R(U,V)V,U>> as four itemized integrals.

    The intrinsic term is identically zero on the supported flat base manifolds
    and is reported as such."""
    g = check_same_grid(U.f, V.f, rho)
    _check_density(rho)
    rv = rho.values
    phi = model.phi(rv)
    lam = model.lam(rv)
    dphi = model.dphi(rv)
    f, gg = U.f.values, V.f.values
    div_u = grids.div(U.u).values
    div_v = grids.div(V.u).values

    term_R = 0.0
    coef = rv * dphi + phi**2 / lam
    term_div = integrate(ScalarField(g, coef * (f * div_v - gg * div_u) ** 2))

    quu = q_operator(U.u, U.u).values
    qvv = q_operator(V.u, V.u).values
    quv = q_operator(U.u, V.u).values
    term_Q = integrate(ScalarField(g, phi * (f**2 * qvv + gg**2 * quu - 2 * f * gg * quv)))

    cross = VectorField(g, f * grids.grad(V.f).values - gg * grids.grad(U.f).values)
    term_grad = integrate(ScalarField(g, phi**2 / rv * grids.inner(cross, cross).values))

    total = term_R + term_div + term_Q + term_grad
    uu = metric_inner(U, U, rho, model)
    vv = metric_inner(V, V, rho, model)
    uv = metric_inner(U, V, rho, model)
    gram = uu * vv - uv**2
    normalized = total / gram if abs(gram) > 1e-14 * max(uu * vv, 1.0) else float("nan")
    return CurvatureReport(term_R, term_div, term_Q, term_grad, total, normalized)


@dataclass(frozen=True)
class ScanTrial:
    index: int
    seed: int
    term_R: float
    term_div: float
    term_Q: float
    term_grad: float
    total: float


@dataclass(frozen=True)
class ScanReport:
    trials: list[ScanTrial]
    min_total: float
    argmin: int

    def to_csv(self) -> str:
        lines = ["trial,seed,term_R,term_div,term_Q,term_grad,total"]
        for t in self.trials:
            lines.append(
                f"{t.index},{t.seed},{t.term_R:.17g},{t.term_div:.17g},"
                f"{t.term_Q:.17g},{t.term_grad:.17g},{t.total:.17g}"
            )
        return "\n".join(lines) + "\n"


def random_section_1d(grid: grids.CircleGrid, rng: np.random.Generator):
    """Random band-limited (U, V, rho) tuple on the circle with rho bounded
    away from zero."""
    def bl():
        v = grids.random_band_limited(grid, rng).values
        return v / (np.max(np.abs(v)) + 1e-12)

    U = TangentVector(VectorField(grid, bl()[None]), ScalarField(grid, bl()))
    V = TangentVector(VectorField(grid, bl()[None]), ScalarField(grid, bl()))
    rho = ScalarField(grid, 1.0 + 0.5 * bl())
    return U, V, rho


def curvature_sign_scan_1d(model: PressureModel, trials: int, seed: int,
                           n: int = 64) -> ScanReport:
    """Evaluate the curvature on seeded random 1D sections; nonnegative for
    polytropic gamma <= 3."""
    grid = grids.CircleGrid(n)
    rows = []
    for i in range(trials):
        rng = np.random.Generator(np.random.Philox(key=seed, counter=i))
        U, V, rho = random_section_1d(grid, rng)
        rep = sectional_curvature(U, V, rho, model)
        rows.append(ScanTrial(i, seed, rep.term_R, rep.term_div, rep.term_Q,
                              rep.term_grad, rep.total))
    totals = np.array([r.total for r in rows])
    k = int(np.argmin(totals))
    return ScanReport(rows, float(totals[k]), k)


def jacobi_metric_curvature_1d(u: VectorField, v: VectorField, rho: ScalarField,
                               model: PressureModel, E: float) -> float:
    """Sectional curvature of the energy-conformal metric on circle
    diffeomorphisms, for a rho-orthonormal pair (u, v) at energy level E."""
    g = check_same_grid(u, v, rho)
    if not isinstance(g, grids.CircleGrid):
        raise DomainError("the comparison curvature is implemented on the circle")
    _check_density(rho)
    rv = rho.values
    uu = integrate(ScalarField(g, rv * u.values[0] ** 2))
    vv = integrate(ScalarField(g, rv * v.values[0] ** 2))
    uv = integrate(ScalarField(g, rv * u.values[0] * v.values[0]))
    if abs(uu - 1) > 1e-8 or abs(vv - 1) > 1e-8 or abs(uv) > 1e-8:
        raise NormalizationError("u, v must be rho-orthonormal")
    Phi = integrate(ScalarField(g, rv * model.potential_density(rv)))
    if E <= Phi:
        raise DomainError(f"energy level E={E} must exceed Phi={Phi}")
    dp = rv * model.linearization_coefficient(rv)  # p'(rho)
    du = grids.derivative(ScalarField(g, u.values[0])).values
    dv = grids.derivative(ScalarField(g, v.values[0])).values
    drho = grids.derivative(rho).values
    I1 = 2.0 * integrate(ScalarField(g, rv * dp * (du**2 + dv**2)))
    Ju = integrate(ScalarField(g, dp * drho * u.values[0]))
    Jv = integrate(ScalarField(g, dp * drho * v.values[0]))
    I2 = integrate(ScalarField(g, dp**2 * drho**2 / rv))
    gap = E - Phi
    return (I1 + (3 * Jv**2 + 3 * Ju**2 - I2) / gap) / (4 * gap**2)
