"""Closed-form Jacobi analysis along the uniformly sheared torus geodesic
u = omega d/dy, rho = 1: the displacement splits into a gradient part that
oscillates acoustically and a divergence-free part that grows linearly, so
boundedness holds exactly when the initial perturbation is a gradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import grids, jacobi
from .errors import DomainError
from .geodesic import steady_shear_torus
from .grids import ScalarField, TorusGrid, VectorField, hodge_decompose, integrate
from .pressure import PressureModel, polytropic


def _wavenumbers(g: TorusGrid):
    kx = np.fft.fftfreq(g.nx, d=1.0 / g.nx)[:, None]
    ky = np.fft.fftfreq(g.ny, d=1.0 / g.ny)[None, :]
    return kx, ky


@dataclass(frozen=True)
class TorusModeSolution:
    """Spectral data for the shear-geodesic Jacobi field: f_hat holds the FFT
    of the gradient potential of v0, z the divergence-free remainder."""

    grid: TorusGrid
    f_hat: np.ndarray
    z: VectorField
    omega: float
    c: float

    def j_at(self, t: float) -> VectorField:
        """j(t) = sum_k (a_k sin(c|k|t)/(c|k|)) grad phi_k(x, y - omega t)
        + t z(x, y - omega t)."""
        g = self.grid
        kx, ky = _wavenumbers(g)
        kmag = np.sqrt(kx**2 + ky**2)
        ksafe = np.where(kmag == 0, 1.0, kmag)
        osc = np.where(kmag == 0, 0.0, np.sin(self.c * ksafe * t) / (self.c * ksafe))
        shift = np.exp(-1j * ky * self.omega * t)
        coef = self.f_hat * osc * shift
        jx = np.real(np.fft.ifft2(1j * kx * coef))
        jy = np.real(np.fft.ifft2(1j * ky * coef))
        zx = np.real(np.fft.ifft2(np.fft.fft2(self.z.values[0]) * shift))
        zy = np.real(np.fft.ifft2(np.fft.fft2(self.z.values[1]) * shift))
        return VectorField(g, np.stack([jx + t * zx, jy + t * zy]))

    def series_bound(self) -> float:
        """sup_t ||gradient part of j(t)||_inf <= sum_k |f_hat_k| / (c N)."""
        n_total = self.grid.nx * self.grid.ny
        total = np.sum(np.abs(self.f_hat)) - np.abs(self.f_hat[0, 0])
        return float(total) / (self.c * n_total)

    def z_sup_norm(self) -> float:
        mag = np.sqrt(grids.inner(self.z, self.z).values)
        return float(np.max(mag))


def synthesize(v0: VectorField, omega: float, c: float) -> TorusModeSolution:
    if not isinstance(v0.grid, TorusGrid):
        raise DomainError("torus mode solutions need a torus field")
    if c <= 0:
        raise DomainError("sound speed must be positive")
    f, z = hodge_decompose(v0)
    return TorusModeSolution(v0.grid, np.fft.fft2(f.values), z, float(omega), float(c))


def torus_jacobi(v0: VectorField, omega: float, c: float, t: float) -> VectorField:
    return synthesize(v0, omega, c).j_at(t)


@dataclass(frozen=True)
class BoundednessReport:
    bounded: bool
    w_norm: float
    series_bound: float | None


def classify_boundedness(v0: VectorField, c: float = 1.0,
                         tol: float = 1e-10) -> BoundednessReport:
    """Bounded displacement iff v0 is a gradient: certificate is the L^2 norm
    of the divergence-free Hodge part, plus the analytic sup bound when
    bounded."""
    sol = synthesize(v0, 0.0, c)
    w_norm = float(np.sqrt(integrate(grids.inner(sol.z, sol.z))))
    bounded = w_norm < tol
    return BoundednessReport(bounded, w_norm, sol.series_bound() if bounded else None)


def torus_curvature_coefficient(model: PressureModel) -> float:
    """(phi'(1) + phi(1)^2/lambda(1)) / lambda(1)^2; the curvature in the
    shear section is this times int (div v)^2 dmu."""
    lam1 = float(model.lam(1.0))
    return float((model.dphi(1.0) + model.phi(1.0) ** 2 / lam1) / lam1**2)


@dataclass(frozen=True)
class CrosscheckReport:
    times: list[float]
    max_rel_gap: float
    growth_slope: float | None


def mode_numeric_crosscheck(v0: VectorField, omega: float, c: float,
                            t_end: float, dt: float = 0.01,
                            n_samples: int = 10) -> CrosscheckReport:
    """Integrate the linearized equations along the shear geodesic and compare
    j with the closed-form series at sampled times."""
    g = v0.grid
    model = polytropic(c**2 / 2, 2.0)
    state = steady_shear_torus(np.full(g.nx, omega), g, model)
    sol = synthesize(v0, omega, c)
    n_steps = int(np.ceil(t_end / dt))
    store = max(1, n_steps // n_samples)
    traj = jacobi.integrate_linearized(state, jacobi.initial_jacobi(v0),
                                       model, t_end, dt, store_every=store)
    gaps, times, norms = [], [], []
    for t, js in zip(traj.times[1:], traj.jstates[1:]):
        expect = sol.j_at(t)
        diff = js.j.values - expect.values
        num = np.sqrt(integrate(ScalarField(g, np.sum(diff**2, axis=0))))
        den = np.sqrt(integrate(grids.inner(expect, expect))) + 1e-300
        gaps.append(num / den)
        times.append(t)
        norms.append(np.sqrt(integrate(grids.inner(js.j, js.j))))
    slope = None
    if len(times) > 2:
        slope = float(np.polyfit(times, norms, 1)[0])
    return CrosscheckReport(times, float(np.max(gaps)) if gaps else 0.0, slope)
