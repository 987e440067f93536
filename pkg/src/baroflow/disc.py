"""Spectral stability machinery for the rigidly rotating disc with pressure
p(rho) = c^2 rho^2 / 2: the weighted Sturm-Liouville eigenproblem on the
radial profile, the characteristic cubic for the mode frequencies, Bessel-root
Rayleigh bounds, exact 3x3 mode evolution, and the boundedness criterion for
Jacobi displacements.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import mpmath
import numpy as np
from scipy import linalg

from . import grids
from .errors import (
    DomainError,
    InstabilityFlagError,
    ProjectionResidualError,
    VacuumError,
)
from .grids import DiscGrid, ScalarField, VectorField, _radial_deriv


@dataclass(frozen=True)
class DiscBackground:
    """Rigidly rotating disc: u = omega d/dtheta with the balancing density
    rho(r) = a + b r^2, a = rho0 - omega^2/2c^2, b = omega^2/2c^2."""

    omega: float
    c: float
    rho0: float

    def __post_init__(self):
        if self.c <= 0:
            raise DomainError("sound speed must be positive")
        if self.rho0 <= self.omega**2 / (2 * self.c**2):
            raise VacuumError(
                f"rho0={self.rho0} must exceed omega^2/(2c^2)="
                f"{self.omega**2 / (2 * self.c**2)}")

    @property
    def a(self) -> float:
        return self.rho0 - self.omega**2 / (2 * self.c**2)

    @property
    def b(self) -> float:
        return self.omega**2 / (2 * self.c**2)

    def rho(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return self.a + self.b * r**2


@dataclass(frozen=True)
class EigenPair:
    """Eigenpair of Lambda sigma = div(rho grad sigma) restricted to the
    azimuthal mode n: radial profile zeta with zeta(1)=0, eigenvalue lam > 0,
    normalized to unit L^2 norm with weight r dr."""

    n: int
    k: int
    lam: float
    r: np.ndarray
    zeta: np.ndarray


def _radial_nodes(n_nodes: int) -> np.ndarray:
    return np.arange(1, n_nodes + 1) / n_nodes


def sturm_liouville_eigs(background: DiscBackground, n: int, k_max: int,
                         n_nodes: int = 400) -> list[EigenPair]:
    """Solve -(1/r)(r rho zeta')' + n^2 rho zeta / r^2 = lam zeta on (0,1)
    with zeta(1) = 0, by a symmetrized second-order finite-difference scheme.

    Multiplying by r gives the generalized symmetric problem A zeta =
    lam R zeta with A = -d/dr(r rho d/dr) + n^2 rho / r and R = diag(r);
    the similarity transform by R^{1/2} reduces it to an ordinary symmetric
    tridiagonal eigenproblem, so the computed spectrum is real by
    construction.  Regularity at the origin: zero flux through r=0 for n=0
    (the profile is even), homogeneous Dirichlet proxy for |n| >= 1
    (zeta ~ r^{|n|})."""
    if n_nodes < 16:
        raise DomainError("radial resolution too coarse")
    h = 1.0 / n_nodes
    r = _radial_nodes(n_nodes)
    ri = r[:-1]  # interior nodes, Dirichlet at r=1
    m = len(ri)
    r_half_lo = ri - h / 2
    r_half_hi = ri + h / 2
    flux_lo = r_half_lo * background.rho(r_half_lo) / h**2
    flux_hi = r_half_hi * background.rho(r_half_hi) / h**2
    diag = flux_lo + flux_hi + n**2 * background.rho(ri) / ri
    if n == 0:
        diag[0] -= flux_lo[0]  # zero flux through the origin
    off = -flux_hi[:-1]
    # similarity by diag(sqrt(r)) symmetrizes the weight
    diag_t = diag / ri
    off_t = off / np.sqrt(ri[:-1] * ri[1:])
    k_max = min(k_max, m)
    vals, vecs = linalg.eigh_tridiagonal(diag_t, off_t,
                                         select="i", select_range=(0, k_max - 1))
    pairs = []
    for k in range(k_max):
        zt = vecs[:, k] / np.sqrt(ri)  # undo the similarity scaling
        zeta = np.concatenate([zt, [0.0]])
        norm = np.sqrt(np.sum(zeta**2 * r) * h)
        zeta = zeta / norm
        if zeta[np.argmax(np.abs(zeta))] < 0:
            zeta = -zeta
        pairs.append(EigenPair(n, k + 1, float(vals[k]), r, zeta))
    return pairs


# ---------------------------------------------------------------------------
# Characteristic cubic


def characteristic_cubic_pq(lam: float, n: int, omega: float, c: float):
    p = (c**2 * lam + 4 * omega**2) / 3.0
    q = n * omega**3
    return p, q


def characteristic_roots(lam: float, n: int, omega: float, c: float) -> np.ndarray:
    """Real roots of y^3 - 3 p y - 2 q = 0 with p = (c^2 lam + 4 omega^2)/3,
    q = n omega^3, by the trigonometric method; the discriminant condition
    q^2 < p^3 (three distinct real roots) is asserted."""
    if lam <= 0:
        raise DomainError("eigenvalue must be positive")
    p, q = characteristic_cubic_pq(lam, n, omega, c)
    if p <= 0 or q**2 >= p**3:
        raise InstabilityFlagError(
            f"discriminant failure: q^2={q**2:.6g} >= p^3={p**3:.6g} "
            f"(lam={lam}, n={n})")
    theta = np.arccos(q / p**1.5)
    ks = np.array([0.0, 1.0, 2.0])
    roots = 2 * np.sqrt(p) * np.cos((theta - 2 * np.pi * ks) / 3.0)
    return np.sort(roots)


# ---------------------------------------------------------------------------
# Bessel roots


def bessel_first_root(n: int) -> float:
    """First positive zero of the order-n Bessel function of the first kind,
    by bisection on the ascending power series.

    The series is summed in arbitrary precision (the terms near x ~ 70 reach
    ~1e28 before cancelling, far beyond float64) and truncated once terms
    drop below 1e-18 relative to the running maximum."""
    if not 0 <= n <= 64:
        raise DomainError(f"order must be in [0, 64], got {n}")

    with mpmath.workdps(60):
        def jn(x):
            x = mpmath.mpf(x)
            term = (x / 2) ** n / mpmath.factorial(n)
            total = term
            biggest = abs(term)
            m = 0
            while abs(term) > mpmath.mpf("1e-18") * biggest:
                term *= -(x / 2) ** 2 / ((m + 1) * (n + m + 1))
                total += term
                biggest = max(biggest, abs(term))
                m += 1
            return total

        lo = mpmath.mpf(max(n, 1))
        hi = lo + 10
        # scan for the first sign change so bisection cannot skip to a later zero
        step = mpmath.mpf("0.1")
        x = lo
        fx = jn(x)
        while x < hi:
            x2 = x + step
            f2 = jn(x2)
            if fx > 0 and f2 <= 0:
                lo, hi = x, x2
                break
            x, fx = x2, f2
        else:
            raise DomainError(f"no sign change found for order {n}")
        flo = jn(lo)
        for _ in range(80):
            mid = (lo + hi) / 2
            fm = jn(mid)
            if (flo > 0) == (fm > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        return float((lo + hi) / 2)


# ---------------------------------------------------------------------------
# Rayleigh bounds


@dataclass(frozen=True)
class BoundRow:
    n: int
    lam1: float
    rayleigh_bound: float
    rayleigh_margin: float
    downstream_margin: float
    arithmetic_ok: bool


@dataclass(frozen=True)
class BoundReport:
    rows: list[BoundRow]
    falsifications: list[str]

    @property
    def all_hold(self) -> bool:
        return not self.falsifications


def rayleigh_bound_check(background: DiscBackground, n_max: int,
                         n_nodes: int = 400, tol: float = 1e-9) -> BoundReport:
    """Check lam_{1n} >= a c_n^2 + b(n^2+1) and the downstream inequality
    c^2 lam_{1n} > omega^2 (3 n^{2/3} - 4) for |n| <= n_max, plus the
    arithmetic fact n^2 + 7 > 6 n^{2/3}."""
    a, b, c, om = background.a, background.b, background.c, background.omega
    rows, bad = [], []
    for n in range(n_max + 1):
        lam1 = sturm_liouville_eigs(background, n, 1, n_nodes)[0].lam
        cn = bessel_first_root(n)
        bound = a * cn**2 + b * (n**2 + 1)
        margin = lam1 - bound
        down = c**2 * lam1 - om**2 * (3 * n ** (2 / 3) - 4)
        arith = n**2 + 7 > 6 * n ** (2 / 3)
        rows.append(BoundRow(n, lam1, bound, margin, down, arith))
        if margin < -tol:
            bad.append(f"n={n}: lam1={lam1:.6g} below Rayleigh bound {bound:.6g}")
        if down <= 0:
            bad.append(f"n={n}: c^2 lam1 fails the downstream inequality")
        if not arith:
            bad.append(f"n={n}: arithmetic inequality n^2+7 > 6n^(2/3) fails")
    return BoundReport(rows, bad)


# ---------------------------------------------------------------------------
# Mode evolution


@dataclass(frozen=True)
class ModeCoefficients:
    """Amplitudes of (sigma, F, G) for one (k, n) mode in the rotating frame
    e^{in(theta - omega t)}."""

    sigma: complex
    F: complex
    G: complex


def mode_matrix(lam: float, n: int, omega: float, c: float) -> np.ndarray:
    """d/dt (sigma, F, G) = M (sigma, F, G) for sigma' + F = 0,
    F' + 2 omega G - c^2 lam sigma = 0, G' - 2 omega F - i n omega^2 sigma = 0.

    The sign of the i n omega^2 coupling follows from taking the curl of the
    momentum equation with the orientation G = -curl(rho v); it is verified
    against a direct method-of-lines integration of the primitive linearized
    equations (see direct_mode_integration)."""
    return np.array([
        [0.0, -1.0, 0.0],
        [c**2 * lam, 0.0, -2 * omega],
        [1j * n * omega**2, 2 * omega, 0.0],
    ], dtype=complex)


@dataclass(frozen=True)
class ModeSystem:
    lam: float
    n: int
    omega: float
    c: float

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Oscillation frequencies iy of the mode matrix; these are the
        negatives of the characteristic cubic roots (the cubic is stated for
        the reflected mode -n)."""
        return np.sort(-characteristic_roots(self.lam, self.n, self.omega, self.c))

    @cached_property
    def _eig(self):
        M = mode_matrix(self.lam, self.n, self.omega, self.c)
        vals, vecs = np.linalg.eig(M)
        ys = np.sort(np.imag(vals))
        if np.max(np.abs(ys - self.frequencies)) > 1e-8 * max(1.0, np.max(np.abs(ys))):
            raise InstabilityFlagError("matrix spectrum disagrees with the cubic")
        if np.linalg.cond(vecs) > 1e8:
            raise DomainError("mode system is numerically defective")
        return vals, vecs, np.linalg.inv(vecs)

    def evolve(self, coeffs0: ModeCoefficients, t: float) -> ModeCoefficients:
        vals, vecs, inv = self._eig
        y0 = np.array([coeffs0.sigma, coeffs0.F, coeffs0.G], dtype=complex)
        yt = vecs @ (np.exp(vals * t) * (inv @ y0))
        return ModeCoefficients(yt[0], yt[1], yt[2])

    def evolve_rk4(self, coeffs0: ModeCoefficients, t: float, dt: float = 1e-3
                   ) -> ModeCoefficients:
        M = mode_matrix(self.lam, self.n, self.omega, self.c)
        y = np.array([coeffs0.sigma, coeffs0.F, coeffs0.G], dtype=complex)
        steps = max(1, int(np.ceil(t / dt)))
        h = t / steps
        for _ in range(steps):
            k1 = M @ y
            k2 = M @ (y + 0.5 * h * k1)
            k3 = M @ (y + 0.5 * h * k2)
            k4 = M @ (y + h * k3)
            y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        return ModeCoefficients(y[0], y[1], y[2])

    def displacement_amplitude(self, coeffs0: ModeCoefficients, t: float) -> float:
        """|int_0^t sigma(s) ds|-style amplitude proxy for the Jacobi
        displacement of this mode: the component on a zero frequency grows
        linearly, every other component stays bounded."""
        vals, vecs, inv = self._eig
        y0 = np.array([coeffs0.sigma, coeffs0.F, coeffs0.G], dtype=complex)
        w = inv @ y0
        total = 0.0 + 0.0j
        for val, amp in zip(vals, w):
            if abs(val) < 1e-12:
                total += amp * t
            else:
                total += amp * (np.exp(val * t) - 1.0) / val
        return abs(total)


def mode_evolution(coeffs0: ModeCoefficients, lam: float, n: int, omega: float,
                   c: float, t: float) -> ModeCoefficients:
    return ModeSystem(lam, n, omega, c).evolve(coeffs0, t)


# ---------------------------------------------------------------------------
# Synthesis and classification


@dataclass(frozen=True)
class ModeEntry:
    n: int
    k: int
    lam: float
    frequencies: np.ndarray
    coeffs: ModeCoefficients
    has_zero_frequency: bool


@dataclass(frozen=True)
class Classification:
    bounded: bool
    criterion_value: float
    projection_residual: float
    modes: list[ModeEntry]


def _project_profiles(background: DiscBackground, profile: np.ndarray, n: int,
                      k_max: int, n_nodes: int):
    """Coefficients of a radial profile in the (weight r) orthonormal
    eigenbasis, plus the unexplained L^2 remainder over interior nodes (the
    basis itself enforces the boundary constraint at r=1)."""
    pairs = sturm_liouville_eigs(background, n, k_max, n_nodes)
    h = 1.0 / n_nodes
    r = _radial_nodes(n_nodes)
    coeffs = np.array([np.sum(profile * p.zeta * r) * h for p in pairs])
    recon = sum(cf * p.zeta for cf, p in zip(coeffs, pairs))
    resid = np.sqrt(np.sum((np.abs(profile - recon) ** 2 * r)[:-1]) * h)
    return pairs, coeffs, resid


def synthesize_and_classify(v0: VectorField, background: DiscBackground,
                            k_max: int = 12, n_max: int = 16,
                            residual_tol: float = 1e-6) -> Classification:
    """Project rho v0 = grad f + sgrad g onto the eigenbasis via F = div(rho v0)
    and G = -curl(rho v0) (the sgrad orientation used here satisfies
    curl(sgrad g) = -Delta g), evolve each mode exactly, and classify.

    The displacement is bounded iff the azimuthal average of curl(rho v0)
    vanishes at every radius: a zero frequency occurs only at n = 0, and the
    n = 0 rotational component rides it."""
    g = v0.grid
    if not isinstance(g, DiscGrid):
        raise DomainError("disc classification needs a disc field")
    n_nodes = g.n_r
    rho = background.rho(g.r)[:, None]
    P = VectorField(g, rho * v0.values)
    F0 = grids.div(P).values
    G0 = -grids.curl(P).values
    F_hat = np.fft.fft(F0, axis=1) / g.n_theta
    G_hat = np.fft.fft(G0, axis=1) / g.n_theta

    # boundedness criterion: n=0 azimuthal average of curl(rho v0)
    crit = float(np.max(np.abs(G_hat[:, 0])))
    scale = float(np.max(np.abs(G0))) + float(np.max(np.abs(F0))) + 1e-300
    bounded = crit < 1e-10 * max(scale, 1.0)

    total_sq = float(np.sum((np.abs(F_hat) ** 2 + np.abs(G_hat) ** 2)
                            * g.r[:, None]) / n_nodes)
    resid_sq = 0.0
    modes = []
    for n in range(-n_max, n_max + 1):
        fprof = F_hat[:, n % g.n_theta]
        gprof = G_hat[:, n % g.n_theta]
        if np.max(np.abs(fprof)) + np.max(np.abs(gprof)) < 1e-14 * max(scale, 1.0):
            continue
        pairs, fc, fres = _project_profiles(background, fprof, n, k_max, n_nodes)
        _, gc, gres = _project_profiles(background, gprof, n, k_max, n_nodes)
        resid_sq += fres**2
        if n != 0:
            # the n=0 rotational profile rides the zero frequency and is
            # handled in closed form by the curl criterion, not the basis
            resid_sq += gres**2
        for pair, fck, gck in zip(pairs, fc, gc):
            if abs(fck) + abs(gck) < 1e-12 * max(scale, 1.0):
                continue
            sys = ModeSystem(pair.lam, n, background.omega, background.c)
            ys = sys.frequencies
            has_zero = bool(np.any(np.abs(ys) < 1e-12))
            modes.append(ModeEntry(n, pair.k, pair.lam, ys,
                                   ModeCoefficients(0.0, fck, gck), has_zero))
    residual = float(np.sqrt(resid_sq / (total_sq + 1e-300)))
    if total_sq > 0 and residual > residual_tol:
        raise ProjectionResidualError(
            f"initial data leaves relative residual {residual:.3e} outside the "
            f"truncated eigenbasis (boundary-incompatible or under-resolved)")
    return Classification(bounded, crit, residual, modes)


# ---------------------------------------------------------------------------
# Direct radial integration (cross-check for the mode reduction)


def _radial_deriv_matrix(n_nodes: int) -> np.ndarray:
    """Dense matrix of the second-order radial derivative stencil used by the
    grid operators (centered interior, one-sided ends)."""
    h = 1.0 / n_nodes
    D = np.zeros((n_nodes, n_nodes))
    for i in range(1, n_nodes - 1):
        D[i, i - 1] = -1 / (2 * h)
        D[i, i + 1] = 1 / (2 * h)
    D[0, 0], D[0, 1], D[0, 2] = -3 / (2 * h), 4 / (2 * h), -1 / (2 * h)
    D[-1, -1], D[-1, -2], D[-1, -3] = 3 / (2 * h), -4 / (2 * h), 1 / (2 * h)
    return D


def radial_poisson_gradient_mode(background: DiscBackground, pair: EigenPair):
    """Solve Delta_n f = zeta with f(1) = 0, using the same composite
    derivative stencil as the grid operators, so that div(grad(f e^{in theta}))
    evaluated through those operators reproduces zeta exactly on interior
    nodes.  Returns (f, a, b) radial arrays with rho v0 = a d/dr + b d/dtheta
    (so v0 = (1/rho) * (a, b) is a pure-gradient perturbation)."""
    n = pair.n
    n_nodes = len(pair.r)
    r = pair.r
    D = _radial_deriv_matrix(n_nodes)
    # Delta_n f = (1/r) d/dr(r df/dr) - n^2 f / r^2 through the grid stencil
    lap = (np.diag(1.0 / r) @ D @ np.diag(r) @ D
           - np.diag(n**2 / r**2))
    f_int = np.linalg.solve(lap[:-1, :-1], pair.zeta[:-1])
    f = np.concatenate([f_int, [0.0]])
    a = D @ f
    b = 1j * n * f / r**2
    return f, a, b


def direct_mode_integration(background: DiscBackground, n: int,
                            sigma0: np.ndarray, a0: np.ndarray, b0: np.ndarray,
                            t_end: float, dt: float):
    """RK4 method-of-lines integration of the linearized equations for one
    azimuthal mode e^{in theta} (laboratory frame) on the radial grid:
    sigma_t = -(1/r)(r rho a)' - i n rho b - i n omega sigma,
    a_t = -i n omega a + 2 r omega b - c^2 sigma',
    b_t = -i n omega b - 2 omega a / r - i n c^2 sigma / r^2,
    with sigma pinned to zero at the boundary.  Here (a, b) are the
    coordinate components of the velocity perturbation."""
    n_nodes = len(sigma0)
    h = 1.0 / n_nodes
    r = _radial_nodes(n_nodes)
    rho = background.rho(r)
    om, c = background.omega, background.c

    def flux_deriv(gv):
        """d/dr of an r-weighted flux that vanishes at the axis; using the
        known zero at r=0 keeps the stencil stable under the 1/r weight."""
        out = _radial_deriv(gv, h)
        out[0] = gv[1] / (2 * h)
        return out

    # internally evolve the physical azimuthal component V = r b, which stays
    # regular at the axis
    def rhs(sig, a, V):
        dsig = (-flux_deriv(r * rho * a) / r - 1j * n * rho * V / r
                - 1j * n * om * sig)
        dsig[-1] = 0.0
        da = -1j * n * om * a + 2 * om * V - c**2 * _radial_deriv(sig, h)
        dV = -1j * n * om * V - 2 * om * a - 1j * n * c**2 * sig / r
        return dsig, da, dV

    sig = np.asarray(sigma0, dtype=complex).copy()
    a = np.asarray(a0, dtype=complex).copy()
    V = r * np.asarray(b0, dtype=complex)
    steps = max(1, int(np.ceil(t_end / dt)))
    hstep = t_end / steps
    for _ in range(steps):
        k1 = rhs(sig, a, V)
        k2 = rhs(sig + 0.5 * hstep * k1[0], a + 0.5 * hstep * k1[1], V + 0.5 * hstep * k1[2])
        k3 = rhs(sig + 0.5 * hstep * k2[0], a + 0.5 * hstep * k2[1], V + 0.5 * hstep * k2[2])
        k4 = rhs(sig + hstep * k3[0], a + hstep * k3[1], V + hstep * k3[2])
        sig = sig + (hstep / 6) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        a = a + (hstep / 6) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        V = V + (hstep / 6) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    return sig, a, V / r
