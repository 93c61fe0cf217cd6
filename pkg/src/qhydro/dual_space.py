"""Coupled evolution of a state with its own conjugate.

A real constant couples the forward and backward evolutions; for a
homogeneous system the action components obey

    dS_re/dt = -E - eps * cos(2 S_re / hbar)
    dS_im/dt =  eps * sin(2 S_re / hbar)

whose S_re admits an arctan closed form with continuous branch tracking.
The printed closed form has slope +(E + eps) at t = 0 while the defining
equation demands -(E + eps); both signed variants are exposed and the
negated one, which satisfies the equation identically, is the default.

The density rides the amplitude: rho(t)/m = exp[(eps/E) cos(2 E t/hbar)]
to first order, an oscillation at the Bohr frequency of the doubled
energy whose period mean restores the mass.  The exact period mean picks
up the modified-Bessel factor I0(eps/E), quantifying how far beyond first
order conservation-in-average holds.

For spatial fields the coupled equation is real-linear but antilinear in
complex scalars, so the stepper works on the real 2-component form with
an exact local rotation for the potential/coupling part.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError, StepDiverged
from .grid import ComplexField, PhysicalParams, RealField, gradient_array
from .madelung import density, eikonal_action, quantum_pressure
from .grid import DENSITY_FLOOR
from .schrodinger import PotentialSpec

#: approximation-based operations refuse ratios above this by default
DEFAULT_RATIO_GUARD = 0.2


@dataclass(frozen=True)
class DualCouplingParams:
    """Energy constant E > 0 and real coupling eps (complex allowed for the
    frictional variant); the eps/E ratio is recorded for the guard on
    perturbative operations."""

    energy: float
    coupling: complex
    ratio_guard: float = DEFAULT_RATIO_GUARD

    def __post_init__(self):
        if self.energy <= 0:
            raise DomainError("coupling energy must be positive")

    @property
    def ratio(self):
        return abs(self.coupling) / self.energy

    def require_perturbative(self):
        if self.ratio > self.ratio_guard:
            raise DomainError(
                f"eps/E = {self.ratio:.3g} above the perturbative guard "
                f"{self.ratio_guard:g}")


@dataclass(frozen=True)
class ActionTrajectory:
    """Sampled action components with the S(0) = 0 gauge."""

    t: np.ndarray = field(repr=False)
    s_re: np.ndarray = field(repr=False)
    s_im: np.ndarray = field(repr=False)

    def __post_init__(self):
        if np.any(np.diff(self.t) <= 0):
            raise DomainError("time grid must be strictly increasing")
        if abs(self.s_re[0]) > 1e-14 or abs(self.s_im[0]) > 1e-14:
            raise DomainError("trajectory gauge requires S(0) = 0")


def integrate_action_odes(params: DualCouplingParams, t_grid,
                          hbar: float = 1.0) -> ActionTrajectory:
    """RK4 on the coupled action equations, substepping each interval so
    the internal step stays below hbar / (20 (E + |eps|))."""
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
        raise DomainError("need a strictly increasing time grid")
    eps = complex(params.coupling)
    if eps.imag != 0.0:
        raise DomainError("action equations take a real coupling")
    dt_max = hbar / (20.0 * (params.energy + abs(eps.real)))
    n_sub = max(1, int(np.ceil(np.max(np.diff(t)) / dt_max)))
    s_re, s_im = kernels.action_rk4(t, params.energy, eps.real, hbar, n_sub)
    if not (np.all(np.isfinite(s_re)) and np.all(np.isfinite(s_im))):
        raise StepDiverged("action integration produced non-finite values")
    return ActionTrajectory(t, s_re, s_im)


def closed_form_action(params: DualCouplingParams, t, hbar: float = 1.0,
                       branch: str = "ode"):
    """Arctan closed form with continuous branch continuation.

    branch="ode" (default) returns the negated variant whose derivative
    at t = 0 is -(E + eps), matching the defining equation; "printed"
    returns the other sign.
    """
    if branch not in ("ode", "printed"):
        raise DomainError(f"unknown branch {branch!r}")
    e = params.energy
    eps = complex(params.coupling)
    if eps.imag != 0.0:
        raise DomainError("closed form takes a real coupling")
    eps = eps.real
    if abs(eps) >= e:
        raise DomainError("closed form needs |eps| < E")
    omega = np.sqrt(e**2 - eps**2)
    alpha = omega / (e - eps)
    theta = omega * np.asarray(t, dtype=float) / hbar
    tan_theta = np.tan(theta)
    # branch index from the same tan evaluation, so samples that land on a
    # numerical pole stay paired with the right winding
    wind = np.round((theta - np.arctan(tan_theta)) / np.pi)
    val = hbar * (np.arctan(alpha * tan_theta) + np.pi * wind)
    return -val if branch == "ode" else val


def action_period(params: DualCouplingParams, hbar: float = 1.0) -> float:
    """Oscillation period pi hbar / sqrt(E^2 - eps^2)."""
    e, eps = params.energy, abs(complex(params.coupling).real)
    if eps >= e:
        raise DomainError("period needs |eps| < E")
    return np.pi * hbar / np.sqrt(e**2 - eps**2)


def approx_wavefunction(params: DualCouplingParams, t, hbar: float = 1.0):
    """First-order homogeneous solution exp[-i E t/hbar
    + (eps/2E) cos(2 E t/hbar)]; guarded to the perturbative regime."""
    params.require_perturbative()
    e = params.energy
    eps = complex(params.coupling).real
    t = np.asarray(t, dtype=float)
    return np.exp(-1j * e * t / hbar + (eps / (2 * e)) * np.cos(2 * e * t / hbar))


def virtual_mass(params: DualCouplingParams, mass: float) -> float:
    """First-order oscillation amplitude m' = m eps / E."""
    return mass * complex(params.coupling).real / params.energy


def mass_oscillation(params: DualCouplingParams, mass: float, t,
                     hbar: float = 1.0, first_order: bool = False):
    """rho(t) = m exp[(eps/E) cos(2 E t/hbar)], or its linearized form
    m + m' cos(2 E t/hbar)."""
    params.require_perturbative()
    e = params.energy
    t = np.asarray(t, dtype=float)
    c = np.cos(2 * e * t / hbar)
    if first_order:
        return mass + virtual_mass(params, mass) * c
    return mass * np.exp((complex(params.coupling).real / e) * c)


def mass_period_mean(params: DualCouplingParams, mass: float,
                     hbar: float = 1.0, first_order: bool = False,
                     samples: int = 4096) -> float:
    """Period average of the density by trapezoid quadrature (spectrally
    accurate on a periodic integrand); the exact form averages to
    m * I0(eps/E), the linearized one to m."""
    period = np.pi * hbar / params.energy
    ts = np.linspace(0.0, period, samples, endpoint=False)
    vals = mass_oscillation(params, mass, ts, hbar, first_order=first_order)
    return float(np.mean(vals))


def _local_rotation(grid_values_a, grid_values_b, potential_values, eps,
                    hbar, dt):
    """Exact flow of the pointwise system d/dt (a, b) = M (a, b),
    M = [[0, (U - eps)/hbar], [-(U + eps)/hbar, 0]].

    M^2 = -(U^2 - eps^2)/hbar^2 * I, so the exponential is a rotation for
    |U| > |eps| and a hyperbolic mix otherwise; both come out of the same
    complex square root.
    """
    u = potential_values
    w = (u**2 - eps**2) / hbar**2
    z = np.sqrt(w.astype(complex)) * dt
    cos_z = np.real(np.cos(z))
    small = np.abs(z) < 1e-12
    sinc = np.empty_like(cos_z)
    nz = ~small
    sinc[nz] = np.real(np.sin(z[nz]) / z[nz])
    sinc[small] = 1.0
    s_dt = sinc * dt
    a_new = cos_z * grid_values_a + s_dt * (u - eps) / hbar * grid_values_b
    b_new = -s_dt * (u + eps) / hbar * grid_values_a + cos_z * grid_values_b
    return a_new, b_new


def step_dual_schrodinger(psi: ComplexField, potential: RealField, eps: float,
                          params: PhysicalParams, dt: float) -> ComplexField:
    """Strang step of the conjugate-coupled equation on the real
    2-component form: local half-rotations around a full kinetic spectral
    step, so eps = 0 reduces exactly to the unitary stepper.

    Real-linear by construction; complex superposition does not survive
    the conjugate coupling.
    """
    grid = psi.grid
    a = psi.values.real.copy()
    b = psi.values.imag.copy()
    u = potential.values
    a, b = _local_rotation(a, b, u, eps, params.hbar, 0.5 * dt)
    kin = np.exp(-1j * params.quantum_diffusion_scale * grid.k**2 * dt)
    zc = np.fft.ifft(kin * np.fft.fft(a + 1j * b))
    a, b = zc.real, zc.imag
    a, b = _local_rotation(a, b, u, eps, params.hbar, 0.5 * dt)
    out = a + 1j * b
    if not np.all(np.isfinite(out)):
        raise StepDiverged("dual-space step produced non-finite samples")
    return ComplexField(grid, out)


@dataclass(frozen=True)
class DualResidualDiagnostics:
    """Imbalance of the linearized complex action balance along a short
    series, plus the time-travel drag terms."""

    action_residual_re: RealField
    action_residual_im: RealField
    action_residual_max: float
    darcy_term: RealField
    darcy_magnitude: float
    drag_balance_rel: float
    continuity_rel: float
    linearization_ok: bool
    max_action_ratio: float


def _aligned_actions(psi_series, params, hbar):
    """Eikonal actions of consecutive snapshots with the global phase
    branch aligned (2 pi hbar jumps removed between frames)."""
    actions = []
    prev = None
    for psi in psi_series:
        s_re, s_im = eikonal_action(psi, params)
        re = s_re.values.copy()
        if prev is not None:
            wind = np.round(np.mean(re - prev) / (2 * np.pi * hbar))
            re -= 2 * np.pi * hbar * wind
        actions.append((re, s_im.values))
        prev = re
    return actions


def teleportation_ns_residual(psi_series, potential: PotentialSpec,
                              eps: complex, params: PhysicalParams,
                              dt: float,
                              linearization_limit: float = 0.5) -> DualResidualDiagnostics:
    """Evaluate the linearized action balance on three snapshots.

    Checks dS/dt + (grad S)^2/2m + U against the diffusive term plus the
    linearized coupling -eps + 2 i eps S_re/hbar, and reports the Darcy
    drag eps V / (m D_quantum) that the coupling adds at the velocity
    level.  With an imaginary coupling eps = i (hbar/2m) b this drag is
    the real friction -b V / m, and the record carries how well the
    overdamped force balance and the continuity equation hold on the
    series.  A diagnostic, not a solver: residuals are reported even when
    the linearization domain is violated (flagged).
    """
    psi_m, psi_0, psi_p = psi_series
    grid = psi_0.grid
    hbar = params.hbar
    u = potential.build(grid, params).values

    (re_m, im_m), (re_0, im_0), (re_p, im_p) = _aligned_actions(
        psi_series, params, hbar)
    ds_dt = ((re_p - re_m) + 1j * (im_p - im_m)) / (2.0 * dt)
    s_0 = re_0 + 1j * im_0

    max_ratio = float(np.max(np.abs(re_0)) / hbar)
    lin_ok = max_ratio <= linearization_limit

    dm = 1j * params.quantum_diffusion_scale
    # spatial derivatives of the action through psi itself: grad S =
    # -i hbar grad(psi)/psi and lap S = -i hbar (psi lap psi -
    # (grad psi)^2)/psi^2, all divisions pointwise after the spectral
    # derivatives of the periodic-friendly psi
    dpsi = gradient_array(grid, psi_0.values)
    lap_psi = gradient_array(grid, dpsi)
    rho_u = np.abs(psi_0.values) ** 2
    bulk_pts = rho_u > 1e-12 * np.max(rho_u)
    psi_sq = psi_0.values**2
    grad_s = np.zeros_like(psi_0.values)
    np.divide(-1j * hbar * dpsi, psi_0.values, out=grad_s, where=bulk_pts)
    lap_s = np.zeros_like(psi_0.values)
    np.divide(-1j * hbar * (psi_0.values * lap_psi - dpsi**2), psi_sq,
              out=lap_s, where=bulk_pts)

    lhs = ds_dt + grad_s**2 / (2.0 * params.mass) + u
    rhs = dm * lap_s - eps + 2j * eps * re_0 / hbar
    residual = lhs - rhs

    v = grad_s.real / params.mass
    darcy = (eps * v / (params.mass * params.quantum_diffusion_scale))
    darcy_mag = float(np.max(np.abs(darcy)))

    # frictional reading: real part of eps/(m D) is a drag coefficient
    drag_coeff = (eps / (params.mass * dm)).real * params.mass
    rho_0 = density(psi_0, params)
    bulk = rho_0.values > 1e-6 * np.max(rho_0.values)
    if abs(drag_coeff) > 0:
        p_q = quantum_pressure(rho_0, params)
        grad_u = -potential.force(grid, params)
        force = (grad_u + gradient_array(grid, p_q.values)
                 / np.maximum(rho_0.values, DENSITY_FLOOR)) / params.mass
        drag = drag_coeff * v / params.mass
        imbalance = force + drag
        drag_scale = max(float(np.max(np.abs(drag[bulk]))), 1e-300)
        drag_rel = float(np.max(np.abs(imbalance[bulk]))) / drag_scale
    else:
        drag_rel = 0.0

    rho_m = density(psi_m, params)
    rho_p = density(psi_p, params)
    drho_dt = (rho_p.values - rho_m.values) / (2.0 * dt)
    flux = params.hbar * np.imag(np.conj(psi_0.values) * dpsi)
    cont = drho_dt + gradient_array(grid, flux)
    cont_scale = max(float(np.max(np.abs(drho_dt[bulk]))), 1e-300)
    cont_rel = float(np.max(np.abs(cont[bulk]))) / cont_scale

    return DualResidualDiagnostics(
        action_residual_re=RealField(grid, residual.real),
        action_residual_im=RealField(grid, residual.imag),
        action_residual_max=float(np.max(np.abs(residual[bulk]))),
        darcy_term=RealField(grid, darcy.real if np.iscomplexobj(darcy) else darcy),
        darcy_magnitude=darcy_mag,
        drag_balance_rel=drag_rel,
        continuity_rel=cont_rel,
        linearization_ok=lin_ok,
        max_action_ratio=max_ratio,
    )


def darcy_permeability(params: PhysicalParams, eps: complex) -> complex:
    """Complex permeability m D_quantum / eps of the time-travel drag."""
    if eps == 0:
        raise DomainError("permeability undefined at zero coupling")
    return params.mass * complex(0.0, params.quantum_diffusion_scale) / eps
