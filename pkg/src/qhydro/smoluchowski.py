"""Overdamped density evolution with a teleportation source.

The flux carries the density down gradients of the external plus quantum
potential (plus the thermal entropy term at finite temperature); the
source feeds or drains density wherever the local energy deviates from
the reference constant.  A harmonic-well ground state is a fixed point:
there the quantum-plus-external energy is flat, so both the flux and the
source vanish.

Spatial discretization is a staggered flux form on the periodic grid:
face fluxes F_{j+1/2} = rho_{j+1/2} (mu_{j+1} - mu_j)/dx with the local
energy mu = U + Q (+ kT log rho when thermal), divergenced back to cells.
The sum of face differences telescopes exactly, so mass bookkeeping is
exact, and the form is dissipative by summation by parts.  Local stencils
matter here: with global spectral derivatives a perturbation at a
near-vacuum point, divided by the tiny local sqrt(rho), lands in the bulk
multiplied by the large bulk sqrt(rho), which puts a genuinely positive
eigenvalue of order sqrt(peak/floor) into the linearization; compact
stencils bound that ratio by one cell of tail decay.

The free-particle Gaussian is an exact self-similar solution; its
dispersion obeys a transcendental law solved here by bracketed bisection
(monotone left side), with the short-time square-root and long-time
linear-in-t regimes as limits, and a thermal variant whose root exists
exactly while kappa^2 lambda_T^2 < 2.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, IllPosed, NegativeDensity, StepDiverged
from .grid import DENSITY_FLOOR, Grid1D, PhysicalParams, RealField, integrate
from .schrodinger import PotentialSpec

#: explicit RK2 stability: the quantum term acts like a fourth-order
#: diffusion with worst discrete rate 4 hbar^2 / (m b dx^4); the bound
#: dt <= QUARTIC_DT_SAFETY * dx^4 m b / hbar^2 sits a factor ~2 under the
#: measured threshold (see the dt-scan test)
QUARTIC_DT_SAFETY = 0.25
#: thermal Fickian term adds a second-order rate 4 kT / (b dx^2)
FICKIAN_DT_SAFETY = 0.25
#: relative negativity below which discretization dust is tolerated
NEGATIVITY_TOL = 1e-9



@dataclass(frozen=True)
class TeleportationParams:
    """Friction b, teleportation wavenumber kappa, and the energy
    references: E for the zero-temperature law, free energy F and
    temperature T for the thermal one.  mean_free_path feeds the
    kappa*lambda < 1 validation."""

    friction: float
    kappa: float = 0.0
    energy: float | None = None
    free_energy: float | None = None
    temperature: float = 0.0
    mean_free_path: float | None = None

    def __post_init__(self):
        if self.friction <= 0:
            raise DomainError("friction coefficient must be positive")
        if self.kappa < 0:
            raise DomainError("teleportation wavenumber must be >= 0")
        if self.temperature < 0:
            raise DomainError("temperature must be >= 0")
        if self.mean_free_path is not None and self.mean_free_path <= 0:
            raise DomainError("mean free path must be positive")


def teleportation_temperature(tp: TeleportationParams, params: PhysicalParams) -> float:
    """T_tel = hbar^2 kappa^2 / (8 m k_B)."""
    return params.hbar**2 * tp.kappa**2 / (8.0 * params.mass * params.k_boltzmann)


def teleportation_diffusion(tp: TeleportationParams, params: PhysicalParams) -> float:
    """D_tel = k_B T_tel / b = hbar^2 kappa^2 / (8 m b)."""
    return params.k_boltzmann * teleportation_temperature(tp, params) / tp.friction


def transferred_momentum(tp: TeleportationParams, params: PhysicalParams) -> float:
    """sigma_p = hbar kappa / 2."""
    return params.hbar * tp.kappa / 2.0


def thermal_de_broglie(tp: TeleportationParams, params: PhysicalParams) -> float:
    """lambda_T = hbar / (2 sqrt(m k_B T))."""
    if tp.temperature <= 0:
        raise DomainError("thermal wavelength needs T > 0")
    return params.hbar / (2.0 * np.sqrt(params.mass * params.k_boltzmann
                                        * tp.temperature))


def einstein_diffusion(tp: TeleportationParams, params: PhysicalParams) -> float:
    """D = k_B T / b."""
    return params.k_boltzmann * tp.temperature / tp.friction


def friction_from_mean_free_path(mean_free_path: float,
                                 params: PhysicalParams) -> float:
    """b ~ hbar / lambda^2 for a quantum particle in a classical gas."""
    if mean_free_path <= 0:
        raise DomainError("mean free path must be positive")
    return params.hbar / mean_free_path**2


def validate_teleportation_length(tp: TeleportationParams,
                                  params: PhysicalParams | None = None) -> None:
    """Require kappa * lambda < 1: the teleportation length 1/kappa must
    exceed the mean free path."""
    if tp.mean_free_path is None:
        raise DomainError("no mean free path provided to validate against")
    product = tp.kappa * tp.mean_free_path
    if product >= 1.0:
        raise DomainError(
            f"kappa*lambda = {product:.3g} violates the teleportation-length "
            f"constraint kappa*lambda < 1")


@dataclass(frozen=True)
class SmoluchowskiState:
    rho: RealField
    mass: float
    time: float

    @classmethod
    def from_density(cls, rho: RealField, time: float = 0.0):
        if np.any(rho.values < 0):
            raise NegativeDensity("initial density must be nonnegative")
        return cls(rho=rho, mass=integrate(rho), time=time)


def max_stable_dt(grid: Grid1D, tp: TeleportationParams,
                  params: PhysicalParams, thermal: bool = False) -> float:
    """Explicit-step bound: quartic quantum rate at the stencil limit,
    tightened by the Fickian rate when thermal."""
    quartic = QUARTIC_DT_SAFETY * grid.dx**4 * params.mass * tp.friction / params.hbar**2
    if not thermal or tp.temperature == 0:
        return quartic
    d = einstein_diffusion(tp, params)
    if d == 0:
        return quartic
    fickian = FICKIAN_DT_SAFETY * grid.dx**2 / d
    return min(quartic, fickian)


def _local_laplacian(values, dx):
    return (np.roll(values, -1) - 2.0 * values + np.roll(values, 1)) / dx**2


def _local_gradient(values, dx):
    return (np.roll(values, -1) - np.roll(values, 1)) / (2.0 * dx)


def _face_divergence(face_flux, dx):
    """Cell update from face fluxes F_{j+1/2}; telescopes exactly."""
    return (face_flux - np.roll(face_flux, 1)) / dx


def _quantum_terms(rho, dx, params):
    """(P, rho*Q) from s = sqrt(rho), division-free.

    P is the pressure whose gradient equals rho grad(Q), P = (hbar^2/2m)
    ((s')^2 - s s''); using it for the quantum face flux keeps every
    quantity bounded by construction, so clamped tail cells cannot spawn
    the 1/s spikes a pointwise Q would produce there.
    """
    s = np.sqrt(np.maximum(rho, 0.0))
    s1 = _local_gradient(s, dx)
    s2 = _local_laplacian(s, dx)
    coeff = params.hbar**2 / (2.0 * params.mass)
    p_q = coeff * (s1**2 - s * s2)
    rho_q = -coeff * s * s2
    return p_q, rho_q


def _check_density(values):
    if not np.all(np.isfinite(values)):
        raise StepDiverged("density step produced non-finite samples")
    peak = float(np.max(values))
    if peak <= 0 or float(np.min(values)) < -NEGATIVITY_TOL * peak:
        raise NegativeDensity(
            f"density dipped to {float(np.min(values)):.3e} (peak {peak:.3e})")


class _QsePropagator:
    """Heun (explicit RK2) stepping with precomputed potential tables."""

    def __init__(self, grid: Grid1D, potential: PotentialSpec,
                 tp: TeleportationParams, params: PhysicalParams,
                 dt: float, thermal: bool, include_quantum: bool = True):
        bound = max_stable_dt(grid, tp, params, thermal=thermal)
        if dt > bound:
            raise DomainError(
                f"dt={dt:g} above the explicit stability bound {bound:g}")
        self.grid = grid
        self.tp = tp
        self.params = params
        self.dt = dt
        self.thermal = thermal
        self.include_quantum = include_quantum
        self.u = potential.build(grid, params).values
        # external force evaluated at the faces x_{j+1/2}
        face_grid = Grid1D(grid.length, grid.npoints,
                           origin=grid.origin + 0.5 * grid.dx)
        self.face_force = potential.force(face_grid, params)
        if thermal:
            if tp.kappa > 0 and tp.free_energy is None:
                raise DomainError("thermal teleportation needs a free energy")
        elif tp.kappa > 0 and tp.energy is None:
            raise DomainError("teleportation source needs an energy constant")

    def rhs(self, rho):
        tp, params = self.tp, self.params
        dx = self.grid.dx
        clipped = np.maximum(rho, 0.0)
        mobility = 0.5 * (clipped + np.roll(clipped, -1))
        face_flux = -mobility * self.face_force  # rho dU/dx at the faces
        if self.include_quantum:
            p_q, rho_q = _quantum_terms(rho, dx, params)
            face_flux = face_flux + (np.roll(p_q, -1) - p_q) / dx
        else:
            rho_q = np.zeros_like(rho)
        kt = params.k_boltzmann * tp.temperature
        if self.thermal and kt > 0:
            face_flux = face_flux + kt * (np.roll(rho, -1) - rho) / dx
        out = _face_divergence(face_flux, dx) / tp.friction
        if tp.kappa > 0:
            if self.thermal:
                safe = np.maximum(rho, DENSITY_FLOOR)
                entropy = np.where(rho > DENSITY_FLOOR,
                                   kt * rho * np.log(safe), 0.0)
                source = (rho * (tp.free_energy - self.u) - entropy - rho_q)
            else:
                source = rho * (tp.energy - self.u) - rho_q
            out = out + tp.kappa**2 * source / tp.friction
        return out

    def step(self, state: SmoluchowskiState) -> SmoluchowskiState:
        rho = state.rho.values
        k1 = self.rhs(rho)
        k2 = self.rhs(rho + self.dt * k1)
        new = rho + 0.5 * self.dt * (k1 + k2)
        _check_density(new)
        field = RealField(self.grid, np.maximum(new, 0.0))
        return SmoluchowskiState(rho=field, mass=integrate(field),
                                 time=state.time + self.dt)


def qse_propagator(grid: Grid1D, potential: PotentialSpec,
                   tp: TeleportationParams, params: PhysicalParams,
                   dt: float) -> _QsePropagator:
    """Reusable zero-temperature stepper."""
    return _QsePropagator(grid, potential, tp, params, dt, thermal=False)


def qse_thermal_propagator(grid: Grid1D, potential: PotentialSpec,
                           tp: TeleportationParams, params: PhysicalParams,
                           dt: float, include_quantum: bool = True) -> _QsePropagator:
    """Finite-temperature stepper; include_quantum=False is the classical
    toggle that suppresses the quantum pressure."""
    return _QsePropagator(grid, potential, tp, params, dt, thermal=True,
                          include_quantum=include_quantum)


def step_qse_teleport(state: SmoluchowskiState, potential: PotentialSpec,
                      tp: TeleportationParams, params: PhysicalParams,
                      dt: float) -> SmoluchowskiState:
    """One zero-temperature step; loops should reuse a qse_propagator."""
    return qse_propagator(state.rho.grid, potential, tp, params, dt).step(state)


def step_qse_thermal(state: SmoluchowskiState, potential: PotentialSpec,
                     tp: TeleportationParams, params: PhysicalParams,
                     dt: float, include_quantum: bool = True) -> SmoluchowskiState:
    """One thermal step; loops should reuse a qse_thermal_propagator."""
    prop = qse_thermal_propagator(state.rho.grid, potential, tp, params, dt,
                                  include_quantum=include_quantum)
    return prop.step(state)


def source_integral(state: SmoluchowskiState, potential: PotentialSpec,
                    tp: TeleportationParams, params: PhysicalParams) -> float:
    """Instantaneous mass production of the teleportation source."""
    grid = state.rho.grid
    rho = state.rho.values
    u = potential.build(grid, params).values
    _, rho_q = _quantum_terms(rho, grid.dx, params)
    vals = tp.kappa**2 * (rho * (tp.energy - u) - rho_q) / tp.friction
    return float(np.sum(vals)) * grid.dx


# --- Gaussian-ansatz dispersion laws ---

def _as_t_array(t):
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0):
        raise DomainError("time must be >= 0")
    return arr


def gaussian_dispersion_t37(t, tp: TeleportationParams,
                            params: PhysicalParams):
    """Zero-temperature dispersion: the root of
    s - (2/kappa^2) log(1 + s kappa^2/2) = hbar^2 kappa^2 t / (4 m b)."""
    if tp.kappa <= 0:
        raise DomainError("dispersion law needs kappa > 0; the kappa = 0 "
                          "limit is the bare square-root law")
    arr = _as_t_array(t)
    rhs = params.hbar**2 * tp.kappa**2 * arr / (4.0 * params.mass * tp.friction)
    roots = kernels.t37_roots(np.atleast_1d(rhs).astype(float), tp.kappa**2)
    return roots.reshape(arr.shape) if arr.shape else float(roots[0])


def gaussian_dispersion_t39(t, tp: TeleportationParams,
                            params: PhysicalParams):
    """Thermal dispersion root; well-posed iff kappa^2 lambda_T^2 < 2."""
    lam2 = thermal_de_broglie(tp, params) ** 2
    k2 = tp.kappa**2
    if k2 * lam2 >= 2.0:
        raise IllPosed(
            f"kappa^2 lambda_T^2 = {k2 * lam2:.6g} >= 2: the thermal "
            f"dispersion law has no root")
    arr = _as_t_array(t)
    d = einstein_diffusion(tp, params)
    rhs = (2.0 - k2 * lam2) * d * arr
    if k2 > 0:
        # the left side grows only logarithmically, so the root overflows
        # doubles once the target passes ~log(realmax) * slope
        cap = 690.0 * (2.0 / k2 - lam2)
        if np.any(rhs > cap):
            raise DomainError(
                "thermal dispersion exceeds the double-precision range at "
                "this time; the law is exponential in t here")
    roots = kernels.t39_roots(np.atleast_1d(rhs).astype(float), k2, lam2)
    return roots.reshape(arr.shape) if arr.shape else float(roots[0])


def high_temperature_dispersion_t40(t, tp: TeleportationParams,
                                    params: PhysicalParams):
    """High-temperature closed form (2/kappa^2)(exp(D kappa^2 t) - 1)."""
    if tp.kappa <= 0:
        raise DomainError("closed form needs kappa > 0")
    arr = _as_t_array(t)
    d = einstein_diffusion(tp, params)
    out = (2.0 / tp.kappa**2) * np.expm1(d * tp.kappa**2 * arr)
    return out if arr.shape else float(out)


def gaussian_ansatz_rate(sigma2, tp: TeleportationParams,
                         params: PhysicalParams):
    """d(sigma^2)/dt implied by the zero-temperature law:
    2 D_tel + hbar^2 / (2 m b sigma^2); the large-sigma limit is the
    linear-in-t slope and the small-sigma limit integrates to sqrt(t)."""
    arr = np.asarray(sigma2, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("dispersion must be positive")
    rate = (params.hbar**2 * tp.kappa**2 / (4.0 * params.mass * tp.friction)
            + params.hbar**2 / (2.0 * params.mass * tp.friction * arr))
    return rate if arr.shape else float(rate)


def dispersion_from_density(rho: RealField) -> float:
    """Second central moment of a density profile."""
    grid = rho.grid
    total = integrate(rho)
    if total <= 0:
        raise DomainError("empty density")
    mean = float(np.sum(grid.x * rho.values)) * grid.dx / total
    return float(np.sum((grid.x - mean) ** 2 * rho.values)) * grid.dx / total


def excess_kurtosis(rho: RealField) -> float:
    """Fourth-moment excess over the Gaussian value, for ansatz checks."""
    grid = rho.grid
    total = integrate(rho)
    mean = float(np.sum(grid.x * rho.values)) * grid.dx / total
    ctr = grid.x - mean
    m2 = float(np.sum(ctr**2 * rho.values)) * grid.dx / total
    m4 = float(np.sum(ctr**4 * rho.values)) * grid.dx / total
    return m4 / m2**2 - 3.0
