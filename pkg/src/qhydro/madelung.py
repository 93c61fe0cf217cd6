"""Hydrodynamic image of a wavefunction.

Density, complex action, complex velocity, quantum potential, the osmotic
closure of the velocity field, the effective diffusion coefficient and its
uncertainty-principle minimum, the surface-tension shift, and residual
diagnostics for the continuity and momentum balances.

Sign conventions: the squared quantum diffusion scale enters as the
negative real number -(hbar/2m)^2 wherever a formula carries the square of
the imaginary diffusion coefficient.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .grid import (DENSITY_FLOOR, ComplexField, PhysicalParams, RealField,
                   gradient_array, laplacian_array, node_guard)


@dataclass(frozen=True)
class HydroFields:
    """Madelung image of a wavefunction: density, velocity, osmotic
    velocity, quantum potential, and the two action components."""

    rho: RealField
    velocity: RealField
    osmotic: RealField
    quantum_potential: RealField
    action_re: RealField
    action_im: RealField


def density(psi: ComplexField, params: PhysicalParams) -> RealField:
    """rho = m |psi|^2."""
    return RealField(psi.grid, params.mass * np.abs(psi.values) ** 2)


def eikonal_action(psi: ComplexField, params: PhysicalParams,
                   amplitude_floor: float = 1e-30):
    """Split psi = exp(i S / hbar) into (S_re, S_im).

    S_im = -hbar log|psi|.  S_re is hbar times the unwrapped phase: 1D
    cumulative unwrapping with jumps beyond pi folded, gauged so that
    S_re at the first grid point lies in (-pi*hbar, pi*hbar].
    """
    amp = np.abs(psi.values)
    node_guard(amp < amplitude_floor, amp**2)
    # below-floor points are negligible by the guard; clamp keeps log finite
    s_im = -params.hbar * np.log(np.maximum(amp, 1e-300))
    phase = np.unwrap(np.angle(psi.values))
    s_re = params.hbar * phase
    return RealField(psi.grid, s_re), RealField(psi.grid, s_im)


def complex_velocity(psi: ComplexField, params: PhysicalParams):
    """W = grad(S)/m as (W_re, W_im).

    W_re = (hbar/m) Im(conj(psi) grad psi) / |psi|^2 is the hydrodynamic
    velocity; W_im = -(hbar/2m) grad(rho)/rho is the osmotic part.
    """
    grid = psi.grid
    rho_u = np.abs(psi.values) ** 2
    node_guard(rho_u < DENSITY_FLOOR, rho_u)
    safe = np.maximum(rho_u, DENSITY_FLOOR)
    dpsi = gradient_array(grid, psi.values)
    w_re = (params.hbar / params.mass) * np.imag(np.conj(psi.values) * dpsi) / safe
    w_im = -(params.hbar / (2.0 * params.mass)) * gradient_array(grid, rho_u) / safe
    return RealField(grid, w_re), RealField(grid, w_im)


def quantum_potential(rho: RealField, params: PhysicalParams,
                      floor: float = DENSITY_FLOOR) -> RealField:
    """Q = -(hbar^2/2m) lap(sqrt(rho)) / sqrt(rho), evaluated where
    rho clears the floor; floored points inherit a clamped denominator."""
    r = rho.values
    if np.any(r < 0):
        raise DomainError("quantum_potential needs rho >= 0")
    node_guard(r < floor, r)
    s = np.sqrt(np.maximum(r, 0.0))
    lap_s = laplacian_array(rho.grid, s)
    denom = np.maximum(s, np.sqrt(floor))
    q = -(params.hbar**2 / (2.0 * params.mass)) * lap_s / denom
    return RealField(rho.grid, q)


def quantum_pressure(rho: RealField, params: PhysicalParams) -> RealField:
    """P such that rho * grad(Q) = grad(P), with no division anywhere.

    P = (hbar^2/2m) [(d sqrt(rho)/dx)^2 - sqrt(rho) d2 sqrt(rho)/dx2].
    Built from smooth fields only, so it can be differentiated spectrally
    without tail garbage; this is how solvers should apply the quantum
    force.
    """
    s = np.sqrt(np.maximum(rho.values, 0.0))
    s1 = gradient_array(rho.grid, s)
    s2 = laplacian_array(rho.grid, s)
    p = (params.hbar**2 / (2.0 * params.mass)) * (s1**2 - s * s2)
    return RealField(rho.grid, p)


def effective_diffusion(diffusion: float, params: PhysicalParams) -> float:
    """D + hbar^2/(4 m^2 D): classical plus quantum diffusion, minimized
    at D = hbar/2m with value hbar/m."""
    if diffusion <= 0:
        raise DomainError("effective diffusion needs D > 0")
    return diffusion + params.hbar**2 / (4.0 * params.mass**2 * diffusion)


def osmotic_real_velocity(rho: RealField, diffusion: float,
                          params: PhysicalParams) -> RealField:
    """V = -(hbar^2 / (4 m^2 D)) grad(log rho): the osmotic closure of the
    real velocity in the flat-distribution regime."""
    if diffusion <= 0:
        raise DomainError("osmotic velocity needs D > 0")
    r = rho.values
    node_guard(r < DENSITY_FLOOR, r)
    grad_log = gradient_array(rho.grid, r) / np.maximum(r, DENSITY_FLOOR)
    coeff = -(params.hbar**2) / (4.0 * params.mass**2 * diffusion)
    return RealField(rho.grid, coeff * grad_log)


def marangoni_delta_sigma(rho: RealField, index: int,
                          params: PhysicalParams) -> float:
    """Surface-tension shift -(hbar/2m)^2 * d(rho)/dx at one grid index."""
    n = rho.grid.npoints
    if not (0 <= index < n):
        raise IndexError(f"index {index} outside grid of {n} points")
    grad_rho = gradient_array(rho.grid, rho.values)
    return float(-(params.hbar**2) / (4.0 * params.mass**2) * grad_rho[index])


def continuity_residual(rho_t: RealField, rho: RealField,
                        velocity: RealField) -> RealField:
    """r = d(rho)/dt + grad(rho V); near zero along unitary evolution."""
    if not (rho_t.grid == rho.grid == velocity.grid):
        raise DomainError("continuity residual needs one shared grid")
    flux_div = gradient_array(rho.grid, rho.values * velocity.values)
    return RealField(rho.grid, rho_t.values + flux_div)


def navier_stokes_residual(psi_series, potential, xi_re: float,
                           params: PhysicalParams, dt: float):
    """Momentum and mass balance residuals from three consecutive snapshots.

    psi_series = (psi(t-dt), psi(t), psi(t+dt)); potential is a
    PotentialSpec so the external force comes from its analytic derivative
    (a harmonic well is not periodic, so differentiating its table
    spectrally would ring).  Returns the residual of the real momentum
    equation

        dV/dt + V dV/dx + d(U+Q)/dx / m - xi_re * d2V/dx2

    and of the mass balance with its diffusion term

        d(rho)/dt + d(rho V)/dx - xi_re * d2(rho)/dx2

    both of which vanish (to differencing error) for unitary evolution
    with xi_re = 0.
    """
    psi_m, psi_0, psi_p = psi_series
    grid = psi_0.grid
    if psi_m.grid != grid or psi_p.grid != grid:
        raise DomainError("snapshots must share one grid")

    v_m, _ = complex_velocity(psi_m, params)
    v_0, _ = complex_velocity(psi_0, params)
    v_p, _ = complex_velocity(psi_p, params)
    rho_m = density(psi_m, params)
    rho_0 = density(psi_0, params)
    rho_p = density(psi_p, params)

    dv_dt = (v_p.values - v_m.values) / (2.0 * dt)
    drho_dt = (rho_p.values - rho_m.values) / (2.0 * dt)

    # Derivatives of V are taken through the smooth mass flux rho*V =
    # hbar*Im(conj(psi) grad psi): the clamped V itself carries far-tail
    # garbage that a global spectral derivative would smear everywhere.
    flux = params.hbar * np.imag(np.conj(psi_0.values)
                                 * gradient_array(grid, psi_0.values))
    safe_rho = np.maximum(rho_0.values, DENSITY_FLOOR)
    grad_rho = gradient_array(grid, rho_0.values)
    grad_v = (gradient_array(grid, flux) - v_0.values * grad_rho) / safe_rho

    # same story for grad(Q): the pressure identity keeps the bulk clean
    p_q = quantum_pressure(rho_0, params)
    grad_q = gradient_array(grid, p_q.values) / safe_rho
    grad_u = -potential.force(grid, params)
    force = (grad_u + grad_q) / params.mass

    if xi_re != 0.0:
        bulk = rho_0.values > 1e-12 * np.max(rho_0.values)
        visc = xi_re * gradient_array(grid, np.where(bulk, grad_v, 0.0))
    else:
        visc = 0.0
    res_momentum = dv_dt + v_0.values * grad_v + force - visc

    flux_div = gradient_array(grid, flux)
    diff = xi_re * laplacian_array(grid, rho_0.values)
    res_mass = drho_dt + flux_div - diff

    return RealField(grid, res_momentum), RealField(grid, res_mass)


def hydro_fields(psi: ComplexField, params: PhysicalParams,
                 diffusion: float | None = None) -> HydroFields:
    """Bundle the full Madelung image of psi."""
    rho = density(psi, params)
    w_re, w_im = complex_velocity(psi, params)
    s_re, s_im = eikonal_action(psi, params)
    q = quantum_potential(rho, params)
    osm = RealField(psi.grid, -w_im.values)
    return HydroFields(rho=rho, velocity=w_re, osmotic=osm,
                       quantum_potential=q, action_re=s_re, action_im=s_im)
