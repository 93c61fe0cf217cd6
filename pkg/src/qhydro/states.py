"""Initial-state builders used by tests and scenarios."""

import numpy as np

from .grid import ComplexField, Grid1D, PhysicalParams


def gaussian_packet(grid: Grid1D, sigma0: float, x_center: float = 0.0,
                    k0: float = 0.0) -> ComplexField:
    """Normalized Gaussian with position dispersion sigma0**2 at t=0.

    |psi|^2 = exp(-(x-xc)^2 / (2 sigma0^2)) / sqrt(2 pi sigma0^2); the
    optional plane-wave factor exp(i k0 x) boosts it to velocity hbar*k0/m.
    """
    x = grid.x
    amp = (2.0 * np.pi * sigma0**2) ** -0.25
    psi = amp * np.exp(-((x - x_center) ** 2) / (4.0 * sigma0**2) + 1j * k0 * x)
    return ComplexField(grid, psi)


def plane_wave(grid: Grid1D, mode: int, normalized: bool = True) -> ComplexField:
    """exp(i k x) with k = 2*pi*mode/L, exactly representable on the grid."""
    k = 2.0 * np.pi * mode / grid.length
    psi = np.exp(1j * k * grid.x)
    if normalized:
        psi = psi / np.sqrt(grid.length)
    return ComplexField(grid, psi)


def mode_wavenumber(grid: Grid1D, mode: int) -> float:
    return 2.0 * np.pi * mode / grid.length


def harmonic_ground_state(grid: Grid1D, params: PhysicalParams, omega: float,
                          x_center: float = 0.0) -> ComplexField:
    """Ground state of U = m omega^2 (x-xc)^2 / 2; displaced copies are
    coherent states."""
    a = params.mass * omega / params.hbar
    psi = (a / np.pi) ** 0.25 * np.exp(-0.5 * a * (grid.x - x_center) ** 2)
    return ComplexField(grid, psi.astype(complex))


def two_bump_superposition(grid: Grid1D, sigma0: float, separation: float) -> ComplexField:
    """Symmetric superposition of two displaced Gaussians, renormalized."""
    x = grid.x
    g = lambda c: np.exp(-((x - c) ** 2) / (4.0 * sigma0**2))
    psi = g(+0.5 * separation) + g(-0.5 * separation)
    nrm = np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    return ComplexField(grid, (psi / nrm).astype(complex))
