"""Discrete phase-space quasi-distribution and its dynamics.

The transform correlates psi against itself at half-grid shifts (band-
limited interpolation supplies the half points), then DFTs the shift
variable.  The momentum grid is fixed by DFT duality, dp = 2*pi*hbar/L
with as many momentum points as spatial ones, which makes both marginal
identities exact at the discrete level.

Sign convention: a plane wave exp(i k0 x) must concentrate at p = +hbar*k0
and the current must reproduce the hydrodynamic velocity, which fixes the
phase sign of the shift DFT; the marginal checks in the tests certify the
choice.

Evolution is restricted to at-most-quadratic potentials, where the quantum
phase-space bracket reduces exactly to the classical one, so free shear
plus momentum kicks (both spectral shifts) integrate it without further
approximation; coordinate diffusion enters as a spectral multiplier.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError, TransformInconsistent, UnsupportedPotential
from .grid import (DENSITY_FLOOR, ComplexField, Grid1D, PhysicalParams,
                   RealField, laplacian_array, node_guard, norm_squared)
from .schrodinger import PotentialSpec

#: transforms with a larger relative imaginary residue raise
IMAG_RESIDUE_LIMIT = 1e-8


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Spatial grid plus its DFT-dual momentum grid (ascending order)."""

    spatial: Grid1D
    hbar: float = 1.0

    @property
    def n_momentum(self):
        return self.spatial.npoints

    @property
    def dp(self):
        return 2.0 * np.pi * self.hbar / self.spatial.length

    @property
    def p(self):
        n = self.spatial.npoints
        return self.dp * (np.arange(n) - n // 2)

    def __post_init__(self):
        # discrete Fourier pairing: dp*dx*N = 2*pi*hbar
        assert abs(self.dp * self.spatial.dx * self.spatial.npoints
                   - 2.0 * np.pi * self.hbar) < 1e-12 * self.hbar


@dataclass(frozen=True)
class WignerFunction:
    """Real phase-space samples f[x_j, p_l] with p ascending."""

    phase_grid: PhaseSpaceGrid
    values: np.ndarray = field(repr=False)
    imag_residue: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        n = self.phase_grid.spatial.npoints
        if v.shape != (n, self.phase_grid.n_momentum):
            raise DomainError("Wigner samples shaped off the phase-space grid")
        object.__setattr__(self, "values", v)

    def total(self):
        g = self.phase_grid
        return float(np.sum(self.values)) * g.spatial.dx * g.dp


def _half_shifted(psi_values, grid):
    """psi interpolated to x + dx/2, exact for band-limited states."""
    shift = np.exp(1j * grid.k * grid.dx / 2.0)
    return np.fft.ifft(shift * np.fft.fft(psi_values))


def wigner_transform(psi: ComplexField, params: PhysicalParams) -> WignerFunction:
    """Quasi-distribution of psi over (x, p).

    Normalized so the position marginal integrates |psi|^2 exactly and a
    normalized state has unit phase-space integral.  The imaginary residue
    of the shift DFT is verified small, recorded, and discarded.
    """
    grid = psi.grid
    nrm = norm_squared(psi)
    if abs(nrm - 1.0) > 1e-6:
        warnings.warn(f"norm^2 deviates from 1 by {nrm - 1.0:.3e}", stacklevel=2)

    psi_half = _half_shifted(psi.values, grid)
    corr = kernels.wigner_correlation(np.ascontiguousarray(psi.values),
                                      np.ascontiguousarray(psi_half))
    # f[j, l] = (dq / 2 pi) sum_n corr[j, n] e^{-i 2 pi l n / N}, dq = dx/hbar
    f = (grid.dx / (2.0 * np.pi * params.hbar)) * np.fft.fft(corr, axis=1)

    re = np.real(f)
    residue = float(np.max(np.abs(np.imag(f))) / max(np.max(np.abs(re)), 1e-300))
    if residue > IMAG_RESIDUE_LIMIT:
        raise TransformInconsistent(f"imaginary residue {residue:.3e}")

    phase_grid = PhaseSpaceGrid(grid, params.hbar)
    values = np.fft.fftshift(re, axes=1)  # momentum ascending
    return WignerFunction(phase_grid, values, imag_residue=residue)


def marginal_position(f: WignerFunction, params: PhysicalParams) -> RealField:
    """rho(x) = m * sum_p f dp; equals m |psi|^2 to spectral accuracy."""
    g = f.phase_grid
    vals = params.mass * np.sum(f.values, axis=1) * g.dp
    return RealField(g.spatial, vals)


def marginal_momentum(f: WignerFunction) -> np.ndarray:
    """g(p) = sum_x f dx on the ascending momentum grid.

    Matches |phi(p)|^2 for the unit-normalized momentum wavefunction
    phi(p) = int psi(x) exp(-i p x / hbar) dx / sqrt(2 pi hbar).
    """
    return np.sum(f.values, axis=0) * f.phase_grid.spatial.dx


def momentum_wavefunction_density(psi: ComplexField, params: PhysicalParams) -> np.ndarray:
    """|phi(p)|^2 on the ascending momentum grid, the marginal's oracle."""
    grid = psi.grid
    # phi(p_l) = dx * sum_j psi_j e^{-i k_l x_j} / sqrt(2 pi hbar)
    phases = np.exp(-1j * np.outer(grid.k, grid.x))
    phi = grid.dx * phases @ psi.values / np.sqrt(2.0 * np.pi * params.hbar)
    return np.fft.fftshift(np.abs(phi) ** 2)


def current_velocity(f: WignerFunction, rho: RealField) -> RealField:
    """V(x) = int p f dp / rho(x), masked to zero where rho is floored."""
    g = f.phase_grid
    mom = np.sum(f.values * g.p[None, :], axis=1) * g.dp
    r = rho.values
    bulk = r > DENSITY_FLOOR
    out = np.zeros_like(r)
    np.divide(mom, r, out=out, where=bulk)
    return RealField(g.spatial, out)


class LiouvillePropagator:
    """Strang-split phase-space evolution for at-most-quadratic potentials.

    Per step: half free shear, full momentum kick, half free shear, then
    the coordinate-diffusion multiplier.  Shear and kick are exact spectral
    shifts; for a quadratic well the composition is the standard second-
    order rotation splitting.
    """

    def __init__(self, phase_grid: PhaseSpaceGrid, potential: PotentialSpec,
                 diffusion: float, params: PhysicalParams, dt: float):
        if potential.kind not in ("zero", "linear", "harmonic"):
            raise UnsupportedPotential(
                f"phase-space evolution supports at most quadratic wells, "
                f"got {potential.kind!r}")
        self.phase_grid = phase_grid
        self.dt = dt
        grid = phase_grid.spatial
        kx = grid.k
        p = phase_grid.p
        # x -> x + (p/m) dt/2 : multiply x-spectrum by exp(-i kx p dt / 2m)
        self._shear_half = np.exp(-1j * np.outer(kx, p) * dt / (2.0 * params.mass))
        # p -> p + force dt : multiply p-spectrum by exp(-i eta force dt)
        force = potential.force(grid, params)
        eta = 2.0 * np.pi * np.fft.fftfreq(phase_grid.n_momentum, d=phase_grid.dp)
        self._kick = np.exp(-1j * np.outer(force, eta) * dt)
        self._diffuse = (np.exp(-diffusion * kx**2 * dt)[:, None]
                         if diffusion > 0 else None)

    def _shear(self, vals):
        return np.fft.ifft(self._shear_half * np.fft.fft(vals, axis=0), axis=0)

    def _apply_kick(self, vals):
        spec = np.fft.fft(np.fft.ifftshift(vals, axes=1), axis=1)
        return np.fft.fftshift(np.fft.ifft(self._kick * spec, axis=1), axes=1)

    def step(self, f: WignerFunction) -> WignerFunction:
        vals = f.values.astype(complex)
        vals = self._shear(vals)
        vals = self._apply_kick(vals)
        vals = self._shear(vals)
        if self._diffuse is not None:
            vals = np.fft.ifft(self._diffuse * np.fft.fft(vals, axis=0), axis=0)
        out = np.real(vals)
        if not np.all(np.isfinite(out)):
            raise DomainError("phase-space step produced non-finite samples")
        return WignerFunction(f.phase_grid, out, imag_residue=f.imag_residue)


def wigner_liouville_step(f: WignerFunction, potential: PotentialSpec,
                          diffusion: float, params: PhysicalParams,
                          dt: float) -> WignerFunction:
    """Single step; loops should build one LiouvillePropagator and reuse it."""
    prop = LiouvillePropagator(f.phase_grid, potential, diffusion, params, dt)
    return prop.step(f)


def infer_potential(psi: ComplexField, psi_dot: ComplexField,
                    params: PhysicalParams):
    """Reconstruct U from one state and its time derivative.

    U = Re[(i hbar psi_dot + (hbar^2/2m) lap psi) / psi]; the imaginary
    part's magnitude is returned as a residual that certifies (near zero)
    or refutes (large) that psi obeys a wave equation of this family.
    """
    grid = psi.grid
    amp2 = np.abs(psi.values) ** 2
    node_guard(amp2 < DENSITY_FLOOR, amp2)
    num = (1j * params.hbar * psi_dot.values
           + (params.hbar**2 / (2.0 * params.mass)) * laplacian_array(grid, psi.values))
    bulk = amp2 > DENSITY_FLOOR
    ratio = np.zeros_like(num)
    np.divide(num, psi.values, out=ratio, where=bulk)
    occupied = amp2 > 1e-6 * np.max(amp2)
    residual = float(np.max(np.abs(ratio.imag[occupied])))
    return RealField(grid, ratio.real), residual
