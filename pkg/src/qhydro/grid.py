"""Periodic 1D grid, spectral calculus, and field containers.

Everything downstream (wave solvers, hydrodynamic diagnostics, phase-space
transforms, density steppers) shares this module.  Differentiation is
spectral: exact for band-limited fields, and all scenarios keep their
support well inside the box so periodicity never contaminates results.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid x_j = x0 + j*dx, j = 0..N-1, with dx = L/N."""

    length: float
    npoints: int
    origin: float | None = None  # defaults to -L/2 (box centered at zero)

    def __post_init__(self):
        if self.length <= 0:
            raise DomainError(f"grid length must be positive, got {self.length}")
        if self.npoints < 8 or self.npoints % 2 != 0:
            raise DomainError(f"grid needs an even point count >= 8, got {self.npoints}")
        if self.origin is None:
            object.__setattr__(self, "origin", -0.5 * self.length)

    @property
    def dx(self):
        return self.length / self.npoints

    @cached_property
    def x(self):
        return self.origin + self.dx * np.arange(self.npoints)

    @cached_property
    def k(self):
        """DFT wavenumbers, 2*pi*j/L for j <= N/2, negative branch after."""
        return 2.0 * np.pi * np.fft.fftfreq(self.npoints, d=self.dx)

    @cached_property
    def k_odd(self):
        """Wavenumbers for odd-order derivatives: Nyquist mode zeroed.

        The Nyquist component of a real field has no well-defined first
        derivative sign; zeroing it keeps gradient(real) real.
        """
        k = self.k.copy()
        k[self.npoints // 2] = 0.0
        return k


def _check_finite(values, what):
    if not np.all(np.isfinite(values)):
        raise DomainError(f"{what} contains non-finite samples")


#: Densities below this are treated as vacuum by logarithmic and divided
#: quantities.
DENSITY_FLOOR = 1e-30

#: A floored region whose neighborhood carries more than this fraction of
#: the total mass is reported instead of silently clamped.
NODE_MASS_TOLERANCE = 1e-9


def node_guard(floored, mass_weights):
    """Raise NodeEncountered when a floored region sits inside occupied
    territory.

    The corruption of logs and divided quantities spreads to the floored
    points' neighbors, so the test is the mass carried by the floored set
    plus its one-point neighborhood.  Far-tail regions pass (callers clamp
    them); interior nodes report.
    """
    from .errors import NodeEncountered

    if not floored.any():
        return floored
    w = np.asarray(mass_weights)
    total = float(np.sum(w))
    neighborhood = floored | np.roll(floored, 1) | np.roll(floored, -1)
    if total <= 0.0 or float(np.sum(w[neighborhood])) > NODE_MASS_TOLERANCE * total:
        # report the floored point with the heaviest surroundings
        local = w + np.roll(w, 1) + np.roll(w, -1)
        candidates = np.where(floored, local, -1.0)
        raise NodeEncountered(int(np.argmax(candidates)))
    return floored


@dataclass(frozen=True)
class RealField:
    grid: Grid1D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.npoints,):
            raise DomainError(
                f"field has {v.shape} samples, grid expects ({self.grid.npoints},)"
            )
        _check_finite(v, "RealField")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class ComplexField:
    grid: Grid1D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.npoints,):
            raise DomainError(
                f"field has {v.shape} samples, grid expects ({self.grid.npoints},)"
            )
        _check_finite(v, "ComplexField")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class PhysicalParams:
    """Fundamental constants of a scenario.

    The quantum diffusion scale hbar/2m is the magnitude of the imaginary
    diffusion coefficient; the complex dilatational viscosity combines it
    with the classical self-diffusion coefficient D.
    """

    hbar: float = 1.0
    mass: float = 1.0
    diffusion: float = 0.0
    k_boltzmann: float = 1.0

    def __post_init__(self):
        if self.hbar <= 0:
            raise DomainError("hbar must be positive")
        if self.mass <= 0:
            raise DomainError("mass must be positive")
        if self.diffusion < 0:
            raise DomainError("classical diffusion coefficient must be >= 0")

    @property
    def quantum_diffusion_scale(self):
        return self.hbar / (2.0 * self.mass)

    @property
    def dilatational_viscosity(self):
        return complex(self.diffusion, self.quantum_diffusion_scale)


# --- array-level spectral calculus (hot paths use these directly) ---

def gradient_array(grid, values):
    _check_finite(values, "gradient input")
    spec = np.fft.fft(values)
    out = np.fft.ifft(1j * grid.k_odd * spec)
    if np.isrealobj(values):
        return out.real
    return out


def laplacian_array(grid, values):
    _check_finite(values, "laplacian input")
    spec = np.fft.fft(values)
    out = np.fft.ifft(-(grid.k**2) * spec)
    if np.isrealobj(values):
        return out.real
    return out


def integrate_array(grid, values):
    _check_finite(values, "integrate input")
    return float(np.sum(values)) * grid.dx if np.isrealobj(values) else complex(
        np.sum(values) * grid.dx
    )


# --- field-level operations ---

def _same_kind(f, values):
    return type(f)(f.grid, values)


def gradient(f):
    """Spectral derivative; exact for band-limited fields."""
    return _same_kind(f, gradient_array(f.grid, f.values))


def laplacian(f):
    return _same_kind(f, laplacian_array(f.grid, f.values))


def integrate(f: RealField) -> float:
    """Rectangle rule; on a periodic grid this is the trapezoid rule."""
    return float(np.sum(f.values)) * f.grid.dx


def norm_squared(psi: ComplexField) -> float:
    return float(np.sum(np.abs(psi.values) ** 2)) * psi.grid.dx
