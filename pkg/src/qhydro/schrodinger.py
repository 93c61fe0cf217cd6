"""Time propagation of a wavefunction on the periodic grid.

Three flows share one Strang splitting (half potential phase, full kinetic
multiplier in spectral space, half potential phase):

* unitary: the standard kinetic multiplier exp(-i hbar k^2 dt / 2m);
* diffusive linear: kinetic multiplier exp[(-i hbar/2m - D) k^2 dt], which
  damps instead of conserving the norm;
* nonlinear (density-diffusion): linear unitary half-steps around an
  explicit midpoint update of the mass-conserving diffusion term
  D * div(conj(psi) grad psi) / conj(psi).

The nonlinear flow conserves total mass because its density obeys a pure
diffusion law whose flux telescopes on a periodic grid.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, StepDiverged
from .grid import (ComplexField, Grid1D, PhysicalParams, RealField,
                   gradient_array, integrate_array, node_guard, norm_squared)

NORM_WARN_TOLERANCE = 1e-6
NODE_FLOOR = 1e-30
#: the divided nonlinear term is evaluated only where the amplitude clears
#: this fraction of its peak; outside, empty space diffuses nothing
TAIL_MASK_REL = 1e-12


@dataclass(frozen=True)
class EvolutionConfig:
    """Step size, count, method tag, and snapshot stride for a run."""

    dt: float
    steps: int
    method: str = "unitary"  # unitary | diffusive_linear | doebner_goldin
    snapshot_stride: int = 1

    _METHODS = ("unitary", "diffusive_linear", "doebner_goldin")

    def __post_init__(self):
        if self.dt <= 0:
            raise DomainError("dt must be positive")
        if self.steps < 0:
            raise DomainError("step count must be >= 0")
        if self.method not in self._METHODS:
            raise DomainError(f"unknown method {self.method!r}")
        if self.snapshot_stride < 1:
            raise DomainError("snapshot stride must be >= 1")

    def stability_ratio(self, grid: Grid1D, params: PhysicalParams,
                        diffusion: float = 0.0) -> float:
        """dt * max(k^2) * (hbar/2m + D); recorded, not enforced for the
        unconditionally stable linear splittings."""
        kmax2 = float(np.max(grid.k**2))
        return self.dt * kmax2 * (params.quantum_diffusion_scale + diffusion)


@dataclass(frozen=True)
class PotentialSpec:
    """External potential: zero, linear slope, harmonic well, or a table."""

    kind: str = "zero"  # zero | linear | harmonic | tabulated
    omega: float = 1.0
    center: float = 0.0
    slope: float = 0.0
    table: RealField | None = None

    def __post_init__(self):
        if self.kind not in ("zero", "linear", "harmonic", "tabulated"):
            raise DomainError(f"unknown potential kind {self.kind!r}")
        if self.kind == "tabulated" and self.table is None:
            raise DomainError("tabulated potential needs a table")

    def build(self, grid: Grid1D, params: PhysicalParams) -> RealField:
        if self.kind == "zero":
            return RealField(grid, np.zeros(grid.npoints))
        if self.kind == "linear":
            return RealField(grid, self.slope * (grid.x - self.center))
        if self.kind == "harmonic":
            u = 0.5 * params.mass * self.omega**2 * (grid.x - self.center) ** 2
            return RealField(grid, u)
        if self.table.grid != grid:
            raise DomainError("tabulated potential grid mismatch")
        return self.table

    def force(self, grid: Grid1D, params: PhysicalParams) -> np.ndarray:
        """-dU/dx, analytic for the quadratic kinds."""
        if self.kind == "zero":
            return np.zeros(grid.npoints)
        if self.kind == "linear":
            return np.full(grid.npoints, -self.slope)
        if self.kind == "harmonic":
            return -params.mass * self.omega**2 * (grid.x - self.center)
        return -gradient_array(grid, self.table.values)


def _check_step_output(values):
    if not np.all(np.isfinite(values)):
        raise StepDiverged("step produced non-finite samples")


def _warn_if_unnormalized(psi):
    nrm = norm_squared(psi)
    if abs(nrm - 1.0) > NORM_WARN_TOLERANCE:
        warnings.warn(f"initial norm^2 deviates from 1 by {nrm - 1.0:.3e}",
                      stacklevel=3)


def _kinetic_multiplier(grid, params, dt, diffusion=0.0):
    return np.exp((-1j * params.quantum_diffusion_scale - diffusion) * grid.k**2 * dt)


def _strang_step(grid, values, potential, params, dt, diffusion=0.0):
    half = np.exp(-0.5j * potential.values * dt / params.hbar)
    kin = _kinetic_multiplier(grid, params, dt, diffusion)
    out = half * np.fft.ifft(kin * np.fft.fft(half * values))
    _check_step_output(out)
    return out


def step_unitary(psi: ComplexField, potential: RealField,
                 params: PhysicalParams, dt: float) -> ComplexField:
    """One Strang step of the unitary flow; norm-conserving."""
    _warn_if_unnormalized(psi)
    return ComplexField(psi.grid, _strang_step(psi.grid, psi.values, potential, params, dt))


def step_diffusive_linear(psi: ComplexField, potential: RealField,
                          diffusion: float, params: PhysicalParams,
                          dt: float) -> ComplexField:
    """One Strang step of the linearized diffusive flow; the norm is left
    to decay (that decay is the physical content of the equation)."""
    out = _strang_step(psi.grid, psi.values, potential, params, dt, diffusion)
    return ComplexField(psi.grid, out)


def _density_diffusion_rhs(grid, values, diffusion):
    """D * div(conj(psi) grad psi) / conj(psi), the mass-conserving form
    of the nonlinear diffusion term.

    The division is pointwise and never differentiated afterwards, so
    masking the far tail (where the quotient is pure noise) is safe and
    costs only an exponentially small mass defect.
    """
    conj = np.conj(values)
    flux = conj * gradient_array(grid, values)
    num = diffusion * gradient_array(grid, flux)
    amp = np.abs(values)
    bulk = amp > TAIL_MASK_REL * np.max(amp)
    out = np.zeros_like(values)
    np.divide(num, conj, out=out, where=bulk)
    return out


def step_doebner_goldin(psi: ComplexField, potential: RealField,
                        diffusion: float, params: PhysicalParams,
                        dt: float) -> ComplexField:
    """Strang composition: unitary half-steps around an explicit midpoint
    (RK2) update of the nonlinear density-diffusion term.

    Requires a node-free state and dt below 0.1 dx^2 / D.
    """
    grid = psi.grid
    if diffusion > 0 and dt > 0.1 * grid.dx**2 / diffusion:
        raise DomainError(
            f"dt={dt:g} above the nonlinear bound {0.1 * grid.dx**2 / diffusion:g}"
        )
    amp = np.abs(psi.values)
    node_guard(amp < NODE_FLOOR, amp**2)

    if diffusion == 0.0:  # exact reduction to the unitary stepper
        return ComplexField(grid, _strang_step(grid, psi.values, potential, params, dt))

    v = _strang_step(grid, psi.values, potential, params, 0.5 * dt)
    k1 = _density_diffusion_rhs(grid, v, diffusion)
    half_point = v + 0.5 * dt * k1
    k2 = _density_diffusion_rhs(grid, half_point, diffusion)
    v = v + dt * k2
    _check_step_output(v)
    v = _strang_step(grid, v, potential, params, 0.5 * dt)
    return ComplexField(grid, v)


def expectation_energy(psi: ComplexField, potential: RealField,
                       params: PhysicalParams) -> float:
    """<H> = int[(hbar^2/2m)|grad psi|^2 + U |psi|^2] dx / int |psi|^2 dx."""
    grid = psi.grid
    dpsi = gradient_array(grid, psi.values)
    kinetic = (params.hbar**2 / (2.0 * params.mass)) * np.abs(dpsi) ** 2
    dens = np.abs(psi.values) ** 2
    num = float(np.sum(kinetic + potential.values * dens)) * grid.dx
    return num / norm_squared(psi)


def diffusive_term_expectation(psi: ComplexField, diffusion: float,
                               params: PhysicalParams) -> complex:
    """Expectation of the added diffusion term: i hbar D times the integral
    of a total divergence, hence zero on the periodic grid."""
    grid = psi.grid
    flux = np.conj(psi.values) * gradient_array(grid, psi.values)
    div = gradient_array(grid, flux)
    return 1j * params.hbar * diffusion * integrate_array(grid, div)
