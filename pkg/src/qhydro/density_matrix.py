"""Finite-basis density-matrix evolution and ergodic averaging.

Closed evolution rotates each element by its Bohr frequency; the finite
time average damps off-diagonal elements like 1/tau and projects onto
energy blocks in the long-time limit.  The diffusion-augmented master
equation adds an anticommutator sink in p^2, which leaks trace at the
rate 2 D <p^2> / hbar^2 (only the sink half of the full dissipator is
kept, so the decay is asserted, not repaired).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, StepDiverged

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10


@dataclass(frozen=True)
class EnergySpectrum:
    """Sorted energy eigenvalues with a numerical degeneracy notion."""

    energies: np.ndarray = field(repr=False)
    tol_degeneracy: float | None = None  # default 1e-9 * spectral range

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        if e.ndim != 1 or e.size < 1:
            raise DomainError("spectrum needs a 1D list of eigenvalues")
        if np.any(np.diff(e) < 0):
            raise DomainError("eigenvalues must be sorted ascending")
        object.__setattr__(self, "energies", e)
        if self.tol_degeneracy is None:
            span = float(e[-1] - e[0]) if e.size > 1 else 1.0
            object.__setattr__(self, "tol_degeneracy", 1e-9 * max(span, 1e-300))

    @property
    def dim(self):
        return self.energies.size

    def bohr_frequencies(self, hbar):
        e = self.energies
        return (e[:, None] - e[None, :]) / hbar

    def degeneracy_mask(self):
        """True where |E_k - E_n| < tol, the elements the ergodic limit keeps."""
        e = self.energies
        return np.abs(e[:, None] - e[None, :]) < self.tol_degeneracy


def _as_matrix(rho):
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian unit-trace PSD matrix; validation applies to constructed
    states, not to evolved outputs whose trace may legitimately decay."""

    matrix: np.ndarray = field(repr=False)
    require_state: bool = True

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError("density matrix must be square")
        if self.require_state:
            if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
                raise DomainError("density matrix must be Hermitian")
            if abs(np.trace(m).real - 1.0) > TRACE_TOL:
                raise DomainError("density matrix must have unit trace")
            if np.min(np.linalg.eigvalsh(m)) < -PSD_TOL:
                raise DomainError("density matrix must be positive semidefinite")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self):
        return self.matrix.shape[0]


def evolve_energy_basis(rho0, spectrum: EnergySpectrum, t: float,
                        hbar: float = 1.0) -> np.ndarray:
    """Element phases exp(-i (E_k - E_n) t / hbar); diagonal invariant."""
    m = _as_matrix(rho0)
    if m.shape[0] != spectrum.dim:
        raise DomainError("density matrix and spectrum dimensions differ")
    phases = np.exp(-1j * spectrum.bohr_frequencies(hbar) * t)
    return phases * m


def _average_factor(omega_tau):
    """(1 - exp(-i w tau)) / (i w tau), elementwise and safe at w = 0."""
    out = np.ones_like(omega_tau, dtype=complex)
    big = np.abs(omega_tau) > 1e-8
    wt = omega_tau[big]
    out[big] = (1.0 - np.exp(-1j * wt)) / (1j * wt)
    return out


def time_average(rho0, spectrum: EnergySpectrum, tau: float,
                 hbar: float = 1.0, quadrature_steps: int | None = None) -> np.ndarray:
    """(1/tau) integral of the evolved matrix over [0, tau].

    Closed form per element by default; pass quadrature_steps for the
    trapezoid cross-check path.
    """
    if tau <= 0:
        raise DomainError("averaging window must be positive")
    m = _as_matrix(rho0)
    if m.shape[0] != spectrum.dim:
        raise DomainError("density matrix and spectrum dimensions differ")
    if quadrature_steps is not None:
        ts = np.linspace(0.0, tau, quadrature_steps + 1)
        acc = np.zeros_like(m)
        for i, t in enumerate(ts):
            w = 0.5 if i in (0, len(ts) - 1) else 1.0
            acc = acc + w * evolve_energy_basis(m, spectrum, t, hbar)
        return acc / quadrature_steps
    factor = _average_factor(spectrum.bohr_frequencies(hbar) * tau)
    return factor * m


def ergodic_limit(rho0, spectrum: EnergySpectrum) -> np.ndarray:
    """Projection onto energy blocks: exact diagonal for nondegenerate
    spectra, block-diagonal where eigenvalues coincide within tolerance."""
    m = _as_matrix(rho0)
    if m.shape[0] != spectrum.dim:
        raise DomainError("density matrix and spectrum dimensions differ")
    return np.where(spectrum.degeneracy_mask(), m, 0.0)


def offdiagonal_norm(matrix) -> float:
    """Frobenius norm of the off-diagonal part."""
    m = _as_matrix(matrix)
    off = m - np.diag(np.diag(m))
    return float(np.linalg.norm(off))


def _check_hermitian(m, what):
    scale = max(float(np.max(np.abs(m))), 1e-300)
    if np.max(np.abs(m - m.conj().T)) > 1e-10 * scale:
        raise DomainError(f"{what} must be Hermitian")


def master_equation_step(rho, hamiltonian, p_squared, diffusion: float,
                         dt: float, hbar: float = 1.0) -> np.ndarray:
    """One RK4 step of d(rho)/dt = -i[H, rho]/hbar - D {p^2, rho}/hbar^2."""
    m = _as_matrix(rho)
    h = np.asarray(hamiltonian, dtype=complex)
    p2 = np.asarray(p_squared, dtype=complex)
    _check_hermitian(h, "Hamiltonian")
    _check_hermitian(p2, "p^2 operator")

    def rhs(r):
        comm = h @ r - r @ h
        anti = p2 @ r + r @ p2
        return -1j * comm / hbar - diffusion * anti / hbar**2

    k1 = rhs(m)
    k2 = rhs(m + 0.5 * dt * k1)
    k3 = rhs(m + 0.5 * dt * k2)
    k4 = rhs(m + dt * k3)
    out = m + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
    if not np.all(np.isfinite(out)):
        raise StepDiverged("master equation step produced non-finite entries")
    return out


def trace_decay_rate(rho, p_squared, diffusion: float, hbar: float = 1.0) -> float:
    """Analytic d(tr rho)/dt = -2 D tr(p^2 rho) / hbar^2."""
    m = _as_matrix(rho)
    return float((-2.0 * diffusion * np.trace(np.asarray(p_squared) @ m) / hbar**2).real)


# --- harmonic-oscillator basis builders ---

def oscillator_hamiltonian(n_levels: int, mass: float, omega: float,
                           hbar: float = 1.0) -> np.ndarray:
    return np.diag(hbar * omega * (np.arange(n_levels) + 0.5)).astype(complex)


def oscillator_p_squared(n_levels: int, mass: float, omega: float,
                         hbar: float = 1.0) -> np.ndarray:
    """Momentum-squared matrix from ladder elements: diagonal (2n+1),
    two-off-diagonal -sqrt((n+1)(n+2)), times m hbar omega / 2."""
    n = np.arange(n_levels)
    diag = 2.0 * n + 1.0
    off = -np.sqrt((n[:-2] + 1.0) * (n[:-2] + 2.0))
    m = np.diag(diag).astype(complex)
    m += np.diag(off, k=2) + np.diag(off, k=-2)
    return 0.5 * mass * hbar * omega * m


def oscillator_spectrum(n_levels: int, omega: float, hbar: float = 1.0) -> EnergySpectrum:
    return EnergySpectrum(hbar * omega * (np.arange(n_levels) + 0.5))
