"""Hot numeric kernels with numba-jitted and pure-numpy implementations.

The jitted path is used by default; set QHYDRO_DISABLE_JIT=1 to select the
numpy fallbacks.  Both paths implement identical numerics (same bracket
logic, same stage order) so results agree to rounding.  FFT-bound solvers
elsewhere in the package stay on vectorized numpy: numba's nopython mode
has no FFT support, and those loops are already array-sized.

benchmarks/bench_kernels.py times the two paths against each other.
"""

import numpy as np

from ._jit import JIT_ENABLED, njit

BISECT_REL_TOL = 1e-12


# ---------------------------------------------------------------------------
# RK4 integrator for the coupled action ODEs
#   dS_re/dt = -E - eps*cos(2 S_re/hbar)
#   dS_im/dt = eps*sin(2 S_re/hbar)
# ---------------------------------------------------------------------------

def _action_rk4_py(t_grid, energy, eps, hbar, n_sub):
    n = t_grid.shape[0]
    s_re = np.empty(n)
    s_im = np.empty(n)
    s_re[0] = 0.0
    s_im[0] = 0.0
    re = 0.0
    im = 0.0
    for i in range(n - 1):
        h = (t_grid[i + 1] - t_grid[i]) / n_sub
        for _ in range(n_sub):
            k1r = -energy - eps * np.cos(2.0 * re / hbar)
            k1i = eps * np.sin(2.0 * re / hbar)
            r2 = re + 0.5 * h * k1r
            k2r = -energy - eps * np.cos(2.0 * r2 / hbar)
            k2i = eps * np.sin(2.0 * r2 / hbar)
            r3 = re + 0.5 * h * k2r
            k3r = -energy - eps * np.cos(2.0 * r3 / hbar)
            k3i = eps * np.sin(2.0 * r3 / hbar)
            r4 = re + h * k3r
            k4r = -energy - eps * np.cos(2.0 * r4 / hbar)
            k4i = eps * np.sin(2.0 * r4 / hbar)
            re += h * (k1r + 2.0 * k2r + 2.0 * k3r + k4r) / 6.0
            im += h * (k1i + 2.0 * k2i + 2.0 * k3i + k4i) / 6.0
        s_re[i + 1] = re
        s_im[i + 1] = im
    return s_re, s_im


# ---------------------------------------------------------------------------
# Bisection roots of the zero-temperature dispersion law
#   g(s) = s - (2/kappa^2) * log1p(s*kappa^2/2) = rhs,  g monotone up from 0
# ---------------------------------------------------------------------------

def _t37_g(s, kappa2):
    return s - (2.0 / kappa2) * np.log1p(0.5 * s * kappa2)


def _t37_roots_py(rhs, kappa2):
    out = np.empty(rhs.shape[0])
    for i in range(rhs.shape[0]):
        target = rhs[i]
        if target <= 0.0:
            out[i] = 0.0
            continue
        hi = 1e-12
        while _t37_g(hi, kappa2) < target:
            hi *= 2.0
        lo = 0.5 * hi if hi > 1e-12 else 0.0
        while (hi - lo) > BISECT_REL_TOL * hi:
            mid = 0.5 * (lo + hi)
            if _t37_g(mid, kappa2) < target:
                lo = mid
            else:
                hi = mid
        out[i] = 0.5 * (lo + hi)
    return out


# ---------------------------------------------------------------------------
# Bisection roots of the thermal dispersion law
#   h(s) = (2/kappa^2) log1p(s kappa^2/2) - lamT^2 log1p(s/lamT^2) = rhs
# kappa2 == 0 falls back to the limit form s - lamT^2 log1p(s/lamT^2).
# Monotone increasing from 0 whenever kappa^2 lamT^2 < 2.
# ---------------------------------------------------------------------------

def _t39_h(s, kappa2, lam_t2):
    if kappa2 == 0.0:
        first = s
    else:
        first = (2.0 / kappa2) * np.log1p(0.5 * s * kappa2)
    return first - lam_t2 * np.log1p(s / lam_t2)


def _t39_roots_py(rhs, kappa2, lam_t2):
    out = np.empty(rhs.shape[0])
    for i in range(rhs.shape[0]):
        target = rhs[i]
        if target <= 0.0:
            out[i] = 0.0
            continue
        hi = 1e-12
        while _t39_h(hi, kappa2, lam_t2) < target:
            hi *= 2.0
        lo = 0.5 * hi if hi > 1e-12 else 0.0
        while (hi - lo) > BISECT_REL_TOL * hi:
            mid = 0.5 * (lo + hi)
            if _t39_h(mid, kappa2, lam_t2) < target:
                lo = mid
            else:
                hi = mid
        out[i] = 0.5 * (lo + hi)
    return out


# ---------------------------------------------------------------------------
# Phase-space correlation assembly
#   C[j, n] = conj(psi(x_j - n*dx/2)) * psi(x_j + n*dx/2), FFT index layout
# psi_half holds the band-limited interpolation of psi onto x + dx/2.
# ---------------------------------------------------------------------------

def _wigner_corr_py(psi, psi_half):
    n = psi.shape[0]
    c = np.empty((n, n), dtype=np.complex128)
    half = n // 2
    for shift in range(half + 1):
        if shift % 2 == 0:
            r = shift // 2
            minus = np.roll(psi, r)
            plus = np.roll(psi, -r)
        else:
            r = (shift - 1) // 2
            minus = np.roll(psi_half, r + 1)
            plus = np.roll(psi_half, -r)
        col = np.conj(minus) * plus
        c[:, shift] = col
        if 0 < shift < half:
            c[:, n - shift] = np.conj(col)
    return c


@njit(cache=True)
def _wigner_corr_nb(psi, psi_half):  # pragma: no cover - exercised via wrapper
    n = psi.shape[0]
    c = np.empty((n, n), dtype=np.complex128)
    half = n // 2
    for shift in range(half + 1):
        for j in range(n):
            if shift % 2 == 0:
                r = shift // 2
                minus = psi[(j - r) % n]
                plus = psi[(j + r) % n]
            else:
                r = (shift - 1) // 2
                minus = psi_half[(j - r - 1) % n]
                plus = psi_half[(j + r) % n]
            val = np.conj(minus) * plus
            c[j, shift] = val
            if 0 < shift < half:
                c[j, n - shift] = np.conj(val)
    return c


if JIT_ENABLED:
    _action_rk4_nb = njit(cache=True)(_action_rk4_py)
    _t37_g_nb = njit(cache=True)(_t37_g)
    _t39_h_nb = njit(cache=True)(_t39_h)

    @njit(cache=True)
    def _t37_roots_nb(rhs, kappa2):  # pragma: no cover - exercised via wrapper
        out = np.empty(rhs.shape[0])
        for i in range(rhs.shape[0]):
            target = rhs[i]
            if target <= 0.0:
                out[i] = 0.0
                continue
            hi = 1e-12
            while _t37_g_nb(hi, kappa2) < target:
                hi *= 2.0
            lo = 0.5 * hi if hi > 1e-12 else 0.0
            while (hi - lo) > BISECT_REL_TOL * hi:
                mid = 0.5 * (lo + hi)
                if _t37_g_nb(mid, kappa2) < target:
                    lo = mid
                else:
                    hi = mid
            out[i] = 0.5 * (lo + hi)
        return out

    @njit(cache=True)
    def _t39_roots_nb(rhs, kappa2, lam_t2):  # pragma: no cover
        out = np.empty(rhs.shape[0])
        for i in range(rhs.shape[0]):
            target = rhs[i]
            if target <= 0.0:
                out[i] = 0.0
                continue
            hi = 1e-12
            while _t39_h_nb(hi, kappa2, lam_t2) < target:
                hi *= 2.0
            lo = 0.5 * hi if hi > 1e-12 else 0.0
            while (hi - lo) > BISECT_REL_TOL * hi:
                mid = 0.5 * (lo + hi)
                if _t39_h_nb(mid, kappa2, lam_t2) < target:
                    lo = mid
                else:
                    hi = mid
            out[i] = 0.5 * (lo + hi)
        return out

    action_rk4 = _action_rk4_nb
    t37_roots = _t37_roots_nb
    t39_roots = _t39_roots_nb
    wigner_correlation = _wigner_corr_nb
else:
    action_rk4 = _action_rk4_py
    t37_roots = _t37_roots_py
    t39_roots = _t39_roots_py
    wigner_correlation = _wigner_corr_py
