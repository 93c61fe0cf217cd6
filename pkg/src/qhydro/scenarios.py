"""Configuration-driven scenario runs with built-in checks.

Each scenario builds its states from the config, evolves or evaluates
them, writes CSV time series (17-significant-digit decimals, LF endings,
byte-deterministic for a given config), and returns a summary whose
checks are the scenario's accept/reject gates.
"""

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import density_matrix as dmx
from . import dual_space as ds
from . import madelung as md
from . import smoluchowski as sm
from . import wigner as wg
from .config import ScenarioConfig
from .errors import ConfigError, IllPosed
from .grid import ComplexField, Grid1D, PhysicalParams, RealField, norm_squared
from .schrodinger import (PotentialSpec, expectation_energy,
                          diffusive_term_expectation, step_diffusive_linear,
                          step_doebner_goldin, step_unitary)
from .states import gaussian_packet, harmonic_ground_state, mode_wavenumber, \
    plane_wave, two_bump_superposition


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""


@dataclass
class RunSummary:
    scenario: str
    wall_time: float
    checks: list = field(default_factory=list)
    files: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    out_dir: str = ""

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def to_json(self):
        return json.dumps({
            "scenario": self.scenario,
            "passed": self.passed,
            "wall_time_s": round(self.wall_time, 3),
            "checks": [{"name": c.name, "passed": c.passed, "value": c.value,
                        "tolerance": c.tolerance, "detail": c.detail}
                       for c in self.checks],
            "files": self.files,
            "config": self.config,
        }, indent=2) + "\n"


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _check(checks, name, value, tolerance, below=True, detail=""):
    passed = (value < tolerance) if below else (value > tolerance)
    checks.append(CheckResult(name, bool(passed), float(value),
                              float(tolerance), detail))


def _params(cfg: ScenarioConfig, diffusion=0.0) -> PhysicalParams:
    return PhysicalParams(hbar=cfg.phys("hbar"), mass=cfg.phys("m"),
                          diffusion=diffusion, k_boltzmann=cfg.phys("kB"))


def _grid(cfg: ScenarioConfig) -> Grid1D:
    return Grid1D(cfg.require("grid", "L"), cfg.require("grid", "N"))


def _moments(grid, rho_vals):
    total = float(np.sum(rho_vals)) * grid.dx
    mean = float(np.sum(grid.x * rho_vals)) * grid.dx / total
    var = float(np.sum((grid.x - mean) ** 2 * rho_vals)) * grid.dx / total
    return total, mean, var


# --- scenarios ---

def run_free_packet(cfg, out_dir):
    params = _params(cfg)
    grid = _grid(cfg)
    sigma0 = cfg.phys("sigma0", 1.0)
    dt = cfg.require("run", "dt")
    steps = cfg.require("run", "steps")
    stride = cfg.run.get("stride", 10)
    u = PotentialSpec("zero").build(grid, params)
    psi = gaussian_packet(grid, sigma0)
    e0 = expectation_energy(psi, u, params)
    n0 = norm_squared(psi)
    rows = []

    def record(step, state):
        t = step * dt
        rho = np.abs(state.values) ** 2
        _, mean, var = _moments(grid, rho)
        exact = sigma0**2 + (params.hbar * t / (2 * params.mass * sigma0)) ** 2
        rows.append((t, norm_squared(state), mean, var, exact,
                     expectation_energy(state, u, params)))

    record(0, psi)
    for k in range(1, steps + 1):
        psi = step_unitary(psi, u, params, dt)
        if k % stride == 0 or k == steps:
            record(k, psi)

    checks = []
    final_t = steps * dt
    var = rows[-1][3]
    exact = rows[-1][4]
    _check(checks, "spread_matches_closed_form", abs(var - exact), 1e-6)
    _check(checks, "norm_conservation", abs(rows[-1][1] - n0), 1e-11)
    _check(checks, "energy_conservation",
           abs(rows[-1][5] - e0) / abs(e0), 1e-9,
           detail=f"t = {final_t:g}")
    path = out_dir / "free_packet.csv"
    write_csv(path, ["t", "norm2", "x_mean", "sigma_x2", "sigma_x2_exact",
                     "energy"], rows)
    return checks, [path.name]


def run_damped_plane_wave(cfg, out_dir):
    diffusion = cfg.require("physics", "D")
    params = _params(cfg, diffusion)
    n = cfg.require("grid", "N")
    grid = Grid1D(cfg.grid.get("L", 2 * np.pi), n)
    mode = int(cfg.phys("k0", 2.0))
    k = mode_wavenumber(grid, mode)
    dt = cfg.require("run", "dt")
    steps = cfg.require("run", "steps")
    stride = cfg.run.get("stride", 50)
    u = PotentialSpec("zero").build(grid, params)
    psi0 = plane_wave(grid, mode)
    psi = psi0
    rows = []
    monotone = True
    prev_norm = norm_squared(psi0)
    for step in range(1, steps + 1):
        psi = step_diffusive_linear(psi, u, diffusion, params, dt)
        cur = norm_squared(psi)
        if cur > prev_norm + 1e-14:
            monotone = False
        prev_norm = cur
        if step % stride == 0 or step == steps:
            t = step * dt
            ratio = psi.values[0] / psi0.values[0]
            rows.append((t, cur, abs(ratio), np.exp(-diffusion * k**2 * t),
                         np.angle(ratio),
                         -params.hbar * k**2 * t / (2 * params.mass)))
    checks = []
    t, _, amp, amp_exact, phase, phase_exact = rows[-1]
    _check(checks, "amplitude_decay", abs(amp / amp_exact - 1.0), 1e-10)
    wrapped = (phase - phase_exact + np.pi) % (2 * np.pi) - np.pi
    _check(checks, "phase_rotation", abs(wrapped), 1e-10)
    _check(checks, "norm_monotone", 0.0 if monotone else 1.0, 0.5)
    path = out_dir / "damped_plane_wave.csv"
    write_csv(path, ["t", "norm2", "amp_ratio", "amp_exact", "phase",
                     "phase_exact"], rows)
    return checks, [path.name]


def run_doebner_goldin(cfg, out_dir):
    diffusion = cfg.require("physics", "D")
    params = _params(cfg, diffusion)
    grid = _grid(cfg)
    sigma0 = cfg.phys("sigma0", 2.0)
    dt = cfg.require("run", "dt")
    steps = cfg.require("run", "steps")
    stride = cfg.run.get("stride", 50)
    u = PotentialSpec("zero").build(grid, params)
    psi = gaussian_packet(grid, sigma0)
    m0 = norm_squared(psi)
    rows = [(0.0, m0, abs(diffusive_term_expectation(psi, diffusion, params)))]
    for step in range(1, steps + 1):
        psi = step_doebner_goldin(psi, u, diffusion, params, dt)
        if step % stride == 0 or step == steps:
            rows.append((step * dt, norm_squared(psi),
                         abs(diffusive_term_expectation(psi, diffusion, params))))
    checks = []
    _check(checks, "mass_conservation", abs(rows[-1][1] - m0), 1e-8)
    _check(checks, "diffusive_term_mean_zero",
           max(r[2] for r in rows), 1e-12)
    path = out_dir / "doebner_goldin.csv"
    write_csv(path, ["t", "mass", "diffusive_term_abs"], rows)
    return checks, [path.name]


def run_wigner_check(cfg, out_dir):
    params = _params(cfg)
    grid = _grid(cfg)
    sigma0 = cfg.phys("sigma0", 1.0)
    k0 = cfg.phys("k0", 1.0)
    states = [
        ("gaussian", gaussian_packet(grid, sigma0)),
        ("moving_gaussian", gaussian_packet(grid, sigma0, k0=k0)),
        ("two_bump", two_bump_superposition(grid, sigma0, 8 * sigma0)),
    ]
    rows = []
    checks = []
    neg_ratio = 0.0
    for name, psi in states:
        f = wg.wigner_transform(psi, params)
        rho_w = wg.marginal_position(f, params)
        rho = md.density(psi, params)
        pos_err = float(np.max(np.abs(rho_w.values - rho.values)))
        mom_err = float(np.max(np.abs(
            wg.marginal_momentum(f) - wg.momentum_wavefunction_density(psi, params))))
        ratio = float(f.values.min() / f.values.max())
        if name == "two_bump":
            neg_ratio = ratio
        rows.append((name, pos_err, mom_err, ratio, f.imag_residue))
        _check(checks, f"{name}_position_marginal", pos_err, 1e-8)
        _check(checks, f"{name}_momentum_marginal", mom_err, 1e-8)
    _check(checks, "two_bump_negativity", neg_ratio, -1e-3)

    # potential reconstruction: eigenstate recovery and dissipative control
    omega = cfg.phys("omega", 1.0)
    psi0 = harmonic_ground_state(grid, params, omega)
    e0 = 0.5 * params.hbar * omega
    psi_dot = ComplexField(grid, -1j * e0 * psi0.values / params.hbar)
    u_rec, _ = wg.infer_potential(psi0, psi_dot, params)
    u_true = 0.5 * params.mass * omega**2 * grid.x**2
    rho0 = np.abs(psi0.values) ** 2
    bulk = rho0 > 1e-6 * rho0.max()
    rec_err = float(np.max(np.abs(u_rec.values - u_true)[bulk]))
    _check(checks, "harmonic_potential_recovery", rec_err, 1e-7)

    u_zero = PotentialSpec("zero").build(grid, params)
    dt = 1e-5

    def residual_for(stepper):
        psi = gaussian_packet(grid, sigma0)
        for _ in range(20):
            psi = stepper(psi, dt)
        fwd = stepper(psi, dt)
        bwd = stepper(psi, -dt)
        dot = ComplexField(grid, (fwd.values - bwd.values) / (2 * dt))
        return wg.infer_potential(psi, dot, params)[1]

    res_u = residual_for(lambda p, h: step_unitary(p, u_zero, params, h))
    res_d = residual_for(
        lambda p, h: step_diffusive_linear(p, u_zero, 0.1, params, h))
    _check(checks, "dissipative_residual_control", res_d / max(res_u, 1e-300),
           1e3, below=False)
    rows.append(("reconstruction", rec_err, res_u, res_d, res_d / res_u))
    path = out_dir / "wigner_check.csv"
    write_csv(path, ["state", "position_marginal_err", "momentum_marginal_err",
                     "min_over_max", "imag_residue"], rows)
    return checks, [path.name]


def run_ergodic_average(cfg, out_dir):
    hbar = cfg.phys("hbar")
    spectrum = dmx.EnergySpectrum([0.0, 1.0, 1.0 + np.sqrt(2.0)])
    vec = np.ones(3) / np.sqrt(3.0)
    rho0 = np.outer(vec, vec)
    taus = np.logspace(1.0, 4.0, 13)
    rows = []
    env = []
    for tau in taus:
        sub = tau * np.linspace(0.8, 1.25, 21)
        env_val = max(dmx.offdiagonal_norm(dmx.time_average(rho0, spectrum, s, hbar))
                      for s in sub)
        env.append(env_val)
        rows.append((tau, dmx.offdiagonal_norm(
            dmx.time_average(rho0, spectrum, tau, hbar)), env_val))
    slope = float(np.polyfit(np.log(taus), np.log(env), 1)[0])
    checks = []
    _check(checks, "offdiagonal_decay_exponent", abs(slope + 1.0), 0.05,
           detail=f"slope = {slope:.4f}")
    limit = dmx.ergodic_limit(rho0, spectrum)
    long_avg = dmx.time_average(rho0, spectrum, 1e8, hbar)
    _check(checks, "long_time_average_is_projection",
           float(np.max(np.abs(long_avg - limit))), 1e-6)
    deg = dmx.EnergySpectrum([1.0, 2.0, 2.0])
    deg_limit = dmx.ergodic_limit(rho0, deg)
    block_kept = abs(deg_limit[1, 2] - rho0[1, 2])
    cross_zeroed = abs(deg_limit[0, 1]) + abs(deg_limit[0, 2])
    _check(checks, "degenerate_block_preserved", block_kept + cross_zeroed, 1e-14)
    path = out_dir / "ergodic_average.csv"
    write_csv(path, ["tau", "offdiag_norm", "offdiag_envelope"], rows)
    return checks, [path.name]


def run_master_decoherence(cfg, out_dir):
    diffusion = cfg.require("physics", "D")
    hbar = cfg.phys("hbar")
    mass = cfg.phys("m")
    omega = cfg.phys("omega", 1.0)
    n_b = cfg.grid.get("N", 32)
    dt = cfg.require("run", "dt")
    steps = cfg.require("run", "steps")
    stride = cfg.run.get("stride", 50)
    h = dmx.oscillator_hamiltonian(n_b, mass, omega, hbar)
    p2 = dmx.oscillator_p_squared(n_b, mass, omega, hbar)
    rho = np.zeros((n_b, n_b), complex)
    rho[0, 0] = 1.0
    analytic_rate = dmx.trace_decay_rate(rho, p2, diffusion, hbar)
    probe = dmx.master_equation_step(rho, h, p2, diffusion, 1e-7, hbar)
    measured_rate = (np.trace(probe).real - 1.0) / 1e-7
    rows = []
    min_eig = 0.0
    for step in range(1, steps + 1):
        rho = dmx.master_equation_step(rho, h, p2, diffusion, dt, hbar)
        if step % stride == 0 or step == steps:
            herm = float(np.max(np.abs(rho - rho.conj().T)))
            eig = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
            min_eig = min(min_eig, eig)
            rows.append((step * dt, np.trace(rho).real, herm, eig))
    checks = []
    _check(checks, "trace_decay_rate",
           abs(measured_rate / analytic_rate - 1.0), 1e-6,
           detail=f"analytic = {analytic_rate:g}")
    _check(checks, "hermiticity_drift", rows[-1][2], 1e-10)
    _check(checks, "positivity_probe", -min_eig, 1e-8)
    path = out_dir / "master_decoherence.csv"
    write_csv(path, ["t", "trace", "hermiticity_drift", "min_eigenvalue"], rows)
    return checks, [path.name]


def run_dual_space_homogeneous(cfg, out_dir):
    hbar = cfg.phys("hbar")
    energy = cfg.require("physics", "E")
    eps = cfg.require("physics", "epsilon")
    p = ds.DualCouplingParams(energy, eps)
    period = ds.action_period(p, hbar)
    t = np.linspace(0.0, 3 * period, 601)
    traj = ds.integrate_action_odes(p, t, hbar)
    closed = ds.closed_form_action(p, t, hbar)
    rows = [(tt, sr, sc, si,
             ds.mass_oscillation(p, 1.0, tt, hbar),
             1.0 + ds.virtual_mass(p, 1.0) * np.cos(2 * energy * tt / hbar))
            for tt, sr, sc, si in zip(t, traj.s_re, closed, traj.s_im)]
    checks = []
    _check(checks, "closed_form_matches_ode",
           float(np.max(np.abs(traj.s_re - closed))), 1e-6)

    from . import kernels
    exact_end = ds.closed_form_action(p, period, hbar)
    errs = [abs(kernels.action_rk4(np.array([0.0, period]), energy, eps, hbar,
                                   n)[0][1] - exact_end)
            for n in (50, 100, 200)]
    ratios = [errs[i] / errs[i + 1] for i in range(2)]
    _check(checks, "rk4_fourth_order",
           max(abs(r - 16.0) for r in ratios), 4.0,
           detail=f"halving ratios {ratios[0]:.1f}, {ratios[1]:.1f}")

    # density trace spectral line at 2E/hbar
    n_per, periods = 64, 32
    window = periods * np.pi * hbar / energy
    ts = np.linspace(0.0, window, n_per * periods, endpoint=False)
    trace = ds.mass_oscillation(p, 1.0, ts, hbar)
    spec = np.abs(np.fft.rfft(trace - trace.mean()))
    freqs = np.fft.rfftfreq(ts.size, d=ts[1] - ts[0])
    peak = float(freqs[np.argmax(spec)])
    target = 2 * energy / (2 * np.pi * hbar)
    _check(checks, "oscillation_frequency_bin", abs(peak - target), freqs[1] * 1.001)

    # first-order amplitude formula against the sign-consistent trajectory
    p_minus = ds.DualCouplingParams(energy, -eps)
    tt = np.linspace(0.0, period, 201)
    ref = ds.integrate_action_odes(p_minus, tt, hbar)
    amp_ode = np.exp(-ref.s_im / hbar) * np.exp(eps / (2 * energy))
    amp_err = float(np.max(np.abs(np.abs(ds.approx_wavefunction(p, tt, hbar))
                                  - amp_ode)))
    _check(checks, "amplitude_formula_error", amp_err, 2 * (eps / energy) ** 2)

    mean_first = ds.mass_period_mean(p, 1.0, hbar, first_order=True)
    _check(checks, "first_order_period_mean", abs(mean_first - 1.0), 1e-13)
    mean_exact = ds.mass_period_mean(p, 1.0, hbar)
    _check(checks, "exact_period_mean_bessel",
           abs(mean_exact - float(np.i0(eps / energy))), 1e-10,
           detail=f"mean = {mean_exact:.8f}")

    path = out_dir / "dual_space_homogeneous.csv"
    write_csv(path, ["t", "s_re_ode", "s_re_closed", "s_im", "rho_exact",
                     "rho_first_order"], rows)
    return checks, [path.name]


def run_dual_space_field(cfg, out_dir):
    params = _params(cfg)
    grid = _grid(cfg)
    energy = cfg.require("physics", "E")
    eps = cfg.require("physics", "epsilon")
    dt = cfg.require("run", "dt")
    steps = cfg.require("run", "steps")
    stride = cfg.run.get("stride", 20)
    hbar = params.hbar
    u = RealField(grid, np.full(grid.npoints, energy))
    spec = PotentialSpec("tabulated", table=u)
    p = ds.DualCouplingParams(energy, eps)

    # homogeneous start in the phase gauge that tracks the printed law
    cur = ComplexField(grid, np.full(grid.npoints, 1j / np.sqrt(grid.length)))
    rows = []
    worst_track = 0.0
    for step in range(1, steps + 1):
        cur = ds.step_dual_schrodinger(cur, u, eps, params, dt)
        t = step * dt
        n2 = norm_squared(cur)
        model = ds.mass_oscillation(p, 1.0, t, hbar) * np.exp(-eps / energy)
        worst_track = max(worst_track, abs(n2 / model - 1.0))
        if step % stride == 0 or step == steps:
            rows.append((t, n2, model))
    checks = []
    _check(checks, "homogeneous_mass_tracking", worst_track, 2e-3)

    psi1 = gaussian_packet(grid, 1.0, x_center=-2.0)
    psi2 = gaussian_packet(grid, 1.5, x_center=2.0, k0=1.0)
    combo = ComplexField(grid, 0.7 * psi1.values - 1.3 * psi2.values)
    lhs = ds.step_dual_schrodinger(combo, u, eps, params, dt)
    rhs = (0.7 * ds.step_dual_schrodinger(psi1, u, eps, params, dt).values
           - 1.3 * ds.step_dual_schrodinger(psi2, u, eps, params, dt).values)
    _check(checks, "real_linearity", float(np.max(np.abs(lhs.values - rhs))), 1e-12)

    a = b = gaussian_packet(grid, 1.0, x_center=0.5)
    u0 = PotentialSpec("zero").build(grid, params)
    for _ in range(50):
        a = ds.step_dual_schrodinger(a, u0, 0.0, params, dt)
        b = step_unitary(b, u0, params, dt)
    _check(checks, "zero_coupling_reduction",
           float(np.max(np.abs(a.values - b.values))), 1e-12)

    # linearized action-balance diagnostics on a short zero-phase branch
    flat = ComplexField(grid, np.full(grid.npoints, 1.0 + 0j))
    for _ in range(int(0.15 / dt)):
        flat = ds.step_dual_schrodinger(flat, u, eps, params, dt)
    mid = ds.step_dual_schrodinger(flat, u, eps, params, dt)
    plus = ds.step_dual_schrodinger(mid, u, eps, params, dt)
    rec = ds.teleportation_ns_residual((flat, mid, plus), spec, eps, params, dt)
    _check(checks, "linearized_balance_residual", rec.action_residual_max,
           5 * (eps / energy) ** 2 * energy,
           detail=f"max |S_re|/hbar = {rec.max_action_ratio:.3f}")

    path = out_dir / "dual_space_field.csv"
    write_csv(path, ["t", "norm2", "model"], rows)
    return checks, [path.name]


def _mean_zero_energy(rho_vals, grid, params):
    _, rho_q = sm._quantum_terms(rho_vals, grid.dx, params)
    return float(np.sum(rho_q)) * grid.dx


def run_qse_teleport_free(cfg, out_dir):
    params = _params(cfg)
    grid = _grid(cfg)
    b = cfg.require("physics", "b")
    kappa = cfg.require("physics", "kappa")
    sigma0sq = cfg.phys("sigma0", np.sqrt(0.15)) ** 2
    steps = cfg.require("run", "steps")
    stride = cfg.run.get("stride", 500)
    rho0 = RealField(grid, np.exp(-grid.x**2 / (2 * sigma0sq))
                     / np.sqrt(2 * np.pi * sigma0sq))
    e0 = _mean_zero_energy(rho0.values, grid, params)
    tp = sm.TeleportationParams(friction=b, kappa=kappa, energy=e0)
    dt = cfg.run.get("dt", sm.max_stable_dt(grid, tp, params))
    prop = sm.qse_propagator(grid, PotentialSpec("zero"), tp, params, dt)
    state = sm.SmoluchowskiState.from_density(rho0)
    rate = params.hbar**2 * kappa**2 / (4 * params.mass * b)
    t_offset = (sigma0sq - (2 / kappa**2) * np.log1p(sigma0sq * kappa**2 / 2)) / rate
    rows = []
    worst_rel = 0.0
    worst_kurt = 0.0
    for step in range(1, steps + 1):
        state = prop.step(state)
        if step % stride == 0 or step == steps:
            s2 = sm.dispersion_from_density(state.rho)
            root = sm.gaussian_dispersion_t37(state.time + t_offset, tp, params)
            kurt = sm.excess_kurtosis(state.rho)
            rows.append((state.time, s2, root, s2 / root, kurt, state.mass))
            if state.time >= 0.05:
                worst_rel = max(worst_rel, abs(s2 / root - 1.0))
                worst_kurt = max(worst_kurt, abs(kurt))
    checks = []
    _check(checks, "dispersion_tracks_transcendental_law", worst_rel, 0.02)
    _check(checks, "gaussian_ansatz_kurtosis", worst_kurt, 0.05)
    path = out_dir / "qse_teleport_free.csv"
    write_csv(path, ["t", "sigma2_pde", "sigma2_root", "ratio", "kurtosis",
                     "mass"], rows)
    return checks, [path.name]


def run_qse_teleport_harmonic(cfg, out_dir):
    params = _params(cfg)
    grid = _grid(cfg)
    b = cfg.require("physics", "b")
    omega = cfg.require("physics", "omega")
    steps = cfg.require("run", "steps")
    spec = PotentialSpec("harmonic", omega=omega)
    rho0 = md.density(harmonic_ground_state(grid, params, omega), params)
    energy = 0.5 * params.hbar * omega
    rows = []
    checks = []
    for kappa in (0.0, 0.5, 1.0):
        tp = sm.TeleportationParams(friction=b, kappa=kappa, energy=energy)
        dt = cfg.run.get("dt", sm.max_stable_dt(grid, tp, params))
        prop = sm.qse_propagator(grid, spec, tp, params, dt)
        state = sm.SmoluchowskiState.from_density(rho0)
        for _ in range(steps):
            state = prop.step(state)
        drift = float(np.max(np.abs(state.rho.values - rho0.values))
                      / np.max(rho0.values))
        rows.append((kappa, state.time, drift, abs(state.mass - rho0.values.sum()
                                                   * grid.dx)))
        _check(checks, f"stationary_ground_state_kappa_{kappa:g}", drift, 1e-6)
    path = out_dir / "qse_teleport_harmonic.csv"
    write_csv(path, ["kappa", "t_final", "max_drift", "mass_drift"], rows)
    return checks, [path.name]


def run_qse_thermal(cfg, out_dir):
    params = _params(cfg)
    grid = _grid(cfg)
    b = cfg.require("physics", "b")
    temperature = cfg.require("physics", "T")
    kappa = cfg.phys("kappa", 1.0)
    sigma0sq = cfg.phys("sigma0", np.sqrt(0.15)) ** 2
    steps = cfg.require("run", "steps")
    stride = cfg.run.get("stride", 200)
    checks = []
    rows = []

    # classical reduction: no teleportation, quantum pressure off
    tp_cl = sm.TeleportationParams(friction=b, kappa=0.0, temperature=temperature)
    d = sm.einstein_diffusion(tp_cl, params)
    dt = cfg.run.get("dt", sm.max_stable_dt(grid, tp_cl, params, thermal=True))
    prop = sm.qse_thermal_propagator(grid, PotentialSpec("zero"), tp_cl, params,
                                     dt, include_quantum=False)
    rho0 = RealField(grid, np.exp(-grid.x**2 / (2 * sigma0sq))
                     / np.sqrt(2 * np.pi * sigma0sq))
    state = sm.SmoluchowskiState.from_density(rho0)
    for _ in range(steps):
        state = prop.step(state)
    s2 = sm.dispersion_from_density(state.rho)
    expect = sigma0sq + 2 * d * state.time
    _check(checks, "classical_einstein_reduction", abs(s2 / expect - 1.0), 1e-3)
    rows.append(("classical", state.time, s2, expect, s2 / expect))

    # full equation against the thermal dispersion root
    kt = params.k_boltzmann * temperature
    _, rho_q = sm._quantum_terms(rho0.values, grid.dx, params)
    safe = np.maximum(rho0.values, 1e-300)
    entropy = np.where(rho0.values > 0, kt * rho0.values * np.log(safe), 0.0)
    f0 = float(np.sum(entropy + rho_q)) * grid.dx
    tp = sm.TeleportationParams(friction=b, kappa=kappa, temperature=temperature,
                                free_energy=f0)
    lam2 = sm.thermal_de_broglie(tp, params) ** 2
    dt2 = sm.max_stable_dt(grid, tp, params, thermal=True)
    prop = sm.qse_thermal_propagator(grid, PotentialSpec("zero"), tp, params, dt2)
    state = sm.SmoluchowskiState.from_density(rho0)
    h0 = ((2 / kappa**2) * np.log1p(sigma0sq * kappa**2 / 2)
          - lam2 * np.log1p(sigma0sq / lam2))
    t_offset = h0 / ((2 - kappa**2 * lam2) * sm.einstein_diffusion(tp, params))
    worst = 0.0
    for step in range(1, steps + 1):
        state = prop.step(state)
        if step % stride == 0 or step == steps:
            s2 = sm.dispersion_from_density(state.rho)
            root = sm.gaussian_dispersion_t39(state.time + t_offset, tp, params)
            rows.append(("thermal_pde", state.time, s2, root, s2 / root))
            if state.time > 10 * dt2:
                worst = max(worst, abs(s2 / root - 1.0))
    _check(checks, "thermal_dispersion_tracking", worst, 0.03)

    # high-temperature window: the root collapses onto the closed form
    tp_hot = sm.TeleportationParams(friction=b, kappa=kappa, temperature=1e8)
    d_hot = sm.einstein_diffusion(tp_hot, params)
    ts = np.geomspace(0.1, 3.0, 9) / (d_hot * kappa**2)
    r39 = sm.gaussian_dispersion_t39(ts, tp_hot, params)
    r40 = sm.high_temperature_dispersion_t40(ts, tp_hot, params)
    _check(checks, "high_temperature_window",
           float(np.max(np.abs(r39 / r40 - 1.0))), 1e-3)
    for t, a, bb in zip(ts, r39, r40):
        rows.append(("high_T_window", t, a, bb, a / bb))

    # well-posedness boundary: kappa^2 lambda_T^2 = 2 at this temperature
    t_crit = params.hbar**2 * kappa**2 / (8 * params.mass * params.k_boltzmann)
    raised = False
    try:
        sm.gaussian_dispersion_t39(
            1.0, sm.TeleportationParams(friction=b, kappa=kappa,
                                        temperature=t_crit * (1 - 1e-12)), params)
    except IllPosed:
        raised = True
    ok_below = np.isfinite(sm.gaussian_dispersion_t39(
        1.0, sm.TeleportationParams(friction=b, kappa=kappa,
                                    temperature=t_crit / (1 - 5e-7)), params))
    _check(checks, "ill_posed_boundary", 1.0 if (raised and ok_below) else 0.0,
           0.5, below=False)

    path = out_dir / "qse_thermal.csv"
    write_csv(path, ["case", "t", "sigma2", "reference", "ratio"], rows)
    return checks, [path.name]


def run_dispersion_tables(cfg, out_dir):
    params = _params(cfg)
    b = cfg.require("physics", "b")
    kappa = cfg.require("physics", "kappa")
    temperature = cfg.require("physics", "T")
    tp = sm.TeleportationParams(friction=b, kappa=kappa, temperature=temperature)
    d_t = sm.teleportation_diffusion(tp, params)

    ts = np.geomspace(1e-6, 1e6, 121)
    roots = sm.gaussian_dispersion_t37(ts, tp, params)
    sqrt_law = params.hbar * np.sqrt(ts / (params.mass * b))
    einstein = 2 * d_t * ts
    rows = [(t, r, r / s, r / e) for t, r, s, e in zip(ts, roots, sqrt_law, einstein)]
    path1 = out_dir / "dispersion_zero_temperature.csv"
    write_csv(path1, ["t", "sigma2_root", "ratio_sqrt_law", "ratio_einstein"], rows)

    d = sm.einstein_diffusion(tp, params)
    ts_th = np.geomspace(1e-4, 2.0, 41) / max(d * kappa**2, 1e-12)
    r39 = sm.gaussian_dispersion_t39(ts_th, tp, params)
    r40 = sm.high_temperature_dispersion_t40(ts_th, tp, params)
    rows_th = [(t, a, bb, a / bb) for t, a, bb in zip(ts_th, r39, r40)]
    path2 = out_dir / "dispersion_thermal.csv"
    write_csv(path2, ["t", "sigma2_t39", "sigma2_t40", "ratio"], rows_th)

    scan = np.arange(0.05, 5.0 + 1e-12, 0.05)
    deff = [md.effective_diffusion(float(dd), params) for dd in scan]
    path3 = out_dir / "effective_diffusion_scan.csv"
    write_csv(path3, ["D", "D_effective"], list(zip(scan, deff)))

    checks = []
    g = lambda s: s - (2 / kappa**2) * np.log1p(s * kappa**2 / 2)
    ref = sm.gaussian_dispersion_t37(1.0, tp, params)
    bracket_ok = (g(1.15) < 0.25 < g(1.20)) and abs(ref - 1.17) < 0.01
    _check(checks, "reference_root_bracket", 1.0 if bracket_ok else 0.0, 0.5,
           below=False, detail=f"root(t=1) = {ref:.6f}")
    _check(checks, "short_time_sqrt_asymptote", abs(rows[0][2] - 1.0), 1e-2)
    _check(checks, "long_time_einstein_asymptote", abs(rows[-1][3] - 1.0), 1e-2)
    _check(checks, "root_monotonicity",
           0.0 if np.all(np.diff(roots) > 0) else 1.0, 0.5)
    _check(checks, "teleportation_accelerates",
           0.0 if np.all(r40 >= 2 * d * ts_th - 1e-12) else 1.0, 0.5)
    argmin = scan[int(np.argmin(deff))]
    half = params.hbar / (2 * params.mass)
    _check(checks, "effective_diffusion_minimizer", abs(argmin - half), 0.05 + 1e-12)
    _check(checks, "effective_diffusion_minimum",
           abs(md.effective_diffusion(half, params) - params.hbar / params.mass),
           1e-12)
    return checks, [path1.name, path2.name, path3.name]


REGISTRY = {
    "free_packet": run_free_packet,
    "damped_plane_wave": run_damped_plane_wave,
    "doebner_goldin": run_doebner_goldin,
    "wigner_check": run_wigner_check,
    "ergodic_average": run_ergodic_average,
    "master_decoherence": run_master_decoherence,
    "dual_space_homogeneous": run_dual_space_homogeneous,
    "dual_space_field": run_dual_space_field,
    "qse_teleport_free": run_qse_teleport_free,
    "qse_teleport_harmonic": run_qse_teleport_harmonic,
    "qse_thermal": run_qse_thermal,
    "dispersion_tables": run_dispersion_tables,
}


def run_scenario(cfg: ScenarioConfig, out_dir=None) -> RunSummary:
    """Execute the named scenario, write its CSVs and summary, and return
    the summary.  Identical configs produce byte-identical CSVs."""
    if cfg.name not in REGISTRY:
        raise ConfigError([f"unknown scenario {cfg.name!r}"])
    out = Path(out_dir if out_dir is not None else cfg.run.get("out", f"runs/{cfg.name}"))
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    checks, files = REGISTRY[cfg.name](cfg, out)
    summary = RunSummary(scenario=cfg.name, wall_time=time.perf_counter() - started,
                         checks=list(checks), files=files, config=cfg.as_dict(),
                         out_dir=str(out))
    (out / "summary.json").write_text(summary.to_json(), encoding="utf-8")
    summary.files = files + ["summary.json"]
    return summary


def emit_plot_script(summary: RunSummary, out_dir=None) -> Path:
    """Write a self-contained gnuplot script for the emitted CSVs."""
    out = Path(out_dir if out_dir is not None else summary.out_dir)
    lines = ["# gnuplot script generated by qhydro",
             "set datafile separator ','",
             "set key autotitle columnhead"]
    csvs = [f for f in summary.files if f.endswith(".csv")]
    if not csvs:
        lines = ["# gnuplot script generated by qhydro",
                 "# no data files in this run"]
    for name in csvs:
        path = out / name
        header = path.read_text(encoding="utf-8").splitlines()[0].split(",")
        if len(header) < 2:
            continue
        logplot = "dispersion" in name
        residual_cols = [i for i, h in enumerate(header[1:], start=2)
                         if "residual" in h or "drift" in h]
        lines.append("")
        lines.append(f"# {name}")
        lines.append(f"set title '{summary.scenario}: {name}'")
        lines.append("set logscale xy" if logplot else "unset logscale")
        plots = ", ".join(f"'{name}' using 1:{i} with lines"
                          for i in range(2, len(header) + 1)
                          if i not in residual_cols)
        if plots:
            lines.append(f"plot {plots}")
        lines.append("pause -1")
        if residual_cols:
            lines.append(f"set title '{summary.scenario}: {name} residuals'")
            lines.append("unset logscale")
            rplots = ", ".join(f"'{name}' using 1:{i} with lines"
                               for i in residual_cols)
            lines.append(f"plot {rplots}")
            lines.append("pause -1")
    path = out / "plot.gp"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
