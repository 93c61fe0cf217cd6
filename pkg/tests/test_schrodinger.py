import numpy as np
import pytest

from qhydro.errors import DomainError, NodeEncountered
from qhydro.grid import ComplexField, Grid1D, PhysicalParams, RealField, norm_squared
from qhydro.schrodinger import (EvolutionConfig, PotentialSpec,
                                diffusive_term_expectation, expectation_energy,
                                step_diffusive_linear, step_doebner_goldin,
                                step_unitary)
from qhydro.states import (gaussian_packet, harmonic_ground_state,
                           mode_wavenumber, plane_wave)


@pytest.fixture(scope="module")
def grid():
    return Grid1D(40.0, 512)


@pytest.fixture(scope="module")
def params():
    return PhysicalParams()


def second_moment(grid, psi_values):
    rho = np.abs(psi_values) ** 2
    rho = rho / (np.sum(rho) * grid.dx)
    mean = np.sum(grid.x * rho) * grid.dx
    return np.sum((grid.x - mean) ** 2 * rho) * grid.dx


class TestEvolutionConfig:
    def test_validation(self):
        with pytest.raises(DomainError):
            EvolutionConfig(dt=0.0, steps=1)
        with pytest.raises(DomainError):
            EvolutionConfig(dt=0.1, steps=1, method="nope")
        with pytest.raises(DomainError):
            EvolutionConfig(dt=0.1, steps=1, snapshot_stride=0)

    def test_stability_ratio_recorded(self, grid, params):
        cfg = EvolutionConfig(dt=1e-3, steps=10)
        kmax2 = np.max(grid.k**2)
        expect = 1e-3 * kmax2 * (0.5 + 0.2)
        assert cfg.stability_ratio(grid, params, diffusion=0.2) == pytest.approx(expect)


class TestPotentialSpec:
    def test_harmonic_build_and_force(self, grid, params):
        spec = PotentialSpec("harmonic", omega=2.0, center=1.0)
        u = spec.build(grid, params)
        assert u.values[np.argmin(np.abs(grid.x - 1.0))] == pytest.approx(0.0, abs=1e-3)
        f = spec.force(grid, params)
        assert np.allclose(f, -params.mass * 4.0 * (grid.x - 1.0))

    def test_tabulated_grid_mismatch(self, grid, params):
        other = Grid1D(10.0, 64)
        table = RealField(other, np.zeros(64))
        spec = PotentialSpec("tabulated", table=table)
        with pytest.raises(DomainError):
            spec.build(grid, params)

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            PotentialSpec("quartic")


class TestStepUnitary:
    def test_free_gaussian_spread(self, grid, params):
        u = PotentialSpec("zero").build(grid, params)
        psi = gaussian_packet(grid, 1.0)
        dt = 0.01
        for _ in range(200):
            psi = step_unitary(psi, u, params, dt)
        # sigma^2(t) = sigma0^2 (1 + (hbar t / 2 m sigma0^2)^2) at t = 2
        assert second_moment(grid, psi.values) == pytest.approx(2.0, abs=1e-6)

    def test_harmonic_ground_state_stationary(self, grid, params):
        spec = PotentialSpec("harmonic", omega=1.0)
        u = spec.build(grid, params)
        psi0 = harmonic_ground_state(grid, params, 1.0)
        psi = psi0
        for _ in range(1000):
            psi = step_unitary(psi, u, params, 1e-3)
        overlap = abs(np.sum(np.conj(psi0.values) * psi.values) * grid.dx)
        assert overlap == pytest.approx(1.0, abs=1e-10)

    def test_plane_wave_exact(self, params):
        grid = Grid1D(2 * np.pi, 64)
        u = PotentialSpec("zero").build(grid, params)
        psi = plane_wave(grid, 3)
        k = mode_wavenumber(grid, 3)
        t = 0.37
        out = step_unitary(psi, u, params, t)
        expect = psi.values * np.exp(-1j * params.hbar * k**2 * t / (2 * params.mass))
        assert np.max(np.abs(out.values - expect)) < 1e-14

    def test_norm_conservation(self, grid, params):
        spec = PotentialSpec("harmonic", omega=1.0)
        u = spec.build(grid, params)
        psi = harmonic_ground_state(grid, params, 1.0, x_center=0.5)
        n0 = norm_squared(psi)
        for _ in range(1000):
            psi = step_unitary(psi, u, params, 1e-3)
        assert abs(norm_squared(psi) - n0) < 1e-11

    def test_energy_conservation(self, grid, params):
        spec = PotentialSpec("harmonic", omega=1.0)
        u = spec.build(grid, params)
        psi = harmonic_ground_state(grid, params, 1.0, x_center=1.0)
        e0 = expectation_energy(psi, u, params)
        for _ in range(1000):
            psi = step_unitary(psi, u, params, 5e-5)
        assert abs(expectation_energy(psi, u, params) - e0) < 1e-9 * abs(e0)

    def test_second_order_convergence(self, grid, params):
        spec = PotentialSpec("harmonic", omega=1.0)
        u = spec.build(grid, params)
        psi0 = harmonic_ground_state(grid, params, 1.0, x_center=1.0)
        t_final = 0.5

        def run(dt):
            psi = psi0
            for _ in range(round(t_final / dt)):
                psi = step_unitary(psi, u, params, dt)
            return psi.values

        ref = run(t_final / 1024)
        err = [np.max(np.abs(run(t_final / n) - ref)) for n in (32, 64, 128)]
        ratios = [err[i] / err[i + 1] for i in range(2)]
        assert all(3.2 < r < 4.8 for r in ratios)

    def test_warns_on_unnormalized(self, grid, params):
        u = PotentialSpec("zero").build(grid, params)
        psi = ComplexField(grid, 2.0 * gaussian_packet(grid, 1.0).values)
        with pytest.warns(UserWarning):
            step_unitary(psi, u, params, 1e-3)


class TestStepDiffusiveLinear:
    def test_damped_plane_wave_closed_form(self, params):
        grid = Grid1D(2 * np.pi, 64)
        u = PotentialSpec("zero").build(grid, params)
        psi0 = plane_wave(grid, 2)
        k, d, t = 2.0, 0.1, 1.0
        psi = psi0
        for _ in range(1000):
            psi = step_diffusive_linear(psi, u, d, params, t / 1000)
        ratio = psi.values[0] / psi0.values[0]
        assert abs(ratio) == pytest.approx(np.exp(-d * k**2 * t), rel=1e-10)
        phase = np.angle(ratio)
        assert phase == pytest.approx(-params.hbar * k**2 * t / (2 * params.mass),
                                      abs=1e-10)

    def test_zero_diffusion_is_bitwise_unitary(self, grid, params):
        u = PotentialSpec("harmonic", omega=1.0).build(grid, params)
        psi = harmonic_ground_state(grid, params, 1.0, x_center=0.3)
        a = step_unitary(psi, u, params, 1e-3)
        b = step_diffusive_linear(psi, u, 0.0, params, 1e-3)
        assert np.array_equal(a.values, b.values)

    def test_gaussian_matches_one_shot_spectral_oracle(self, grid, params):
        u = PotentialSpec("zero").build(grid, params)
        d, t, n = 0.05, 0.5, 100
        psi0 = gaussian_packet(grid, 1.0)
        psi = psi0
        for _ in range(n):
            psi = step_diffusive_linear(psi, u, d, params, t / n)
        mult = np.exp((-1j * params.hbar / (2 * params.mass) - d) * grid.k**2 * t)
        oracle = np.fft.ifft(mult * np.fft.fft(psi0.values))
        got = second_moment(grid, psi.values)
        want = second_moment(grid, oracle)
        assert got == pytest.approx(want, rel=1e-10)

    def test_norm_monotone_nonincreasing(self, grid, params):
        u = PotentialSpec("harmonic", omega=1.0).build(grid, params)
        psi = harmonic_ground_state(grid, params, 1.0, x_center=0.5)
        prev = norm_squared(psi)
        for _ in range(50):
            psi = step_diffusive_linear(psi, u, 0.1, params, 1e-2)
            cur = norm_squared(psi)
            assert cur <= prev + 1e-14
            prev = cur


class TestStepDoebnerGoldin:
    def test_plane_wave_reduces_to_unitary(self, params):
        grid = Grid1D(2 * np.pi, 64)
        u = PotentialSpec("zero").build(grid, params)
        psi_a = psi_b = plane_wave(grid, 3)
        for _ in range(50):
            psi_a = step_doebner_goldin(psi_a, u, 0.05, params, 1e-4)
            psi_b = step_unitary(psi_b, u, params, 1e-4)
        assert np.max(np.abs(psi_a.values - psi_b.values)) < 1e-13

    def test_mass_conservation(self, params):
        grid = Grid1D(40.0, 256)
        u = PotentialSpec("zero").build(grid, params)
        psi = gaussian_packet(grid, 2.0)
        m0 = norm_squared(psi)
        for _ in range(1000):
            psi = step_doebner_goldin(psi, u, 0.05, params, 5e-5)
        assert abs(norm_squared(psi) - m0) < 1e-8

    def test_linearization_agreement_for_near_flat_state(self, params):
        grid = Grid1D(40.0, 256)
        u = PotentialSpec("zero").build(grid, params)
        vals = 1.0 + 0.01 * np.cos(2 * np.pi * grid.x / grid.length)
        vals = vals / np.sqrt(np.sum(vals**2) * grid.dx)
        psi_a = psi_b = ComplexField(grid, vals.astype(complex))
        for _ in range(500):
            psi_a = step_doebner_goldin(psi_a, u, 0.05, params, 2e-4)
            psi_b = step_diffusive_linear(psi_b, u, 0.05, params, 2e-4)
        diff = np.sqrt(np.sum(np.abs(psi_a.values - psi_b.values) ** 2) * grid.dx)
        assert diff < 1e-3

    def test_zero_diffusion_reduction(self, grid, params):
        u = PotentialSpec("harmonic", omega=1.0).build(grid, params)
        psi = harmonic_ground_state(grid, params, 1.0, x_center=0.3)
        a = psi
        b = psi
        for _ in range(20):
            a = step_doebner_goldin(a, u, 0.0, params, 1e-3)
            b = step_unitary(b, u, params, 1e-3)
        assert np.max(np.abs(a.values - b.values)) < 1e-12

    def test_node_rejected(self, grid, params):
        u = PotentialSpec("zero").build(grid, params)
        vals = gaussian_packet(grid, 1.0).values.copy()
        vals[256] = 0.0  # zero in the occupied bulk
        with pytest.raises(NodeEncountered):
            step_doebner_goldin(ComplexField(grid, vals), u, 0.05, params, 1e-4)

    def test_dt_bound_enforced(self, grid, params):
        u = PotentialSpec("zero").build(grid, params)
        psi = gaussian_packet(grid, 1.0)
        too_big = 0.2 * grid.dx**2 / 0.05
        with pytest.raises(DomainError):
            step_doebner_goldin(psi, u, 0.05, params, too_big)


class TestExpectationEnergy:
    def test_harmonic_ground_state(self, grid, params):
        u = PotentialSpec("harmonic", omega=1.0).build(grid, params)
        psi = harmonic_ground_state(grid, params, 1.0)
        assert expectation_energy(psi, u, params) == pytest.approx(0.5, abs=1e-8)

    def test_plane_wave(self, params):
        grid = Grid1D(2 * np.pi, 64)
        u = PotentialSpec("zero").build(grid, params)
        psi = plane_wave(grid, 4)
        k = mode_wavenumber(grid, 4)
        expect = params.hbar**2 * k**2 / (2 * params.mass)
        assert expectation_energy(psi, u, params) == pytest.approx(expect, rel=1e-12)

    def test_free_gaussian_energy_constant(self, grid, params):
        u = PotentialSpec("zero").build(grid, params)
        psi = gaussian_packet(grid, 1.0)
        e0 = expectation_energy(psi, u, params)
        for _ in range(200):
            psi = step_unitary(psi, u, params, 0.01)
        assert abs(expectation_energy(psi, u, params) - e0) < 1e-10


class TestDiffusiveTermExpectation:
    @pytest.mark.parametrize("case", range(5))
    def test_zero_on_node_free_states(self, grid, params, case):
        builders = [
            lambda: gaussian_packet(grid, 1.0),
            lambda: gaussian_packet(grid, 2.0, x_center=3.0, k0=1.0),
            lambda: plane_wave(grid, 5),
            lambda: ComplexField(grid, plane_wave(grid, 2).values
                                 * (1 + 0.3 * np.exp(-grid.x**2))),
            lambda: harmonic_ground_state(grid, params, 2.0, x_center=-1.0),
        ]
        psi = builders[case]()
        val = diffusive_term_expectation(psi, 0.25, params)
        assert abs(val) < 1e-12
