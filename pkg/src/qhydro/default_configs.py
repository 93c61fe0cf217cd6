"""Built-in scenario configurations used by `qhydro check` and shipped as
reference .ini files."""

DEFAULT_CONFIGS = {
    "free_packet": """\
[scenario]
name = free_packet

[grid]
L = 40.0
N = 256

[physics]
sigma0 = 1.0

[run]
dt = 0.01
steps = 200
stride = 10
""",
    "damped_plane_wave": """\
[scenario]
name = damped_plane_wave

[grid]
L = 6.283185307179586
N = 64

[physics]
D = 0.1
k0 = 2

[run]
dt = 0.001
steps = 1000
stride = 100
""",
    "doebner_goldin": """\
[scenario]
name = doebner_goldin

[grid]
L = 40.0
N = 256

[physics]
D = 0.05
sigma0 = 2.0

[run]
dt = 5e-5
steps = 1000
stride = 100
""",
    "wigner_check": """\
[scenario]
name = wigner_check

[grid]
L = 40.0
N = 256

[physics]
sigma0 = 1.0
k0 = 1.0
omega = 1.0
""",
    "ergodic_average": """\
[scenario]
name = ergodic_average
""",
    "master_decoherence": """\
[scenario]
name = master_decoherence

[grid]
N = 32

[physics]
D = 0.01
omega = 1.0

[run]
dt = 0.001
steps = 1000
stride = 100
""",
    "dual_space_homogeneous": """\
[scenario]
name = dual_space_homogeneous

[physics]
E = 1.0
epsilon = 0.1
""",
    "dual_space_field": """\
[scenario]
name = dual_space_field

[grid]
L = 40.0
N = 256

[physics]
E = 1.0
epsilon = 0.05

[run]
dt = 0.001
steps = 3200
stride = 100
""",
    "qse_teleport_free": """\
[scenario]
name = qse_teleport_free

[grid]
L = 25.6
N = 192

[physics]
b = 1.0
kappa = 1.0
sigma0 = 0.38729833462074170

[run]
steps = 12700
stride = 500
""",
    "qse_teleport_harmonic": """\
[scenario]
name = qse_teleport_harmonic

[grid]
L = 20.0
N = 640

[physics]
b = 1.0
omega = 1.0

[run]
steps = 1000
""",
    "qse_thermal": """\
[scenario]
name = qse_thermal

[grid]
L = 25.6
N = 192

[physics]
b = 1.0
T = 2.5
kappa = 1.0
sigma0 = 0.38729833462074170

[run]
steps = 4000
stride = 400
""",
    "dispersion_tables": """\
[scenario]
name = dispersion_tables

[physics]
b = 1.0
kappa = 1.0
T = 25.0
""",
}
