"""qhydro: spectral quantum-hydrodynamics solvers and scenario runner."""

__version__ = "0.1.0"
