"""
critmetro is a Python package for multiparameter quantum metrology of
spin chains near first- and second-order quantum phase transitions.

Features:

- Sparse Pauli-string Hamiltonians of the ferro- and antiferromagnetic Ising chains and the XY chain
- Block Lanczos ground states with consistent branch selection inside degenerate doublets
- Quantum Fisher information matrix from fidelity ladders, Berry curvature from Bargmann loops
- Quantumness R of any parameter subset, with pseudo-inverse regularization
- Free-fermion evaluation of the XY rotation protocol for chains of hundreds of spins
- Finite-size scaling fits, critical-point location and drop-rate analysis
- Deterministic parallel parameter scans with CSV and JSON output
"""

__version__ = '0.1.1'

from .coefs import coefficients
from .operators import SparseOperator, SpinAxis, pauli_string, pauli_sum, commutator
from .models import ModelKind, ModelSpec, build_hamiltonian, build_global_spin, build_transverse_parity
from .eigen import (ConvergenceError, EigenResult, lanczos_lowest, ground_state_tracked, select_ground,
                    solve_lowest)
from .families import GroundStateFamily, RotatedFamily, BlochFamily
from .metrology import (MetroTensors, LoopSpec, FitResidualError, fidelity, bargmann_phase,
                        qfim_fidelity, muc_bargmann, spin_covariance_qfim, quantumness,
                        quantumness_det, metro_point)
from .freefermion import FreeFermionSolution, SpinMoments, solve_xy, spin_moments, xy_rotation_metrology
from .scaling import (FitResult, ScalingReport, fit_power_law, fit_exponential,
                      locate_critical_point, drop_rate, gap_scaling, qfim_first_order_scaling)
