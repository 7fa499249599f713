"""Heisenberg-limited Hamiltonian structure learning on a simulated device.

Layers, bottom up: exact Pauli-string algebra (pauli), sparse Pauli-sum
Hamiltonians and generators (hamiltonian), dense brute-force oracles
(evolution), the simulated metered device (device), the shadows and GL
estimators (shadows, gl), the learning algorithms (learner), invariant
suites (verify), and the command-line front door (cli).
"""

from .pauli import EigenPrep, PauliString, Phase, commutator, eig_expect, mul, subset
from .hamiltonian import (
    LatticeGeometry,
    SparsePauliSum,
    clip,
    commutator_sum,
    effective_sparsity,
    gen_low_intersection,
    gen_power_law,
    load_hamiltonian,
    local_norm_1,
    local_norm_2,
    nested_commutator,
    save_hamiltonian,
)
from .evolution import (
    AlternatingSpec,
    DenseOperator,
    alternating_unitary,
    exact_mu,
    expm_hermitian,
    first_order_residual,
    pauli_decompose,
    trotter_residual,
)
from .device import (
    DeviceConfig,
    EvolutionRequest,
    ResourceLedger,
    ShotRecord,
    SimulatedDevice,
)
from .shadows import ShadowDataset, build_shadow_dataset, shadow_query
from .gl import GLDataset, GLVerdict, build_gl_dataset, gl_query, weight_estimate
from .learner import (
    LearnerConfig,
    LearnerMode,
    LearnResult,
    bootstrap_learn,
    choose_anticommuting_pair,
    derivative_baseline,
    structure_learn,
)

__version__ = "0.1.0"
