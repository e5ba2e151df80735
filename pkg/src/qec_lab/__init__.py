"""Bosonic quantum error correction toolkit.

Truncated Fock-space operators, excitation-loss and Kerr channels, bosonic
code families, structured and SDP-optimal recoveries, biconvex code
optimization, GKP lattice algebra and multi-qubit codeword checks.
"""

from .channels import (QuantumChannel, ChoiMatrix, compose, joint_loss_kerr, kerr_channel,
                       loss_channel)
from .codes import (BosonicCode, binomial_code, cat_code, custom_code, sab_code, sac_code,
                    sqrt17_code)
from .errors import QecLabError
from .metrics import channel_fidelity, effective_qubit_channel, kl_check, qec_matrix
from .recovery import (one_level_recovery, optimal_recovery, solve_optimal_recovery,
                       two_level_recovery)

__version__ = "0.1.0"

__all__ = [
    "QuantumChannel", "ChoiMatrix", "compose", "joint_loss_kerr", "kerr_channel", "loss_channel",
    "BosonicCode", "binomial_code", "cat_code", "custom_code", "sab_code", "sac_code", "sqrt17_code",
    "QecLabError", "channel_fidelity", "effective_qubit_channel", "kl_check", "qec_matrix",
    "one_level_recovery", "optimal_recovery", "solve_optimal_recovery", "two_level_recovery",
]
