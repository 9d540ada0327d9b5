"""corrspec: recover local spin-chain Hamiltonians from a single eigenstate.

The pipeline: build the orthonormal basis of range-k local operators,
evaluate the matrix of connected two-point correlations in a state, and read
the Hamiltonian off the kernel of that matrix.  Band structure over momentum,
perturbation sensitivity, and subregion/thermal recovery are layered on top.
"""

__version__ = "0.1.0"

from .basis import LatticeSpec, LocalBasis, PauliString, build_local_basis, hs_inner
from .hamiltonians import (
    LocalHamiltonian,
    assemble_dense,
    coefficient_angle,
    named_model,
    random_disordered,
    random_translation_invariant,
)

__all__ = [
    "LatticeSpec",
    "LocalBasis",
    "PauliString",
    "build_local_basis",
    "hs_inner",
    "LocalHamiltonian",
    "assemble_dense",
    "coefficient_angle",
    "named_model",
    "random_disordered",
    "random_translation_invariant",
    "__version__",
]
