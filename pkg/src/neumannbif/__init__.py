"""Neumann Laplacian spectra on the unit ball, bifurcation classification for
gradient systems with a critical orbit, and numerical verification on the disk."""

from .bifurcation_classifier import (
    BifurcationCandidate,
    ClassificationRecord,
    classify,
    classify_range,
    lambda_candidates,
    radial_only_test,
    symmetry_breaking_test,
)
from .euler_ring import EulerElement, So2RepDecomposition, chi_sphere, index_change_witness
from .neumann_spectrum import (
    RootCache,
    eigenspace_decomposition,
    eigenvalues_up_to,
    harmonic_dim,
    neumann_roots,
)
from .operator_spectrum import (
    kernel_description,
    kernel_dim,
    matrix_spectrum,
    morse_index,
    spectrum_id_minus_L,
)
from .special_functions import BesselOrder, bessel_j, bessel_j_prime, legendre_assoc

__version__ = "0.1.0"
