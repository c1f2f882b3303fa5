"""Lattice point count variance for dilated, rotated and shifted bodies."""

from .geometry import Shape, covariogram, isotropic_covariogram, surface_measure, volume
from .lattice import Lattice, SingularGenerator, epstein_sum, lattice_constant, make_lattice
from .spectral import SpectralDensity, fourier_indicator, hankel_transform
from .variance import (
    PhiProfile,
    TailBoundFailure,
    VarianceEstimate,
    asymptote,
    mean_count,
    phi_profile,
    psi_profile,
    variance_isotropic,
    variance_mc,
    variance_spectral,
)

__version__ = "0.1.0"
