"""Spectra of 2D Dirac operators with delta-shell interactions on curves."""

from .dirac_core import InteractionParams, green_kernel, isospectral_partners, is_confined, is_critical
from .band_structure import SpectrumReport, essential_spectrum
from .curve_geometry import build_curve, sample_curve, smoothed_corner, straight_line, perturbed_line
from .boundary_integral import assemble_cz, bs_eigenvalue_scan
from .schrodinger_reference import assemble_single_layer, schrodinger_eigenvalues
from .bound_state_certifier import CertificateInput, bracket, find_omega_star

__version__ = "0.1.0"
