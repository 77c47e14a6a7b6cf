"""grtlab: iterative circular-Radon reconstruction with predicted noise laws.

Subpackages map onto the pipeline: geometry (transform family and symbols),
sampling (data lattice, phantom, noise, thresholding), keys (interpolation),
operators (matrix-free projector pair and Dirichlet operators), solver
(Tikhonov gradient descent), theory (closed-form G and C predictions), and
harness (the impulse and Monte Carlo experiments behind the CLI).
"""

from .geometry import CIRCULAR, CLASSICAL, GrtModel, b0_symbol, chord_distance, delta_phi, dual_points, grad_x_phi, phi, phi_alpha_prime, q0
from .keys import keys_kernel, keys_kernel_ft
from .operators import Image, ImageGrid, ProjectorSpec, back_project, forward_project, grad_norm_sq, neg_laplacian
from .sampling import DataGrid, DiskPhantom, NoiseSpec, Sinogram, build_grid, forward_disk, hard_threshold, interpolate_fine, sample_noise, sigma_value
from .solver import SolveReport, SolverConfig, TomoOperators, estimate_step, solve
from .theory import KernelSpec, QuadratureSpec, TheoryCurve, covariance, covariance_via_correlation, g_kernel, g_kernel_convolution, gg_correlation, k0_kernel, variance_at, vartheta

__version__ = "0.1.0"
