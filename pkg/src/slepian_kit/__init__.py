"""Spectral concentration toolkit: operators, eigensolvers, oracles, CLI.

The library builds the discrete concentration matrix K = D* B D for
arbitrary space/Fourier masks on midpoint grids, applies it fast through
exact circulant FFT products, harvests robust eigenvector bases with the
varying-masks sweep, and cross-checks everything against closed forms
(Gaussian/Hermite, commuting quadric operators, DPSS, splitting).
"""

from .eigensolve import (
    Certificate,
    ConvergenceError,
    DegenerateInputError,
    EigenPair,
    Spectrum,
    concentration_ratio,
    full_hermitian_eig,
    orthogonalize,
    projection_error_certificate,
    top_eigenpair_deflated,
)
from .geometry import (
    Ball,
    DEFAULT_LAW,
    FOURIER,
    Gaussian,
    GeneralQuadric,
    Grid,
    Interval,
    MaskDomainError,
    MaskFamily,
    MaskSpec,
    Quadric,
    RasterShape,
    SPACE,
    ShrinkLaw,
    cat_head,
    cat_head_indicator,
    fourier_grid,
    mu,
    sample_mask,
    space_grid,
)
from .operator import (
    ConcentrationMatrix,
    DimensionError,
    FastOperator,
    KernelSamples,
    StructureReport,
    apply_fast,
    assemble_dense,
    hilbert_schmidt_checks,
    kernel_samples,
    read_kernel_dump,
    read_matrix_dump,
    write_kernel_dump,
    write_matrix_dump,
)
from .varying_masks import (
    DiagnosticReport,
    ReferenceEigenvalues,
    RunRecord,
    VaryingConfig,
    assumption_diagnostic,
    epsilon_schedule,
    reference_eigenvalue,
    run,
)

__version__ = "0.1.0"
