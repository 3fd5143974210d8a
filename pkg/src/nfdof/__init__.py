"""Near-field line-of-sight degrees of freedom in the distance domain.

A planar (or linear) transmit aperture in the x-z plane talks to a receive
array laid out along a ray from the origin.  The package builds the channel,
computes its eigenvalue spectrum, and compares the number of dominant
eigenvalues with closed-form predictions from the inverse-distance picture.
"""
__version__ = "0.1.0"

from .channel import (
    ChannelMatrix,
    ChannelModel,
    build_channel_matrix,
    exact_coefficient,
    fresnel_coefficient,
    max_phase_error,
    phase_error_terms,
)
from .dof import (
    DofPrediction,
    DominantCount,
    count_dominant,
    dof_broadside,
    dof_hole_fraction,
    dof_modular,
    dof_projected,
    dof_region,
    dof_upper_limit,
    dof_vs_rmin,
    interval_union,
    rayleigh_bound,
    rayleigh_distance,
)
from .geometry import (
    Annulus,
    ApertureRegion,
    DegenerateApertureError,
    Direction,
    Disk,
    ExtremeDistances,
    Module,
    Point,
    ReceiveArray,
    ReceiveSamples,
    Rectangle,
    SampledAperture,
    Segment,
    broadside,
    direction_vector,
    extreme_distances,
    project_aperture,
    projection_form,
    sample_aperture,
    sample_receive_array,
    sampled_extremes,
)
from .kernels import BACKEND
from .spectral import (
    EigenSpectrum,
    InverseDistanceGrid,
    SpectrumProfile,
    convolution_kernel_g,
    convolve_sinc,
    default_xi_grid,
    g0_spectrum,
    gram_eigenvalues,
    gram_matrix,
    inverse_distance_kernel,
    measured_bandwidth,
    omega_interval,
    t_domain_eigenvalues,
    transform_to_inverse_distance,
    weighted_eigenvalues,
)
