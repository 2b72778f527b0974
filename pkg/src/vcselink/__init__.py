"""Link-level simulator for indoor Tb/s MIMO optical wireless backhaul
built on VCSEL arrays: Gaussian-beam misalignment gains, MIMO SINR/rate
analysis and reproduction experiments."""

__version__ = "0.1.0"

from .beam import (
    BeamParams,
    beam_radius,
    curvature_radius,
    divergence_half_angle,
    intensity,
    rayleigh_range,
    waist_for_spot,
)
from .channel import (
    ArrayLayout,
    ChannelMatrix,
    GainMethod,
    LayoutKind,
    PdGeometry,
    build_layout,
    gain_aligned,
    gain_approx_displacement,
    gain_approx_tx_tilt,
    gain_gmm,
    mimo_matrix,
    read_gains_csv,
    write_gains_csv,
)
from .geometry import (
    GmmPointFrame,
    MisalignmentState,
    alignment_cosine,
    array_element_xy,
    gmm_point_frame,
    rotation_matrix,
    rx_element_pose,
    rx_normal,
    rx_point_to_ref,
    tx_element_pose,
    tx_normal,
)
from .linkbudget import (
    LinkParams,
    Mode,
    RateReport,
    aggregate_rate,
    bits_per_symbol,
    electrical_signal_power,
    eye_safe_power_limit,
    nmse,
    noise_variance,
    read_rates_csv,
    sinr_direct,
    sinr_gap,
    sinr_svd,
    svd_thin,
    write_rates_csv,
)
from .oracle import RayBundleSpec, RaySampling, ray_gain_mc
from .quadrature import DiskQuadratureError, QuadratureSpec, integrate_disk, integrate_disk_mc
from .scenario import ConfigError, Scenario, build_scenario, load_config, run_scenario

__all__ = [
    "__version__",
    "BeamParams",
    "beam_radius",
    "curvature_radius",
    "divergence_half_angle",
    "intensity",
    "rayleigh_range",
    "waist_for_spot",
    "ArrayLayout",
    "ChannelMatrix",
    "GainMethod",
    "LayoutKind",
    "PdGeometry",
    "build_layout",
    "gain_aligned",
    "gain_approx_displacement",
    "gain_approx_tx_tilt",
    "gain_gmm",
    "mimo_matrix",
    "read_gains_csv",
    "write_gains_csv",
    "GmmPointFrame",
    "MisalignmentState",
    "alignment_cosine",
    "array_element_xy",
    "gmm_point_frame",
    "rotation_matrix",
    "rx_element_pose",
    "rx_normal",
    "rx_point_to_ref",
    "tx_element_pose",
    "tx_normal",
    "LinkParams",
    "Mode",
    "RateReport",
    "aggregate_rate",
    "bits_per_symbol",
    "electrical_signal_power",
    "eye_safe_power_limit",
    "nmse",
    "noise_variance",
    "read_rates_csv",
    "sinr_direct",
    "sinr_gap",
    "sinr_svd",
    "svd_thin",
    "write_rates_csv",
    "RayBundleSpec",
    "RaySampling",
    "ray_gain_mc",
    "DiskQuadratureError",
    "QuadratureSpec",
    "integrate_disk",
    "integrate_disk_mc",
    "ConfigError",
    "Scenario",
    "build_scenario",
    "load_config",
    "run_scenario",
]
