"""snowlidar: physics-based snowfall simulation for automotive LiDAR clouds.

Computes snow extinction from particle-size distributions, rescales return
intensities through the LiDAR range equation, and injects near-sensor snow
clutter calibrated against empirical measurements. See the README for the
model conventions and the command-line interface.
"""

from .augmentation import (
    AugmentationConfig,
    AugmentationReport,
    attenuate,
    augment,
    calibrate_detection_fraction,
    default_snowfall,
    expected_clutter_count,
    extract_template,
    inject_clutter,
)
from .cloud import CloudMeta, ClutterTemplate, PointCloud
from .estimator import SnowfallAugmenter
from .lidar_model import (
    CLEAR_AIR_EXTINCTION,
    SensorConfig,
    Target,
    calibrate_system_constant,
    overlap,
    power_ratio,
    received_power,
    transmission,
)
from .pointcloud_io import (
    RunMetadata,
    read_cloud,
    read_metadata,
    read_template,
    write_cloud,
    write_metadata,
    write_template,
)
from .quadrature import QuadratureConfig, QuadratureError
from .scattering import (
    ConstantEfficiency,
    DiffractionGeometry,
    DistanceDependentEfficiency,
    MonteCarloMedianEfficiency,
    SnowfallParams,
    diffraction_parameter,
    efficiency_population,
    extinction_coefficient,
    extinction_efficiency,
    median_efficiency,
    size_distribution,
    total_number_density,
)

__version__ = "0.1.0"

__all__ = [
    "AugmentationConfig",
    "AugmentationReport",
    "CLEAR_AIR_EXTINCTION",
    "CloudMeta",
    "ClutterTemplate",
    "ConstantEfficiency",
    "DiffractionGeometry",
    "DistanceDependentEfficiency",
    "MonteCarloMedianEfficiency",
    "PointCloud",
    "QuadratureConfig",
    "QuadratureError",
    "RunMetadata",
    "SensorConfig",
    "SnowfallAugmenter",
    "SnowfallParams",
    "Target",
    "attenuate",
    "augment",
    "calibrate_detection_fraction",
    "calibrate_system_constant",
    "default_snowfall",
    "diffraction_parameter",
    "efficiency_population",
    "expected_clutter_count",
    "extinction_coefficient",
    "extinction_efficiency",
    "extract_template",
    "inject_clutter",
    "median_efficiency",
    "overlap",
    "power_ratio",
    "read_cloud",
    "read_metadata",
    "read_template",
    "received_power",
    "size_distribution",
    "total_number_density",
    "transmission",
    "write_cloud",
    "write_metadata",
    "write_template",
]
