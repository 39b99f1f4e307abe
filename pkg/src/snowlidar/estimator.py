"""Scikit-learn style estimator wrapping the augmentation pipeline.

``SnowfallAugmenter`` follows the transformer contract -- ``fit`` calibrates
sensor gain and detection fraction against a clutter template, ``transform``
maps an (n, 4) clear-weather point array to an (m, 4) snowy one -- so it
composes with the usual ecosystem tooling (``get_params``/``set_params``,
``clone``). Note the transform changes the number of samples: it drops
sub-floor returns and appends clutter.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .augmentation import (
    CALIBRATED_UNIT_SCALE,
    TEMPLATE_CAPTURE_RATE,
    AugmentationConfig,
    AugmentationReport,
    augment,
    resolve_config,
    snow_extinction,
)
from .cloud import ClutterTemplate, PointCloud
from .lidar_model import CLEAR_AIR_EXTINCTION, SensorConfig
from .scattering import (
    DEFAULT_DETECTOR_RADIUS,
    ConstantEfficiency,
    SnowfallParams,
)
from .validation import check_points


class SnowfallAugmenter(TransformerMixin, BaseEstimator):
    """Transform clear-weather LiDAR point arrays into synthetic snowfall scenes.

    Parameters
    ----------
    snowfall_rate : float
        Liquid-equivalent snowfall rate to simulate, mm/h.
    template : ClutterTemplate or None
        Empirical near-sensor clutter template used for calibration and
        injection. None selects the bundled synthetic fixture.
    unit_scale : float
        Multiplier on the PSD number density; the default is the calibrated
        augmentation scale (see README on units).
    drop_threshold : float
        Raw-intensity detector floor; attenuated returns below it are dropped.
    jitter_sigma : float
        Std of the Gaussian perturbation applied to resampled clutter, m.
    detection_fraction : float or None
        Fraction of physical particles that register as returns; None
        calibrates it from the template during ``fit``.
    seed : int
        Seed for all injection randomness; fixed seeds reproduce outputs
        byte for byte.
    efficiency_value : float
        Scalar extinction efficiency used in the extinction integral.
    wavelength, detector_radius, min_range, full_overlap_range, max_range,
    clear_air_extinction : float
        Sensor parameters; see :class:`snowlidar.lidar_model.SensorConfig`.
    template_rate : float
        Snowfall rate during the template capture, mm/h.

    Attributes
    ----------
    config_ : AugmentationConfig
        Fully resolved configuration after ``fit``.
    system_constant_ : float
        Calibrated sensor gain.
    detection_fraction_ : float
        Calibrated (or passed-through) detection fraction.
    snow_extinction_ : float
        Total extinction of the simulated medium, 1/m.
    report_ : AugmentationReport
        Accounting for the most recent ``transform``.
    """

    def __init__(
        self,
        snowfall_rate: float = 5.0,
        template: ClutterTemplate | None = None,
        unit_scale: float = CALIBRATED_UNIT_SCALE,
        drop_threshold: float = 1.0,
        jitter_sigma: float = 0.15,
        detection_fraction: float | None = None,
        seed: int = 0,
        efficiency_value: float = 1.97,
        wavelength: float = 905e-9,
        detector_radius: float = DEFAULT_DETECTOR_RADIUS,
        min_range: float = 0.5,
        full_overlap_range: float = 4.0,
        max_range: float = 200.0,
        clear_air_extinction: float = CLEAR_AIR_EXTINCTION,
        template_rate: float = TEMPLATE_CAPTURE_RATE,
    ):
        self.snowfall_rate = snowfall_rate
        self.template = template
        self.unit_scale = unit_scale
        self.drop_threshold = drop_threshold
        self.jitter_sigma = jitter_sigma
        self.detection_fraction = detection_fraction
        self.seed = seed
        self.efficiency_value = efficiency_value
        self.wavelength = wavelength
        self.detector_radius = detector_radius
        self.min_range = min_range
        self.full_overlap_range = full_overlap_range
        self.max_range = max_range
        self.clear_air_extinction = clear_air_extinction
        self.template_rate = template_rate

    def _build_config(self) -> AugmentationConfig:
        snowfall = SnowfallParams(snowfall_rate=self.snowfall_rate, unit_scale=self.unit_scale)
        sensor = SensorConfig(
            wavelength=self.wavelength,
            detector_radius=self.detector_radius,
            min_range=self.min_range,
            full_overlap_range=self.full_overlap_range,
            max_range=self.max_range,
            clear_air_extinction=self.clear_air_extinction,
        )
        return AugmentationConfig(
            snowfall=snowfall,
            sensor=sensor,
            efficiency=ConstantEfficiency(self.efficiency_value),
            drop_threshold=self.drop_threshold,
            jitter_sigma=self.jitter_sigma,
            detection_fraction=self.detection_fraction,
            seed=self.seed,
            template_rate=self.template_rate,
        )

    def fit(self, X=None, y=None) -> "SnowfallAugmenter":
        """Calibrate sensor gain and detection fraction from the template.

        ``X`` is accepted for pipeline compatibility and ignored: calibration
        is driven entirely by the clutter template.
        """
        if self.template is None:
            from .fixtures import clutter_template

            template = clutter_template()
        else:
            template = self.template
        self.template_ = template
        self.config_ = resolve_config(self._build_config(), template)
        self.system_constant_ = self.config_.sensor.system_constant
        self.detection_fraction_ = self.config_.detection_fraction
        self.snow_extinction_ = snow_extinction(self.config_)
        return self

    def transform(self, X) -> np.ndarray:
        """Augment an (n, 4) point array; returns the (m, 4) snowy array."""
        if not hasattr(self, "config_"):
            raise RuntimeError("this SnowfallAugmenter instance is not fitted yet")
        cloud = PointCloud(points=check_points(X))
        out, report = augment(cloud, self.config_, self.template_)
        self.report_ = report
        return out.points

    def augment_cloud(self, cloud: PointCloud) -> tuple[PointCloud, AugmentationReport]:
        """Full-fidelity entry point preserving cloud metadata and the report."""
        if not hasattr(self, "config_"):
            raise RuntimeError("this SnowfallAugmenter instance is not fitted yet")
        return augment(cloud, self.config_, self.template_)
