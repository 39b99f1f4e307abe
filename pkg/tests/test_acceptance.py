"""Acceptance suite: one test per release criterion, at pinned tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line per
criterion.
"""

import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from snowlidar import (
    ClutterTemplate,
    PointCloud,
    SensorConfig,
    SnowfallParams,
    Target,
    augment,
    calibrate_system_constant,
    expected_clutter_count,
    extinction_coefficient,
    median_efficiency,
    power_ratio,
    read_cloud,
    received_power,
    total_number_density,
    transmission,
    write_cloud,
)
from snowlidar.augmentation import (
    TEMPLATE_CAPTURE_RATE,
    AugmentationConfig,
    default_snowfall,
    resolve_config,
    shell_volume,
)
from snowlidar.lidar_model import CLEAR_AIR_EXTINCTION
from snowlidar.scattering import ConstantEfficiency, DEFAULT_DETECTOR_RADIUS


def report(num, message):
    print(f"ACCEPTANCE {num}: PASS - {message}")


def test_criterion_1_median_efficiency_reproduction():
    """Monte-Carlo median efficiency lands on the reference 1.97 +- 0.05."""
    start = time.perf_counter()
    median = median_efficiency(
        2000,
        (0.05e-3, 5e-3),
        (0.5, 50.0),  # lower bound clamped to the sensor minimum range
        SnowfallParams(5.0),
        detector_radius=DEFAULT_DETECTOR_RADIUS,
        wavelength=900e-9,
        seed=0,
    )
    elapsed = time.perf_counter() - start
    assert 1.92 <= median <= 2.02, f"median {median} outside [1.92, 2.02]"
    assert elapsed < 1.0, f"took {elapsed:.3f}s"
    report(1, f"median Q_eff = {median:.4f} in [1.92, 2.02], {elapsed * 1e3:.1f} ms")


def test_criterion_2_quadrature_correctness():
    """Extinction matches the closed form < 1e-6 rel on 100 draws; so does n_total."""

    def closed_form(lam, a, b):
        g = lambda x: -math.exp(-lam * x) * (x * x / lam + 2 * x / lam**2 + 2 / lam**3)
        return g(b) - g(a)

    rng = np.random.default_rng(2024)
    worst_alpha = 0.0
    worst_n = 0.0
    for _ in range(100):
        params = SnowfallParams(
            snowfall_rate=rng.uniform(0.5, 50.0),
            n0=rng.uniform(0.05, 2.0) * 1e8,
            d_min=rng.uniform(0.0, 1e-4),
            d_max=rng.uniform(1e-3, 2e-2),
            unit_scale=10.0 ** rng.uniform(-4, 1),
        )
        q = rng.uniform(1.0 + 1e-9, 2.0)
        expected = q * params.unit_scale * params.n0 * closed_form(
            params.slope(), params.d_min, params.d_max
        )
        alpha = extinction_coefficient(params, ConstantEfficiency(q))
        worst_alpha = max(worst_alpha, abs(alpha - expected) / expected)

        edges = np.linspace(params.d_min, params.d_max, 2**17 + 1)
        mids = 0.5 * (edges[:-1] + edges[1:])
        h = (params.d_max - params.d_min) / 2**17
        midpoint = float(
            np.sum(params.unit_scale * params.n0 * np.exp(-params.slope() * mids)) * h
        )
        worst_n = max(worst_n, abs(total_number_density(params) - midpoint) / midpoint)
    assert worst_alpha < 1e-6, f"alpha rel err {worst_alpha:.2e}"
    assert worst_n < 1e-6, f"n_total rel err {worst_n:.2e}"
    report(2, f"worst rel err: alpha {worst_alpha:.2e}, n_total {worst_n:.2e} (< 1e-6)")


def test_criterion_3_monotone_physics():
    """alpha strictly increases with rate; the power ratio decays with range."""
    grid = (1.0, 2.0, 5.0, 10.0, 20.0, 35.0)
    alphas = [extinction_coefficient(SnowfallParams(sr)) for sr in grid]
    assert all(b > a for a, b in zip(alphas, alphas[1:])), alphas

    r = np.linspace(0.0, 200.0, 2000)
    ratio = power_ratio(r, 0.02, CLEAR_AIR_EXTINCTION)
    assert ((ratio > 0.0) & (ratio <= 1.0)).all()
    assert (np.diff(ratio) < 0.0).all()
    report(3, f"alpha(Sr) strictly increasing over {grid}; ratio in (0, 1] and decreasing")


def test_criterion_4_range_equation_ratio_consistency():
    """Received-power ratios equal the closed-form power ratio to 1e-12."""
    sensor = SensorConfig(system_constant=250.0)
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        r = rng.uniform(0.6, 150.0)
        alpha_clear = rng.uniform(0.0, 0.02)
        alpha_snow = alpha_clear + rng.uniform(0.0, 0.08)
        beta = rng.uniform(0.05, 1.0)
        p_snow = received_power(Target(r, beta), alpha_snow, sensor)
        p_clear = received_power(Target(r, beta), alpha_clear, sensor)
        expected = power_ratio(r, alpha_snow, alpha_clear)
        worst = max(worst, abs(p_snow / p_clear - expected) / expected)
    assert worst < 1e-12, f"worst rel err {worst:.2e}"
    report(4, f"1000 tuples, worst rel err {worst:.2e} (< 1e-12)")


def test_criterion_5_calibration_round_trip(clear_cloud_100k, template):
    """Gain calibration inverts the range equation; injected radiometry matches."""
    sensor = SensorConfig()
    rng = np.random.default_rng(11)
    c_true, beta, alpha = 57.25, 0.4, 0.013
    ranges = rng.uniform(0.6, 10.0, 500)
    truth = SensorConfig(system_constant=c_true)
    intensities = np.array([received_power(Target(r, beta), alpha, truth) for r in ranges])
    c_est = calibrate_system_constant(np.column_stack([ranges, intensities]), beta, alpha, sensor)
    recovered = np.array(
        [received_power(Target(r, beta), alpha, sensor.with_system_constant(c_est)) for r in ranges]
    )
    worst = float(np.max(np.abs(recovered - intensities) / intensities))
    assert worst < 1e-9, f"round-trip rel err {worst:.2e}"

    config = AugmentationConfig(snowfall=default_snowfall(TEMPLATE_CAPTURE_RATE), seed=5)
    out, rep = augment(clear_cloud_100k, config, template)
    injected = out.points[rep.n_kept :, 3].astype(np.float64)
    mean = float(injected.mean())
    below5 = float(np.mean(injected < 5.0))
    assert 1.0 <= mean <= 2.0, f"injected mean {mean}"
    assert below5 >= 0.90, f"only {below5:.2%} below 5"
    report(
        5,
        f"round-trip rel err {worst:.2e} (< 1e-9); injected mean {mean:.3f} in [1, 2], "
        f"{below5:.1%} below 5",
    )


def test_criterion_6_clear_air_sanity():
    """Clear-air transmission over 100 m stays within 2e-4 of unity."""
    t = transmission(100.0, 1.52e-6)
    assert t >= 0.9998
    report(6, f"transmission(100 m) = {t:.6f} >= 0.9998")


def test_criterion_7_pipeline_determinism(cloud_files, tmp_path):
    """Three CLI runs and two thread settings produce byte-identical artifacts."""
    outputs = []
    for i, threads in enumerate(("1", "4", "8")):
        out = tmp_path / f"run{i}.bin"
        env = dict(os.environ)
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            env[var] = threads
        proc = subprocess.run(
            [sys.executable, "-m", "snowlidar.cli", "augment",
             str(cloud_files["clear"]), str(out), "--sr", "5", "--seed", "99"],
            capture_output=True,
            text=True,
            env=env,
        )
        assert proc.returncode == 0, proc.stderr
        outputs.append((out.read_bytes(), (tmp_path / f"run{i}.bin.meta.json").read_bytes()))
    assert outputs[0] == outputs[1] == outputs[2]
    report(7, "3 runs x thread settings {1,4,8}: cloud and metadata bytes identical")


def test_criterion_8_fixed_point_and_monotone_degradation(cloud_files, clear_cloud_100k, template):
    """A vanishing rate is the identity; heavier snow only degrades further."""
    out = cloud_files["root"] / "fixedpoint.bin"
    code = subprocess.run(
        [sys.executable, "-m", "snowlidar.cli", "augment",
         str(cloud_files["clear"]), str(out), "--sr", "1e-30"],
        capture_output=True,
    ).returncode
    assert code == 0
    assert out.read_bytes() == cloud_files["clear"].read_bytes()

    cfg2 = AugmentationConfig(snowfall=default_snowfall(2.0), seed=6)
    cfg10 = AugmentationConfig(snowfall=default_snowfall(10.0), seed=6)
    out2, r2 = augment(clear_cloud_100k, cfg2, template)
    out10, r10 = augment(clear_cloud_100k, cfg10, template)
    assert r10.n_dropped >= r2.n_dropped

    # pointwise comparison of survivors via the scalar attenuation law
    ranges = clear_cloud_100k.ranges()
    intensity = clear_cloud_100k.intensity.astype(np.float64)
    i2 = (intensity * np.exp(-2.0 * (r2.snow_extinction - r2.clear_extinction) * ranges)).astype(np.float32)
    i10 = (intensity * np.exp(-2.0 * (r10.snow_extinction - r10.clear_extinction) * ranges)).astype(np.float32)
    keep2 = i2 >= np.float32(1.0)
    keep10 = i10 >= np.float32(1.0)
    assert np.array_equal(out2.points[: r2.n_kept, 3], i2[keep2])
    assert np.array_equal(out10.points[: r10.n_kept, 3], i10[keep10])
    assert not (keep10 & ~keep2).any()  # heavier snow never resurrects a point
    assert (i10 <= i2).all()
    report(
        8,
        f"Sr->0 reproduces input bytes; Sr=10 vs Sr=2: pointwise <= and "
        f"drops {r10.n_dropped} >= {r2.n_dropped}",
    )


def test_criterion_9_injected_geometry(clear_cloud_100k, template):
    """Every injected clutter point sits inside the 0.5-10 m shell."""
    config = AugmentationConfig(snowfall=default_snowfall(5.0), seed=23)
    out, rep = augment(clear_cloud_100k, config, template)
    assert rep.n_injected > 0
    radii = np.linalg.norm(out.points[rep.n_kept :, :3].astype(np.float64), axis=1)
    assert radii.min() >= 0.5, f"min injected range {radii.min()}"
    assert radii.max() <= 10.0, f"max injected range {radii.max()}"
    report(9, f"{rep.n_injected} injected points, ranges [{radii.min():.3f}, {radii.max():.3f}] m")


def test_criterion_10_performance_and_round_trip(clear_cloud_100k, template, tmp_path):
    """100k-point augmentation with 5000 injections inside 2 s; I/O bit-exact."""
    count_basis = AugmentationConfig(snowfall=default_snowfall(5.0)).count_params()
    f_det = 5000.0 / (total_number_density(count_basis) * shell_volume(template.shell))
    config = AugmentationConfig(
        snowfall=default_snowfall(5.0), detection_fraction=f_det, seed=3
    )
    resolved = resolve_config(config, template)
    assert expected_clutter_count(
        resolved.count_params(), template.shell, resolved.detection_fraction
    ) == 5000

    start = time.perf_counter()
    out, rep = augment(clear_cloud_100k, resolved, template)
    elapsed = time.perf_counter() - start
    assert rep.n_injected == 5000
    assert elapsed < 2.0, f"augment took {elapsed:.3f}s"

    path = tmp_path / "roundtrip.bin"
    write_cloud(out, path)
    back = read_cloud(path)
    assert back.points.tobytes() == out.points.tobytes()
    report(10, f"augment(100k + 5000 inject) in {elapsed * 1e3:.0f} ms; binary round-trip bit-exact")
