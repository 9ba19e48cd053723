import math

import numpy as np
import pytest

from svchannel.extraction import (
    ExtractedParameters,
    InsufficientDataError,
    InvalidFitError,
    MpcSet,
    aggregate_over_bin,
    detect_mpcs,
    estimate_arrival_rates,
    extract_parameters,
    fit_cluster_decay,
    fit_ray_decay,
    segment_clusters,
)
from svchannel.metrics import Pdp

DB_PER_NS_AT_GAMMA_1 = -10.0 / math.log(10.0)  # -4.342944819 dB/ns


def pdp(powers, dt=0.125, **kw):
    return Pdp(powers=np.asarray(powers, dtype=float), delay_resolution_ns=dt, **kw)


def mpcs(delays, powers, labels=None):
    return MpcSet(delays_ns=np.asarray(delays, float), powers=np.asarray(powers, float), labels=labels)


# ---------------------------------------------------------------- detection


def test_detect_peaks_above_mean():
    # mean is 0.36, so the 1.0 and 0.5 local maxima qualify
    found = detect_mpcs(pdp([0.1, 1.0, 0.1, 0.5, 0.1], dt=1.0))
    np.testing.assert_array_equal(found.delays_ns, [1.0, 3.0])
    np.testing.assert_array_equal(found.powers, [1.0, 0.5])
    assert found.labels is None


def test_detect_monotone_decay_gives_boundary_peak():
    found = detect_mpcs(pdp([1.0, 0.5, 0.25, 0.125], dt=1.0))
    np.testing.assert_array_equal(found.delays_ns, [0.0])


def test_detect_single_tap():
    found = detect_mpcs(pdp([0.0, 0.0, 1.0, 0.0], dt=0.5))
    np.testing.assert_array_equal(found.delays_ns, [1.0])


def test_detect_plateau_resolves_to_first_bin():
    found = detect_mpcs(pdp([0.1, 0.8, 0.8, 0.1, 0.0], dt=1.0))
    np.testing.assert_array_equal(found.delays_ns, [1.0])


def test_detect_flat_pdp_has_no_peak_above_mean():
    with pytest.raises(InsufficientDataError):
        detect_mpcs(pdp([1.0, 1.0, 1.0, 1.0]))


# ---------------------------------------------------------------- segmentation


def test_segment_splits_at_largest_gap():
    found = mpcs([0.0, 0.2, 0.4, 3.0, 3.2], [1.0, 0.5, 0.3, 0.2, 0.1])
    labeled = segment_clusters(found, 2)
    np.testing.assert_array_equal(labeled.labels, [1, 1, 1, 2, 2])


def test_segment_single_cluster_keeps_everything():
    found = mpcs([0.0, 0.2, 0.4], [1.0, 0.5, 0.3])
    labeled = segment_clusters(found, 1)
    np.testing.assert_array_equal(labeled.labels, [1, 1, 1])


def test_segment_tie_breaks_toward_earlier_gap():
    found = mpcs([0.0, 1.0, 2.0, 3.0], [1.0, 0.8, 0.6, 0.4])
    labeled = segment_clusters(found, 2)
    np.testing.assert_array_equal(labeled.labels, [1, 2, 2, 2])


def test_segment_requires_enough_peaks():
    found = mpcs([0.0, 0.2], [1.0, 0.5])
    with pytest.raises(InsufficientDataError):
        segment_clusters(found, 3)


def test_segment_is_invariant_under_power_scaling():
    delays = [0.0, 0.3, 1.5, 1.8, 4.0]
    powers = np.array([1.0, 0.7, 0.4, 0.3, 0.2])
    a = segment_clusters(mpcs(delays, powers), 3)
    b = segment_clusters(mpcs(delays, 40.0 * powers), 3)
    np.testing.assert_array_equal(a.labels, b.labels)


def test_mpcset_validation():
    with pytest.raises(ValueError):
        mpcs([1.0, 0.5], [1.0, 1.0])  # unsorted delays
    with pytest.raises(ValueError):
        mpcs([0.0, 0.5], [1.0, 1.0], labels=np.array([2, 2]))  # labels must start at 1
    with pytest.raises(ValueError):
        mpcs([0.0, 0.5], [1.0, 1.0], labels=np.array([2, 1]))  # non-decreasing


# ---------------------------------------------------------------- decay fits


def test_fit_ray_decay_unit_time_constant():
    delays = np.array([0.0, 0.5, 1.0])
    powers = np.exp(-delays / 1.0)
    assert fit_ray_decay(delays, powers) == pytest.approx(1.0, rel=1e-9)


def test_fit_ray_decay_two_point_line():
    # (0 ns, 0 dB) and (1 ns, -4.3429 dB) is exactly gamma = 1 ns
    gamma = fit_ray_decay([0.0, 1.0], [1.0, 10.0 ** (DB_PER_NS_AT_GAMMA_1 / 10.0)])
    assert gamma == pytest.approx(1.0, rel=1e-12)


def test_fit_ray_decay_random_noiseless_exponentials():
    rng = np.random.default_rng(41)
    for _ in range(100):
        gamma = rng.uniform(0.1, 10.0)
        n = rng.integers(2, 12)
        delays = np.sort(rng.uniform(0.0, 5.0 * gamma, size=n))
        delays[0] = 0.0
        powers = 0.7 * np.exp(-delays / gamma)
        assert fit_ray_decay(delays, powers) == pytest.approx(gamma, rel=1e-9)


def test_fit_uses_delays_relative_to_first_peak():
    # same slope, shifted start: identical constant
    delays = np.array([2.0, 2.5, 3.0])
    powers = 0.1 * np.exp(-(delays - 2.0) / 0.4)
    assert fit_ray_decay(delays, powers) == pytest.approx(0.4, rel=1e-9)


def test_fit_ray_decay_errors():
    with pytest.raises(InsufficientDataError):
        fit_ray_decay([0.0], [1.0])
    with pytest.raises(InvalidFitError):
        fit_ray_decay([0.0, 1.0], [0.5, 1.0])  # rising


def test_fit_cluster_decay_two_point_line():
    # (0, 0 dB), (2 ns, -8.6859 dB) -> Gamma = 1 ns
    gamma = fit_cluster_decay([0.0, 2.0], [1.0, 10.0 ** (-8.685889638065037 / 10.0)])
    assert gamma == pytest.approx(1.0, rel=1e-12)


def test_fit_cluster_decay_errors():
    with pytest.raises(InsufficientDataError):
        fit_cluster_decay([0.0], [1.0])
    with pytest.raises(InvalidFitError):
        fit_cluster_decay([0.0, 2.0], [0.5, 0.5])  # identical lead powers, slope 0


# ---------------------------------------------------------------- arrival rates


def test_rates_from_hand_computed_gaps():
    labeled = mpcs(
        [0.0, 0.2, 0.4, 4.0, 4.2],
        [1.0, 0.5, 0.3, 0.2, 0.1],
        labels=np.array([1, 1, 1, 2, 2]),
    )
    lambdas, big_lambda = estimate_arrival_rates(labeled)
    assert lambdas[0] == pytest.approx(5.0, rel=1e-12)  # mean gap 0.2 ns
    assert lambdas[1] == pytest.approx(5.0, rel=1e-12)
    assert big_lambda == pytest.approx(0.25, rel=1e-12)  # leads at 0 and 4 ns


def test_single_gap_rate():
    labeled = mpcs([0.0, 0.17], [1.0, 0.5], labels=np.array([1, 1]))
    lambdas, big_lambda = estimate_arrival_rates(labeled)
    assert lambdas[0] == pytest.approx(5.882, abs=5e-4)
    assert math.isnan(big_lambda)  # only one cluster


def test_rates_flag_insufficient_clusters():
    labeled = mpcs([0.0, 0.5, 3.0], [1.0, 0.5, 0.3], labels=np.array([1, 1, 2]))
    lambdas, big_lambda = estimate_arrival_rates(labeled)
    assert lambdas[0] == pytest.approx(2.0, rel=1e-12)
    assert math.isnan(lambdas[1])  # single-peak cluster
    assert big_lambda == pytest.approx(1.0 / 3.0, rel=1e-12)


def test_rates_scale_exactly_with_delay_units():
    delays = np.array([0.0, 0.25, 0.75, 4.0, 4.5])
    labels = np.array([1, 1, 1, 2, 2])
    powers = np.linspace(1.0, 0.2, 5)
    base, base_l = estimate_arrival_rates(mpcs(delays, powers, labels=labels))
    for c in (2.0, 0.5, 4.0):  # powers of two keep the arithmetic exact
        scaled, scaled_l = estimate_arrival_rates(mpcs(c * delays, powers, labels=labels))
        np.testing.assert_array_equal(scaled, base / c)
        assert scaled_l == base_l / c
    scaled, scaled_l = estimate_arrival_rates(mpcs(1.7 * delays, powers, labels=labels))
    np.testing.assert_allclose(scaled, base / 1.7, rtol=1e-12)


def test_rates_require_labels():
    with pytest.raises(ValueError):
        estimate_arrival_rates(mpcs([0.0, 0.2], [1.0, 0.5]))


# ---------------------------------------------------------------- full pipeline


def synthetic_two_cluster_pdp(gamma1=0.2, gamma2=0.5, big_gamma=1.5, t2=4.0, dt=0.1):
    """Noiseless two-cluster profile whose peaks sit exactly on the model envelope."""
    n_bins = 100
    powers = np.zeros(n_bins)
    for j in (0, 2, 4, 6):  # cluster 1 peaks every 0.2 ns
        tau = j * dt
        powers[j] = math.exp(-tau / gamma1)
    lead2 = math.exp(-t2 / big_gamma)
    for j in (0, 2, 4, 6):  # cluster 2 peaks, offset by t2
        tau = j * dt
        powers[int(round(t2 / dt)) + j] = lead2 * math.exp(-tau / gamma2)
    return Pdp(powers=powers, delay_resolution_ns=dt)


def test_extract_parameters_recovers_synthetic_exactly():
    p = synthetic_two_cluster_pdp()
    result = extract_parameters(p, 2)
    assert result.ray_decays[0] == pytest.approx(0.2, rel=1e-9)
    assert result.ray_decays[1] == pytest.approx(0.5, rel=1e-9)
    assert result.cluster_decay == pytest.approx(1.5, rel=1e-9)
    assert result.ray_rates[0] == pytest.approx(5.0, rel=1e-9)  # peaks every 0.2 ns
    assert result.ray_rates[1] == pytest.approx(5.0, rel=1e-9)
    assert result.peak_counts.tolist() == [4.0, 4.0]


def test_extract_parameters_lambda_from_lead_gap():
    p = synthetic_two_cluster_pdp(t2=4.0)
    result = extract_parameters(p, 2)
    assert result.cluster_rate == pytest.approx(0.25, rel=1e-9)


def test_extract_parameters_diagnostics_are_clean_on_noiseless_input():
    result = extract_parameters(synthetic_two_cluster_pdp(), 2)
    assert np.all(result.ray_fit_rms_db < 1e-9)
    assert result.cluster_fit_rms_db < 1e-9
    assert result.sample_count == 1


# ---------------------------------------------------------------- aggregation


def entry(ray_rates, cluster_rate, ray_decays, cluster_decay, peak_counts, sample_count=1):
    n = len(ray_rates)
    return ExtractedParameters(
        n_clusters=n,
        ray_rates=np.asarray(ray_rates, float),
        cluster_rate=cluster_rate,
        ray_decays=np.asarray(ray_decays, float),
        cluster_decay=cluster_decay,
        ray_fit_rms_db=np.zeros(n),
        cluster_fit_rms_db=0.0,
        peak_counts=np.asarray(peak_counts, float),
        sample_count=sample_count,
    )


def test_aggregate_single_entry_is_identity():
    e = entry([5.0, 6.0], 0.3, [0.2, 0.5], 1.0, [4, 4])
    agg = aggregate_over_bin([e])
    np.testing.assert_allclose(agg.ray_rates, e.ray_rates, rtol=1e-12)
    assert agg.cluster_rate == pytest.approx(0.3, rel=1e-12)
    np.testing.assert_allclose(agg.ray_decays, e.ray_decays, rtol=1e-12)
    assert agg.cluster_decay == pytest.approx(1.0, rel=1e-12)
    assert agg.sample_count == 1


def test_aggregate_decays_average_arithmetically():
    a = entry([5.0, 5.0], 0.3, [0.20, 0.5], 1.0, [4, 4])
    b = entry([5.0, 5.0], 0.3, [0.22, 0.5], 1.0, [4, 4])
    agg = aggregate_over_bin([a, b])
    assert agg.ray_decays[0] == pytest.approx(0.21, rel=1e-12)
    assert agg.sample_count == 2


def test_aggregate_rates_combine_in_the_gap_domain():
    # one trace with 3 gaps of mean 0.2 ns, one with 1 gap of 0.6 ns:
    # pooled mean gap = (3*0.2 + 1*0.6)/4 = 0.3 -> rate 10/3
    a = entry([1.0 / 0.2], float("nan"), [0.2], float("nan"), [4])
    b = entry([1.0 / 0.6], float("nan"), [0.2], float("nan"), [2])
    agg = aggregate_over_bin([a, b])
    assert agg.ray_rates[0] == pytest.approx(1.0 / 0.3, rel=1e-12)


def test_aggregate_skips_nan_entries_per_parameter():
    a = entry([5.0, float("nan")], 0.4, [0.2, float("nan")], 1.0, [4, 1])
    b = entry([5.0, 6.0], float("nan"), [0.2, 0.6], float("nan"), [4, 3])
    agg = aggregate_over_bin([a, b])
    assert agg.ray_rates[1] == pytest.approx(6.0, rel=1e-12)
    assert agg.ray_decays[1] == pytest.approx(0.6, rel=1e-12)
    assert agg.cluster_rate == pytest.approx(0.4, rel=1e-12)
    assert agg.cluster_decay == pytest.approx(1.0, rel=1e-12)


def test_aggregate_errors():
    with pytest.raises(ValueError):
        aggregate_over_bin([])
    a = entry([5.0, 5.0], 0.3, [0.2, 0.5], 1.0, [4, 4])
    b = entry([5.0], 0.3, [0.2], 1.0, [4])
    with pytest.raises(ValueError):
        aggregate_over_bin([a, b])
