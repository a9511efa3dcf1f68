import numpy as np
import pytest

from samplesplit.core import EmptySplit, InvalidSize, SplitConfig, TestSummary
from samplesplit.rng import Domain, generator
from samplesplit.sampler import split_variances
from samplesplit.unitsim import (
    UnitPanel,
    panel_for_summary,
    partition_and_estimate,
    repartition_series,
    simulate_units,
    split_size,
)


def _panel(seed=0, delta=0.0, tau_sq=1.0, n=10_000):
    return simulate_units(delta, tau_sq, n, generator(seed, Domain.UNIT_OUTCOME, 0, 0))


def test_difference_in_means_calibration():
    reps = 1000
    d = np.array([_panel(seed=s, n=2000).delta_hat for s in range(reps)])
    # variance of the sample variance of normals: 2 sigma^4 / (n - 1)
    assert abs(d.var(ddof=1) - 1.0) < 3 * np.sqrt(2 / (reps - 1))
    assert abs(d.mean()) < 3 / np.sqrt(reps)


def test_unbiased_for_true_delta():
    reps = 400
    d = np.array([_panel(seed=s, delta=5.0, n=2000).delta_hat for s in range(reps)])
    assert abs(d.mean() - 5.0) < 3 / np.sqrt(reps)


def test_balanced_and_deterministic():
    p1, p2 = _panel(3, n=50), _panel(3, n=50)
    assert p1.n_treatment == p1.n_control == 50
    np.testing.assert_array_equal(p1.treatment, p2.treatment)
    np.testing.assert_array_equal(p1.control, p2.control)
    assert not np.array_equal(p1.treatment, _panel(4, n=50).treatment)


def test_invalid_sizes():
    with pytest.raises(InvalidSize):
        simulate_units(0.0, 1.0, 1, generator(0, Domain.UNIT_OUTCOME))
    with pytest.raises(InvalidSize):
        UnitPanel(np.zeros(3), np.zeros(4))
    with pytest.raises(ValueError):
        UnitPanel(np.array([np.nan, 0.0]), np.zeros(2))


def test_split_size_rounding():
    assert split_size(10, 0.5) == 5
    assert split_size(10, 0.25) == 2  # 2.5 rounds half to even
    assert split_size(10, 0.35) == 4  # 3.5 -> 4
    with pytest.raises(EmptySplit):
        split_size(2, 0.1)
    with pytest.raises(EmptySplit):
        split_size(10, 0.96)


def test_partition_disjoint_and_covering():
    panel = _panel(n=10)
    pair, idx_t, idx_c = partition_and_estimate(panel, 0.5, 1.0, generator(0, Domain.UNIT_PARTITION), return_members=True)
    for idx in (idx_t, idx_c):
        assert len(idx) == 5 and len(set(idx.tolist())) == 5
        rest = np.setdiff1d(np.arange(10), idx)
        assert len(rest) == 5 and set(rest) | set(idx.tolist()) == set(range(10))
    assert (pair.tau_sq_a, pair.tau_sq_b) == split_variances(1.0, 0.5)


@pytest.mark.parametrize("alpha,n", [(0.5, 10), (0.2, 100), (0.8, 1000)])
def test_aggregation_identity_at_exact_counts(alpha, n):
    panel = _panel(seed=1, delta=0.3, n=n)
    for s in range(20):
        pair = partition_and_estimate(panel, alpha, 1.0, generator(0, Domain.UNIT_PARTITION, 0, 0, s))
        recon = alpha * pair.delta_hat_a + (1 - alpha) * pair.delta_hat_b
        assert recon == pytest.approx(panel.delta_hat, rel=1e-9)


def test_repartition_series():
    panel = _panel(n=100)
    one = repartition_series(panel, SplitConfig(0.5, 1, 0), 1.0)
    assert len(one) == 1 and one[0].partition_index == 1
    cfg = SplitConfig(0.5, 8, 2)
    assert repartition_series(panel, cfg, 1.0) == repartition_series(panel, cfg, 1.0)
    assert repartition_series(panel, cfg, 1.0) != repartition_series(panel, SplitConfig(0.5, 8, 3), 1.0)


def test_complementary_splits_are_negatively_correlated():
    panel = _panel(seed=2, n=200)
    series = repartition_series(panel, SplitConfig(0.5, 4000, 0), 1.0)
    a = np.array([p.delta_hat_a for p in series])
    b = np.array([p.delta_hat_b for p in series])
    assert np.corrcoef(a, b)[0, 1] == pytest.approx(-1.0, abs=1e-9)


def test_distinct_partitions_uncorrelated_given_panel():
    panel = _panel(seed=2, n=200)
    series = repartition_series(panel, SplitConfig(0.5, 8000, 0), 1.0)
    b = np.array([p.delta_hat_b for p in series])
    r = np.corrcoef(b[0::2], b[1::2])[0, 1]
    assert abs(r) < 3 / np.sqrt(b.size // 2)


def test_panel_for_summary_reproduces_estimate():
    t = TestSummary("x", 0.37, 2.0)
    panel = panel_for_summary(t, 500, generator(0, Domain.UNIT_OUTCOME, 0, 1))
    assert panel.delta_hat == pytest.approx(0.37, abs=1e-12)
    assert panel.parent_test_id == "x"


def test_dump(tmp_path):
    panel = _panel(n=3)
    path = tmp_path / "panel.txt"
    panel.dump(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "unit_id arm outcome"
    assert len(lines) == 7
    uid, arm, y = lines[1].split()
    assert (uid, arm, float(y)) == ("0", "treatment", panel.treatment[0])
