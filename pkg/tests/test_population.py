"""Tests for quality functions, pools, arrival streams, rewards and CSV ingestion."""

import math

import numpy as np
import pytest

from caci_bench.context_space import ContextVector
from caci_bench.exceptions import DatasetError, InvalidParameterError
from caci_bench.population import (
    BernoulliRewards,
    BumpField,
    ConstantQuality,
    CsvSchema,
    OfflinePool,
    RecordedArrivals,
    ReplayRewards,
    SyntheticArrivals,
    TableQuality,
    TrajectoryQuality,
    Worker,
    generate_offline_pool,
    ingest_worker_csv,
    sample_reward,
    sample_rewards,
    trajectory_quality,
)


def test_generate_is_deterministic():
    """The same seed gives byte-identical pools."""
    field = ConstantQuality(0.4)
    a = generate_offline_pool(50, 2, (0.2, 1.0), field, seed=3, strategic=True)
    b = generate_offline_pool(50, 2, (0.2, 1.0), field, seed=3, strategic=True)
    for name in ('ids', 'contexts', 'costs', 'bids', 'qualities'):
        assert getattr(a, name).tobytes() == getattr(b, name).tobytes()
    assert a.fingerprint() == b.fingerprint()


def test_generate_single_constant_worker():
    """n=1 with mu = 0.5 everywhere."""
    pool = generate_offline_pool(1, 2, (0.2, 1.0), ConstantQuality(0.5), seed=0)
    assert len(pool) == 1
    assert pool.worker(0).true_quality == 0.5


def test_generate_rejects_empty_cost_range():
    """cost_min above cost_max is an empty range."""
    with pytest.raises(InvalidParameterError):
        generate_offline_pool(5, 2, (0.8, 0.2), ConstantQuality(0.5), seed=0)


def test_strategic_bids_respect_cost_and_cap():
    """Strategic bids lie in [c_i, b_max]; truthful bids equal costs."""
    field = ConstantQuality(0.5)
    strategic = generate_offline_pool(500, 2, (0.2, 0.9), field, seed=1, strategic=True, b_max=1.0)
    assert np.all(strategic.bids >= strategic.costs)
    assert np.all(strategic.bids <= 1.0)
    truthful = generate_offline_pool(500, 2, (0.2, 0.9), field, seed=1)
    np.testing.assert_array_equal(truthful.bids, truthful.costs)


def test_pool_invariants():
    """Duplicate ids and out-of-range qualities are rejected."""
    with pytest.raises(InvalidParameterError):
        OfflinePool(ids=[1, 1], contexts=[[0.1], [0.2]], costs=[0.5, 0.5], bids=[0.5, 0.5], qualities=[0.5, 0.5])
    with pytest.raises(InvalidParameterError):
        OfflinePool(ids=[1], contexts=[[0.1]], costs=[0.5], bids=[0.5], qualities=[1.5])
    with pytest.raises(InvalidParameterError):
        Worker(id=1, context=ContextVector.of(0.2), true_cost=0.5, bid=0.5, true_quality=-0.1)


def test_with_bid_keeps_fingerprint(small_pool):
    """Only the probed bid changes; the population identity does not."""
    worker_id = int(small_pool.ids[3])
    moved = small_pool.with_bid(worker_id, 0.77)
    assert moved.bids[3] == 0.77
    assert small_pool.bids[3] != 0.77
    assert moved.fingerprint() == small_pool.fingerprint()
    with pytest.raises(InvalidParameterError):
        small_pool.row_of(10 ** 9)


def test_trajectory_quality_examples():
    """Normalized form: 1 at (0, 1), 0 at zero battery, exp(-1/2) at (1, 1)."""
    assert trajectory_quality(ContextVector.of(0.0, 1.0), 1.0) == pytest.approx(1.0)
    assert trajectory_quality(ContextVector.of(0.0, 0.0), 1.0) == 0.0
    assert trajectory_quality(ContextVector.of(1.0, 1.0), 1.0) == pytest.approx(0.606531, abs=1e-6)
    with pytest.raises(InvalidParameterError):
        trajectory_quality(ContextVector.of(0.0, 1.0), 0.0)


def test_trajectory_field_matches_scalar():
    """The vectorized field agrees with the scalar form."""
    field = TrajectoryQuality(0.7)
    ctx = ContextVector.of(0.3, 0.6)
    assert field(ctx) == pytest.approx(trajectory_quality(ctx, 0.7))


@pytest.mark.parametrize('field', [
    BumpField.random(2, np.random.default_rng(0)),
    BumpField.random(3, np.random.default_rng(1), bumps=3, width=0.3),
    TrajectoryQuality(1.0),
    TableQuality([[0.1, 0.5, 0.2], [0.9, 0.3, 0.4]]),
])
def test_certified_hoelder_holds(field):
    """|mu(s) - mu(s')| <= L |s - s'|^alpha on random pairs."""
    dim = 2 if not isinstance(field, BumpField) else field.centers.shape[1]
    rng = np.random.default_rng(42)
    a = rng.random((4000, dim))
    b = np.clip(a + rng.normal(scale=0.05, size=a.shape), 0.0, 1.0)
    gap = np.abs(field.evaluate(a) - field.evaluate(b))
    dist = np.linalg.norm(a - b, axis=1)
    params = field.certified
    assert np.all(gap <= params.L * dist ** params.alpha + 1e-12)
    low, high = field.value_range
    values = field.evaluate(a)
    assert np.all((values >= low - 1e-12) & (values <= high + 1e-12))


def test_sample_reward_extremes():
    """mu = 0 never pays off, mu = 1 always does."""
    rng = np.random.default_rng(0)
    never = Worker(0, ContextVector.of(0.5), 0.5, 0.5, 0.0)
    always = Worker(1, ContextVector.of(0.5), 0.5, 0.5, 1.0)
    assert all(sample_reward(never, rng) == 0 for _ in range(100))
    assert all(sample_reward(always, rng) == 1 for _ in range(100))


def test_sample_rewards_mean():
    """10^5 draws at mu = 0.3 land within 0.01."""
    rewards = sample_rewards(np.full(100_000, 0.3), np.random.default_rng(7))
    assert abs(rewards.mean() - 0.3) <= 0.01


def test_bernoulli_rewards_consume_one_uniform_each():
    """Two sources on equal generators give the same draws."""
    a = BernoulliRewards().draw(np.arange(5), np.full(5, 0.5), np.random.default_rng(3))
    rng = np.random.default_rng(3)
    expected = (rng.random(5) < 0.5).astype(np.int8)
    np.testing.assert_array_equal(a, expected)


def test_replay_without_replacement():
    """A worker's recorded samples come back as a permutation, then replay with a diagnostic."""
    source = ReplayRewards({4: np.array([1, 0, 1, 1])})
    rng = np.random.default_rng(0)
    drawn = [int(source.draw(np.array([4]), np.array([0.5]), rng)[0]) for _ in range(4)]
    assert sorted(drawn) == [0, 1, 1, 1]
    assert source.diagnostics == []
    source.draw(np.array([4]), np.array([0.5]), rng)
    assert len(source.diagnostics) == 1


def test_synthetic_arrivals_fresh_ids():
    """Slot t brings ids (t-1) * wps .. t * wps - 1 and is reproducible on its own."""
    field = ConstantQuality(0.5)
    stream = SyntheticArrivals(5, 2, (0.2, 1.0), field, seed=4)
    assert list(stream.slot(2).ids) == [5, 6, 7, 8, 9]
    other = SyntheticArrivals(5, 2, (0.2, 1.0), field, seed=4)
    assert other.slot(3).contexts.tobytes() == stream.slot(3).contexts.tobytes()
    assert stream.horizon is None


def test_synthetic_arrivals_repeat_ids():
    """Repeated ids are drawn from a fixed base population."""
    stream = SyntheticArrivals(5, 2, (0.2, 1.0), ConstantQuality(0.5), seed=4, repeat_ids=True, pool_size=12)
    seen = set()
    for pool in stream.slots(6):
        assert len(pool) == 5
        seen.update(int(i) for i in pool.ids)
    assert seen <= set(range(12))


def test_synthetic_arrivals_horizon_and_bid_override():
    """Slots past the horizon are refused; with_bid changes that worker wherever it appears."""
    stream = SyntheticArrivals(4, 2, (0.2, 1.0), ConstantQuality(0.5), seed=2, horizon=3)
    with pytest.raises(InvalidParameterError):
        stream.slot(4)
    moved = stream.with_bid(5, 0.99)
    assert moved.slot(2).bids[1] == 0.99
    assert moved.fingerprint() == stream.fingerprint()


def _write(tmp_path, text):
    path = tmp_path / 'workers.csv'
    path.write_text(text, encoding='utf-8')
    return path


def test_ingest_offline_pool(tmp_path):
    """Three rows become a pool of three with min-max normalized contexts."""
    path = _write(tmp_path, 'id,cost,bid,ctx0,ctx1,quality\n'
                            '1,0.3,0.4,10,5,0.9\n'
                            '2,0.5,0.5,20,7,0.4\n'
                            '3,0.2,0.6,30,9,0.7\n')
    pool = ingest_worker_csv(path)
    assert isinstance(pool, OfflinePool)
    assert len(pool) == 3
    np.testing.assert_allclose(pool.contexts[:, 0], [0.0, 0.5, 1.0])
    np.testing.assert_allclose(pool.contexts[:, 1], [0.0, 0.5, 1.0])
    np.testing.assert_allclose(pool.bids, [0.4, 0.5, 0.6])


def test_ingest_slots_become_arrivals(tmp_path):
    """A slot column groups rows into a recorded stream."""
    path = _write(tmp_path, 'id,cost,ctx0,slot,quality\n'
                            '1,0.3,0.1,1,0.9\n'
                            '2,0.5,0.2,1,0.4\n'
                            '3,0.2,0.3,2,0.7\n')
    stream = ingest_worker_csv(path)
    assert isinstance(stream, RecordedArrivals)
    assert stream.horizon == 2
    assert list(stream.slot(1).ids) == [1, 2]
    np.testing.assert_allclose(stream.slot(2).bids, [0.2])


def test_ingest_rewards_for_replay(tmp_path):
    """Repeated ids carry reward observations; quality defaults to their mean."""
    path = _write(tmp_path, 'id,cost,ctx0,reward\n'
                            '1,0.3,0.1,1\n'
                            '1,0.3,0.1,0\n'
                            '2,0.5,0.9,1\n')
    pool = ingest_worker_csv(path)
    assert len(pool) == 2
    np.testing.assert_allclose(pool.qualities, [0.5, 1.0])
    assert isinstance(pool.new_reward_source(), ReplayRewards)


def test_ingest_cost_above_bid_names_the_row(tmp_path):
    """A bid below the cost is rejected with the file line."""
    path = _write(tmp_path, 'id,cost,bid,ctx0,quality\n'
                            '1,0.3,0.4,0.1,0.9\n'
                            '2,0.6,0.5,0.2,0.4\n')
    with pytest.raises(DatasetError) as info:
        ingest_worker_csv(path)
    assert info.value.line == 3
    assert 'worker 2' in str(info.value)


def test_ingest_parse_errors(tmp_path):
    """Unparseable numbers and missing columns are dataset errors."""
    path = _write(tmp_path, 'id,cost,ctx0,quality\n1,0.3,0.1,0.9\n2,abc,0.2,0.4\n')
    with pytest.raises(DatasetError) as info:
        ingest_worker_csv(path)
    assert info.value.line == 3

    path = _write(tmp_path, 'cost,ctx0,quality\n0.3,0.1,0.9\n')
    with pytest.raises(DatasetError):
        ingest_worker_csv(path)

    path = _write(tmp_path, 'id,cost,ctx0,quality\n1,0.3,0.1,0.9\n')
    with pytest.raises(DatasetError):
        ingest_worker_csv(path, CsvSchema(truthful=False))

    with pytest.raises(DatasetError):
        ingest_worker_csv(tmp_path / 'missing.csv')


def test_ingest_ragged_row_names_the_line(tmp_path):
    """A row with extra fields fails in the CSV parser and still reports its file line."""
    path = _write(tmp_path, 'id,cost,ctx0,quality\n'
                            '1,0.3,0.1,0.9\n'
                            '2,0.4,0.2,0.8\n'
                            '3,0.5,0.3,0.7,9,9\n')
    with pytest.raises(DatasetError) as info:
        ingest_worker_csv(path)
    assert info.value.line == 4
    assert str(info.value).startswith('line 4: malformed CSV')


def test_bump_field_parameters():
    """Bad bump parameters are refused."""
    with pytest.raises(InvalidParameterError):
        BumpField(np.zeros((1, 2)), np.array([1.0]), width=0.0)
    field = BumpField(np.array([[0.5, 0.5]]), np.array([1.0]), width=0.2, low=0.1, high=0.9)
    assert field(ContextVector.of(0.5, 0.5)) == pytest.approx(0.9)
    assert field.certified.L == pytest.approx(0.8 * math.exp(-0.5) / 0.2)
