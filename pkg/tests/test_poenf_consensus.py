"""Committee consensus tests: score arithmetic against a brute-force oracle,
admission-control ordering, quorum bounds, and byzantine-resilience
properties over seeded rounds."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from enfnet import (
    ColludingClone,
    CommitteeConfig,
    ConfigurationError,
    EnfTransaction,
    GridConfig,
    Honest,
    OffsetVector,
    QuorumError,
    RandomVector,
    RejectReason,
    Silent,
    TransactionPool,
    compute_scores,
    parse_behavior,
    run_round,
    select_ground_truth,
    simulate_rounds,
    validate_transaction,
)
from enfnet.poenf_consensus import _make_transaction

CFG = CommitteeConfig(K=5, f=1, d=4, round_duration_s=60.0)


def pool_from(vectors, round_no=0):
    pool = TransactionPool(round=round_no)
    for vid, vec in enumerate(vectors):
        pool.insert(EnfTransaction(vid, round_no, np.asarray(vec, float), timestamp_s=0.0))
    return pool


def tx(vid=0, rnd=0, vec=None, d=4):
    if vec is None:
        vec = np.full(d, 60.0)
    return EnfTransaction(vid, rnd, np.asarray(vec, float), timestamp_s=0.0)


# ---------------------------------------------------------------------------
# admission control


def test_validate_accepts_wellformed():
    pool = TransactionPool(round=0)
    res = validate_transaction(tx(), range(5), pool, 0, CFG)
    assert res.accepted and res.reason is None


def test_validate_rejection_order():
    """A transaction violating several rules reports the first failed check."""
    pool = pool_from([np.full(4, 60.0)])  # validator 0 already submitted
    bad_vec = np.full(4, 99.0)  # also malformed

    # non-member beats everything else
    r = validate_transaction(tx(vid=7, rnd=3, vec=bad_vec), range(5), pool, 0, CFG)
    assert (r.accepted, r.reason) == (False, RejectReason.NotMember)
    # member, wrong round
    r = validate_transaction(tx(vid=0, rnd=3, vec=bad_vec), range(5), pool, 0, CFG)
    assert r.reason is RejectReason.StaleRound
    # member, current round, already in pool
    r = validate_transaction(tx(vid=0, rnd=0, vec=bad_vec), range(5), pool, 0, CFG)
    assert r.reason is RejectReason.Duplicate
    # member, current, fresh -> only now is the payload inspected
    r = validate_transaction(tx(vid=1, rnd=0, vec=bad_vec), range(5), pool, 0, CFG)
    assert r.reason is RejectReason.Malformed


@pytest.mark.parametrize(
    "vec",
    [
        np.full(3, 60.0),  # wrong length
        np.full(5, 60.0),
        np.array([60.0, np.nan, 60.0, 60.0]),
        np.array([60.0, np.inf, 60.0, 60.0]),
        np.full(4, 61.5),  # outside nominal +- 1
        np.full(4, 58.9),
    ],
)
def test_validate_malformed_vectors(vec):
    pool = TransactionPool(round=0)
    r = validate_transaction(tx(vec=vec), range(5), pool, 0, CFG)
    assert r.reason is RejectReason.Malformed


# ---------------------------------------------------------------------------
# scoring


def test_scores_identical_vectors_are_zero():
    pool = pool_from([np.full(4, 60.0)] * 5)
    table = compute_scores(pool, CFG)
    assert set(table.scores) == set(range(5))
    assert all(s == 0.0 for s in table.scores.values())


def test_scores_match_bruteforce_oracle():
    """Independent O(n^2) recomputation with explicit loops."""
    rng = np.random.default_rng(5)
    vecs = 60.0 + rng.normal(0.0, 0.2, size=(5, 4)).clip(-1, 1)
    pool = pool_from(vecs)
    table = compute_scores(pool, CFG)
    m = 5 - CFG.f - 2
    for i in range(5):
        dists = sorted(
            float(np.sum((vecs[i] - vecs[j]) ** 2)) for j in range(5) if j != i
        )
        assert table.scores[i] == pytest.approx(sum(dists[:m]), abs=1e-12)


def test_scores_quorum_bound():
    pool = pool_from([np.full(4, 60.0)] * 4)  # one short of 2f+3
    with pytest.raises(QuorumError):
        compute_scores(pool, CFG)


def test_select_tie_breaks_to_lowest_id():
    a = np.full(4, 60.0)
    b = np.full(4, 60.1)
    pool = pool_from([a, a, b, b, np.full(4, 60.9)])
    table = compute_scores(pool, CFG)
    winner, vec = select_ground_truth(table, pool)
    assert winner == 0
    np.testing.assert_array_equal(vec, a)


def test_outlier_scores_grow_with_offset():
    rng = np.random.default_rng(9)
    honest = 60.0 + rng.normal(0.0, 0.01, size=(4, 4))
    near = compute_scores(pool_from(list(honest) + [np.full(4, 60.3)]), CFG)
    far = compute_scores(pool_from(list(honest) + [np.full(4, 60.6)]), CFG)
    assert far.scores[4] > near.scores[4] > max(near.scores[i] for i in range(4))


@settings(max_examples=40, deadline=None)
@given(perm=st.permutations(list(range(5))))
def test_scores_permutation_invariance(perm):
    """Scores depend on the vector, not on the validator label."""
    rng = np.random.default_rng(31)
    vecs = 60.0 + rng.normal(0.0, 0.1, size=(5, 4))
    base = compute_scores(pool_from(vecs), CFG)
    pool = TransactionPool(round=0)
    for vid, src in enumerate(perm):
        pool.insert(EnfTransaction(vid, 0, vecs[src], timestamp_s=0.0))
    table = compute_scores(pool, CFG)
    for vid, src in enumerate(perm):
        assert table.scores[vid] == pytest.approx(base.scores[src], abs=1e-9)


# ---------------------------------------------------------------------------
# behaviors and rounds


def test_round_zero_noise_unanimous():
    grid = GridConfig(seed=0)
    rr = run_round(grid, [Honest(0.0)] * 5, CFG, seed=42)
    assert rr.ground_truth_id == 0  # all scores tie at exactly zero
    assert rr.honest_agreement
    assert all(s == 0.0 for s in rr.scores.scores.values())
    assert np.all(np.abs(rr.ground_truth_enf.values_hz - 60.0) <= 0.05)


def test_round_is_deterministic():
    grid = GridConfig(seed=0)
    obs = [Honest(), Honest(), Honest(), Honest(), OffsetVector(0.8)]
    r1 = run_round(grid, obs, CFG, seed=7)
    r2 = run_round(grid, obs, CFG, seed=7)
    assert r1.ground_truth_id == r2.ground_truth_id
    np.testing.assert_array_equal(r1.ground_truth_enf.values_hz, r2.ground_truth_enf.values_hz)
    assert r1.scores.scores == r2.scores.scores


def test_round_silent_validator_shrinks_pool():
    cfg6 = CommitteeConfig(K=6, f=1, d=4, round_duration_s=60.0)
    rr = run_round(GridConfig(seed=1), [Honest()] * 5 + [Silent()], cfg6, seed=3)
    assert set(rr.scores.scores) == set(range(5))
    assert rr.honest_agreement


def test_round_silent_below_quorum_raises():
    with pytest.raises(QuorumError):
        run_round(GridConfig(seed=1), [Honest()] * 4 + [Silent()], CFG, seed=3)


def test_round_rejects_too_many_byzantines():
    obs = [Honest(), Honest(), Honest(), OffsetVector(), OffsetVector()]
    with pytest.raises(ConfigurationError):
        run_round(GridConfig(seed=1), obs, CFG, seed=3)
    with pytest.raises(ConfigurationError):
        run_round(GridConfig(seed=1), [Honest()] * 4, CFG, seed=3)  # wrong K


def test_random_vector_is_clamped_and_never_wins():
    cfg = CommitteeConfig(K=5, f=1, d=16, round_duration_s=60.0)
    rng = np.random.default_rng(2)
    t = _make_transaction(RandomVector(), np.full(16, 60.0), 4, 0, rng, cfg)
    assert np.all(t.enf_vector >= cfg.vector_lo) and np.all(t.enf_vector <= cfg.vector_hi)
    wins = 0
    for seed in range(200):
        rr = run_round(GridConfig(seed=0), [Honest()] * 4 + [RandomVector()], cfg, seed=seed)
        wins += rr.ground_truth_id == 4
    assert wins == 0


def test_colluding_clone_never_selected():
    cfg = CommitteeConfig(K=5, f=1, d=16, round_duration_s=60.0)
    target = np.full(16, 60.9)
    obs = [Honest()] * 4 + [ColludingClone(target)]
    for seed in range(1000):
        rr = run_round(GridConfig(seed=0), obs, cfg, seed=seed)
        assert rr.ground_truth_id != 4
        assert rr.honest_agreement


def test_offset_transaction_is_clamped_not_rejected():
    cfg = CommitteeConfig(K=5, f=1, d=8, round_duration_s=60.0)
    rng = np.random.default_rng(0)
    t = _make_transaction(OffsetVector(1.0), np.full(8, 60.02), 1, 0, rng, cfg)
    assert np.all(t.enf_vector <= cfg.vector_hi)
    res = validate_transaction(t, range(5), TransactionPool(round=0), 0, cfg)
    assert res.accepted


def test_simulate_rounds_summary():
    grid = GridConfig(seed=4)
    obs = [Honest()] * 4 + [OffsetVector(1.0)]
    results, summary = simulate_rounds(grid, obs, CFG, rounds=20, seed=99)
    assert len(results) == 20
    assert [r.round for r in results] == list(range(20))
    assert summary["agreement_rate"] == 1.0
    assert summary["honest_win_rate"] == 1.0


def test_parse_behavior_specs():
    assert parse_behavior("honest") == Honest(0.005)
    assert parse_behavior("honest:0.01") == Honest(0.01)
    assert parse_behavior("offset:0.5") == OffsetVector(0.5)
    assert isinstance(parse_behavior("random"), RandomVector)
    assert isinstance(parse_behavior("silent"), Silent)
    clone = parse_behavior("clone:60.9")
    assert isinstance(clone, ColludingClone)
    with pytest.raises(ConfigurationError):
        parse_behavior("mystery")


def test_clone_scalar_target_broadcasts():
    cfg = CommitteeConfig(K=5, f=1, d=8, round_duration_s=60.0)
    rng = np.random.default_rng(0)
    t = _make_transaction(parse_behavior("clone:60.9"), np.zeros(8), 3, 0, rng, cfg)
    np.testing.assert_array_equal(t.enf_vector, np.full(8, 60.9))


def test_committee_config_quorum_arithmetic():
    CommitteeConfig(K=9, f=3, d=4)  # exactly 2f+3
    with pytest.raises(ConfigurationError):
        CommitteeConfig(K=8, f=3, d=4)
    with pytest.raises(ConfigurationError):
        CommitteeConfig(K=5, f=-1, d=4)
    with pytest.raises(ConfigurationError):
        CommitteeConfig(K=5, f=1, d=1)
