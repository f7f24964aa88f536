"""Proof-of-ENF committee consensus.

Validators broadcast fixed-length ENF vectors each round; every validator
scores the pooled proofs with a Krum-style multi-neighbor squared-distance
rule and adopts the minimum-score proof as the round's ground truth E*.
Byzantine behaviors are pluggable and the whole round driver is
deterministic in its seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigurationError, InvalidArgumentError, QuorumError
from .media_synth import EnfSeries, GridConfig


@dataclass
class CommitteeConfig:
    K: int
    f: int
    d: int
    round_duration_s: float = 360.0
    nominal_hz: float = 60.0

    def __post_init__(self):
        if self.f < 0:
            raise ConfigurationError("f must be >= 0")
        if self.d < 2:
            raise ConfigurationError("d must be >= 2")
        if self.K < 2 * self.f + 3:
            raise ConfigurationError(
                f"K={self.K} violates quorum bound K >= 2f+3 (f={self.f})"
            )
        if self.round_duration_s <= 0:
            raise ConfigurationError("round_duration_s must be > 0")

    @property
    def vector_lo(self) -> float:
        return self.nominal_hz - 1.0

    @property
    def vector_hi(self) -> float:
        return self.nominal_hz + 1.0


@dataclass
class EnfTransaction:
    validator_id: int
    round: int
    enf_vector: np.ndarray
    timestamp_s: float
    sig: int = -1  # placeholder signature: echoes validator_id

    def __post_init__(self):
        self.enf_vector = np.asarray(self.enf_vector, dtype=float)
        if self.sig == -1:
            self.sig = self.validator_id


@dataclass
class TransactionPool:
    round: int
    entries: Dict[int, EnfTransaction] = field(default_factory=dict)

    def insert(self, tx: EnfTransaction):
        if tx.round != self.round:
            raise InvalidArgumentError("transaction round does not match pool round")
        if tx.validator_id in self.entries:
            raise InvalidArgumentError("duplicate entry for validator")
        self.entries[tx.validator_id] = tx

    def __len__(self):
        return len(self.entries)


@dataclass
class ScoreTable:
    round: int
    scores: Dict[int, float]


@dataclass
class RoundResult:
    round: int
    ground_truth_id: int
    ground_truth_enf: EnfSeries
    scores: ScoreTable
    honest_agreement: bool


class RejectReason(Enum):
    NotMember = "NotMember"
    StaleRound = "StaleRound"
    Duplicate = "Duplicate"
    Malformed = "Malformed"


@dataclass
class ValidationResult:
    accepted: bool
    reason: Optional[RejectReason] = None


def validate_transaction(
    tx: EnfTransaction,
    committee_members: Sequence[int],
    pool: TransactionPool,
    current_round: int,
    cfg: CommitteeConfig,
) -> ValidationResult:
    """Admission control for one broadcast transaction.

    Checks, in order: sender is a committee member, round is current,
    validator has not already submitted, and the vector is well-formed
    (length d, finite, within +-1 Hz of nominal).
    """
    if tx.validator_id not in set(committee_members):
        return ValidationResult(False, RejectReason.NotMember)
    if tx.round != current_round:
        return ValidationResult(False, RejectReason.StaleRound)
    if tx.validator_id in pool.entries:
        return ValidationResult(False, RejectReason.Duplicate)
    v = tx.enf_vector
    if (
        v.ndim != 1
        or len(v) != cfg.d
        or not np.all(np.isfinite(v))
        or np.any(v < cfg.vector_lo)
        or np.any(v > cfg.vector_hi)
    ):
        return ValidationResult(False, RejectReason.Malformed)
    return ValidationResult(True, None)


def compute_scores(pool: TransactionPool, cfg: CommitteeConfig) -> ScoreTable:
    """Krum-style score: sum of squared distances to the (n-f-2) nearest proofs.

    Lower is more central; deterministic given the pool contents, independent
    of insertion order.
    """
    n = len(pool)
    required = 2 * cfg.f + 3
    if n < required:
        raise QuorumError(n, required)
    ids = sorted(pool.entries)
    vectors = np.array([pool.entries[i].enf_vector for i in ids])
    dist = cdist(vectors, vectors, "sqeuclidean")
    np.fill_diagonal(dist, np.inf)
    m = n - cfg.f - 2
    sums = np.sort(dist, axis=1)[:, :m].sum(axis=1)
    return ScoreTable(round=pool.round, scores={i: float(s) for i, s in zip(ids, sums)})


def select_ground_truth(scores: ScoreTable, pool: TransactionPool) -> Tuple[int, np.ndarray]:
    """Minimum-score proof wins; ties break to the lowest validator id."""
    if not scores.scores:
        raise InvalidArgumentError("empty score table")
    best = min(scores.scores.values())
    winner = min(i for i, s in scores.scores.items() if s == best)
    return winner, pool.entries[winner].enf_vector


# --------------------------------------------------------------------------
# byzantine behaviors


@dataclass
class Honest:
    noise_std: float = 0.005


@dataclass
class RandomVector:
    pass


@dataclass
class OffsetVector:
    delta_hz: float = 1.0


@dataclass
class ColludingClone:
    target_vector: Optional[np.ndarray] = None


@dataclass
class Silent:
    pass


def _clamp(v: np.ndarray, cfg: CommitteeConfig) -> np.ndarray:
    return np.clip(v, cfg.vector_lo, cfg.vector_hi)


def _make_transaction(behavior, truth_vals, validator_id, round_no, rng, cfg):
    """Produce (or withhold) one transaction per the validator's behavior."""
    ts = round_no * cfg.round_duration_s
    if isinstance(behavior, Silent):
        return None
    if isinstance(behavior, Honest):
        vec = truth_vals + rng.normal(0.0, behavior.noise_std, size=cfg.d)
    elif isinstance(behavior, OffsetVector):
        vec = truth_vals + rng.normal(0.0, 0.005, size=cfg.d) + behavior.delta_hz
    elif isinstance(behavior, RandomVector):
        vec = rng.uniform(cfg.vector_lo, cfg.vector_hi, size=cfg.d)
    elif isinstance(behavior, ColludingClone):
        if behavior.target_vector is not None:
            vec = np.asarray(behavior.target_vector, dtype=float)
            if vec.size == 1:  # scalar target broadcasts to a full proof
                vec = np.full(cfg.d, float(vec.reshape(-1)[0]))
        else:
            vec = np.full(cfg.d, cfg.nominal_hz + 0.9)
    else:
        raise ConfigurationError(f"unknown behavior: {behavior!r}")
    return EnfTransaction(validator_id, round_no, _clamp(vec, cfg), timestamp_s=ts)


def parse_behavior(spec: str):
    """Parse a CLI behavior spec like 'offset:1.0', 'random', 'clone:60.9', 'silent'."""
    name, _, arg = spec.partition(":")
    name = name.strip().lower()
    if name == "honest":
        return Honest(noise_std=float(arg) if arg else 0.005)
    if name == "offset":
        return OffsetVector(delta_hz=float(arg) if arg else 1.0)
    if name == "random":
        return RandomVector()
    if name == "clone":
        return ColludingClone(target_vector=None if not arg else np.full(1, float(arg)))
    if name == "silent":
        return Silent()
    raise ConfigurationError(f"unknown behavior spec: {spec!r}")


def run_round(
    grid: GridConfig,
    observers: Sequence,
    cfg: CommitteeConfig,
    seed: int,
    round_no: int = 0,
) -> RoundResult:
    """One full consensus round over freshly generated grid truth.

    Honest observers submit noisy d-sample views of the shared truth;
    byzantines follow their behavior. All transactions are validated into a
    shared pool in (round, validator_id) order, then every honest validator
    independently scores and selects; honest_agreement records whether they
    all landed on the same (id, E*).
    """
    if len(observers) != cfg.K:
        raise ConfigurationError(f"need exactly K={cfg.K} observers, got {len(observers)}")
    byz = [i for i, b in enumerate(observers) if not isinstance(b, Honest)]
    if len(byz) > cfg.f:
        raise ConfigurationError(f"{len(byz)} byzantine observers exceed f={cfg.f}")

    step = cfg.round_duration_s / cfg.d
    rng_truth = np.random.default_rng([int(seed), int(round_no)])
    incr = rng_truth.normal(0.0, grid.drift_std_hz * np.sqrt(step), size=cfg.d)
    truth_vals = grid.nominal_hz + np.clip(np.cumsum(incr), -grid.max_dev_hz, grid.max_dev_hz)

    members = list(range(cfg.K))
    pool = TransactionPool(round=round_no)
    for v in members:  # deterministic (round, validator_id) ordering
        rng_v = np.random.default_rng([int(seed), int(round_no), v])
        tx = _make_transaction(observers[v], truth_vals, v, round_no, rng_v, cfg)
        if tx is None:
            continue
        res = validate_transaction(tx, members, pool, round_no, cfg)
        if res.accepted:
            pool.insert(tx)

    scores = compute_scores(pool, cfg)
    honest_ids = [i for i in members if isinstance(observers[i], Honest)]
    picks = {select_ground_truth(compute_scores(pool, cfg), pool)[0] for _ in honest_ids}
    winner, vec = select_ground_truth(scores, pool)
    agreement = picks == {winner}
    estar = EnfSeries(
        start_time_s=round_no * cfg.round_duration_s, step_s=step, values_hz=vec
    )
    return RoundResult(
        round=round_no,
        ground_truth_id=winner,
        ground_truth_enf=estar,
        scores=scores,
        honest_agreement=agreement,
    )


def simulate_rounds(grid, observers, cfg, rounds: int, seed: int):
    """Run consecutive rounds; returns (results, summary dict)."""
    if rounds < 1:
        raise InvalidArgumentError("rounds must be >= 1")
    honest_ids = {i for i, b in enumerate(observers) if isinstance(b, Honest)}
    results: List[RoundResult] = []
    agree = 0
    honest_win = 0
    for r in range(rounds):
        rr = run_round(grid, observers, cfg, seed=seed, round_no=r)
        results.append(rr)
        agree += int(rr.honest_agreement)
        honest_win += int(rr.ground_truth_id in honest_ids)
    summary = {
        "agreement_rate": agree / rounds,
        "honest_win_rate": honest_win / rounds,
        "rounds": rounds,
    }
    return results, summary
