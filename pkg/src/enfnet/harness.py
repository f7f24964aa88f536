"""End-to-end scenario runner, benchmarks, and evaluation corpora.

Ties the synthedia, estimation, consensus, and detection modules together:
conference-style scenarios with deepfaked participants, the consensus
latency/scaling benchmark, labeled detection corpora, ROC sweeps over
detector window sizes, and forged-interval localization scoring.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from .detection import DetectorConfig, Verdict, roc_curve, sliding_window_detect
from .enf_estimation import EstimatorConfig, estimate_enf
from .errors import ConfigurationError, InvalidArgumentError
from .media_synth import (
    AudioStream,
    EnfSeries,
    ForgeryMode,
    GridConfig,
    embed_audio,
    forge_segments,
    gen_enf_truth,
)
from .poenf_consensus import (
    CommitteeConfig,
    EnfTransaction,
    Honest,
    OffsetVector,
    RoundResult,
    TransactionPool,
    _make_transaction,
    compute_scores,
    select_ground_truth,
    validate_transaction,
)

DEFAULT_HARMONICS: Tuple[Tuple[int, float], ...] = ((1, 1.0), (2, 0.5), (3, 0.33))


@dataclass
class ScenarioConfig:
    participants: int = 10
    byzantine: int = 0
    deepfaked_participants: Set[int] = field(default_factory=set)
    grid: GridConfig = field(default_factory=GridConfig)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    committee: CommitteeConfig = field(
        default_factory=lambda: CommitteeConfig(K=5, f=1, d=60, round_duration_s=60.0)
    )
    rounds: int = 2
    seed: int = 0
    # synthesis knobs not named by the committee/grid configs
    snr_db: float = 20.0
    sample_rate_hz: float = 1000.0
    harmonics: Tuple[Tuple[int, float], ...] = DEFAULT_HARMONICS
    forgery_len_s: Optional[float] = None

    def __post_init__(self):
        self.deepfaked_participants = set(self.deepfaked_participants)
        if self.byzantine > self.committee.f:
            raise ConfigurationError("byzantine count exceeds committee.f")
        if self.committee.K > self.participants:
            raise ConfigurationError("committee.K exceeds participant count")
        if not self.deepfaked_participants <= set(range(self.participants)):
            raise ConfigurationError("deepfaked_participants outside participant id range")
        if self.rounds < 1:
            raise ConfigurationError("rounds must be >= 1")


def _interp_series(series: EnfSeries, times: np.ndarray) -> np.ndarray:
    return np.interp(times, series.times(), series.values_hz)


def run_scenario(cfg: ScenarioConfig) -> dict:
    """Simulate one conference: shared grid, per-participant media, consensus,
    and per-participant detection against the consensus ground truth.

    Returns {"reports": {pid: DetectionReport}, "rounds": [RoundResult],
    "summary": {...}} with a stream-level confusion count in the summary.
    """
    com = cfg.committee
    duration = cfg.rounds * com.round_duration_s
    grid = dataclasses.replace(cfg.grid, seed=[cfg.seed, 0])
    truth = gen_enf_truth(grid, duration, step_s=1.0)

    forged_at: Dict[int, Tuple[float, float]] = {}
    estimates: Dict[int, EnfSeries] = {}
    for p in range(cfg.participants):
        stream = embed_audio(
            truth, cfg.sample_rate_hz, cfg.harmonics, cfg.snr_db, seed=[cfg.seed, 1, p], grid=grid
        )
        if p in cfg.deepfaked_participants:
            rng = np.random.default_rng([cfg.seed, 2, p])
            flen = cfg.forgery_len_s or min(45.0, duration / 4.0)
            lo, hi = 5.0, duration - 5.0 - flen
            a = float(lo + (hi - lo) * rng.random())
            stream = forge_segments(
                stream, [(a, a + flen)], ForgeryMode.ReplaceEnf, seed=cfg.seed * 1000 + p
            )
            forged_at[p] = (a, a + flen)
        estimates[p] = estimate_enf(stream, cfg.estimator)

    members = list(range(com.K))
    byz_ids = set(members[-cfg.byzantine :]) if cfg.byzantine else set()
    behaviors = {v: (OffsetVector(1.0) if v in byz_ids else Honest(0.0)) for v in members}

    rounds: List[RoundResult] = []
    estar_times: List[np.ndarray] = []
    estar_vals: List[np.ndarray] = []
    for r in range(cfg.rounds):
        t0 = r * com.round_duration_s
        proof_times = t0 + (np.arange(com.d) + 0.5) * (com.round_duration_s / com.d)
        pool = TransactionPool(round=r)
        for v in members:
            base = _interp_series(estimates[v], proof_times)
            rng_v = np.random.default_rng([cfg.seed, 3, r, v])
            tx = _make_transaction(behaviors[v], base, v, r, rng_v, com)
            if tx is None:
                continue
            if validate_transaction(tx, members, pool, r, com).accepted:
                pool.insert(tx)
        scores = compute_scores(pool, com)
        honest_ids = [v for v in members if v not in byz_ids]
        picks = {select_ground_truth(compute_scores(pool, com), pool)[0] for _ in honest_ids}
        winner, vec = select_ground_truth(scores, pool)
        rounds.append(
            RoundResult(
                round=r,
                ground_truth_id=winner,
                ground_truth_enf=EnfSeries(t0, com.round_duration_s / com.d, vec),
                scores=scores,
                honest_agreement=picks == {winner},
            )
        )
        estar_times.append(proof_times)
        estar_vals.append(vec)

    ref_t = np.concatenate(estar_times)
    ref_v = np.concatenate(estar_vals)
    reports = {}
    tp = fp = tn = fn = 0
    for p in range(cfg.participants):
        est = estimates[p]
        ref = EnfSeries(est.start_time_s, est.step_s, np.interp(est.times(), ref_t, ref_v))
        rep = sliding_window_detect(est, ref, cfg.detector)
        reports[p] = rep
        flagged = rep.overall_verdict is Verdict.Fake
        faked = p in cfg.deepfaked_participants
        tp += int(flagged and faked)
        fp += int(flagged and not faked)
        tn += int(not flagged and not faked)
        fn += int(not flagged and faked)

    honest_committee = [v for v in members if v not in byz_ids and v not in cfg.deepfaked_participants]
    summary = {
        "tp": tp,
        "fp": fp,
        "tn": tn,
        "fn": fn,
        "participants": cfg.participants,
        "agreement_rate": float(np.mean([r.honest_agreement for r in rounds])),
        "honest_win_rate": float(np.mean([r.ground_truth_id not in byz_ids for r in rounds])),
        "quorum_of_fakes_warning": len(honest_committee) < 2 * com.f + 3,
        "forged_intervals_truth": {str(p): list(iv) for p, iv in forged_at.items()},
    }
    return {"reports": reports, "rounds": rounds, "summary": summary}


# --------------------------------------------------------------------------
# consensus latency benchmark


@dataclass
class BenchResult:
    k_list: List[int]
    latencies_s: List[float]
    slope: float
    d: int


def _bench_pool(K: int, d: int, seed) -> Tuple[TransactionPool, CommitteeConfig]:
    cfg = CommitteeConfig(K=K, f=0, d=d, round_duration_s=float(d))
    rng = np.random.default_rng(seed)
    pool = TransactionPool(round=0)
    vectors = cfg.nominal_hz + rng.normal(0.0, 0.01, size=(K, d))
    for v in range(K):
        pool.entries[v] = EnfTransaction(v, 0, vectors[v], timestamp_s=0.0)
    return pool, cfg


def _time_round(pool, cfg, trials: int) -> float:
    # min over trials after one warm-up: the lower envelope is the stable
    # steady-state latency, unlike the mean/median which soak up scheduler noise
    scores = compute_scores(pool, cfg)
    select_ground_truth(scores, pool)
    times = []
    for _ in range(trials):
        t0 = time.perf_counter()
        scores = compute_scores(pool, cfg)
        select_ground_truth(scores, pool)
        times.append(time.perf_counter() - t0)
    return float(min(times))


def bench_consensus(K_list: Sequence[int], d: int, trials: int, seed: int) -> BenchResult:
    """Time scoring + selection on a pre-filled pool per committee size.

    Latency per K is the best of `trials` timed runs after a warm-up; slope
    is the least-squares fit of log(latency) against log(K).
    """
    if len(K_list) < 2:
        raise InvalidArgumentError("K_list needs at least 2 sizes")
    if trials < 3:
        raise InvalidArgumentError("trials must be >= 3")
    lats = []
    for K in K_list:
        pool, cfg = _bench_pool(int(K), int(d), [seed, int(K)])
        lats.append(_time_round(pool, cfg, trials))
    slope = float(np.polyfit(np.log(np.asarray(K_list, float)), np.log(lats), 1)[0])
    return BenchResult(k_list=[int(k) for k in K_list], latencies_s=lats, slope=slope, d=int(d))


def bench_d_ratio(K: int, d: int, trials: int, seed: int) -> float:
    """Latency ratio when d doubles at fixed K (expected ~2 for O(K^2 d))."""
    lat = []
    for dd in (d, 2 * d):
        pool, cfg = _bench_pool(K, dd, [seed, dd])
        lat.append(_time_round(pool, cfg, max(trials, 3)))
    return lat[1] / lat[0]


# --------------------------------------------------------------------------
# labeled detection corpora


@dataclass
class CorpusConfig:
    n_streams: int = 24
    duration_s: float = 120.0
    snr_db: float = 10.0
    sample_rate_hz: float = 1000.0
    harmonics: Tuple[Tuple[int, float], ...] = DEFAULT_HARMONICS
    grid: GridConfig = field(default_factory=GridConfig)
    estimator: EstimatorConfig = field(
        default_factory=lambda: EstimatorConfig(stft_window_s=16.0, stft_overlap_frac=0.9375)
    )
    shift_s: float = 5.0
    forgery_len_bounds_s: Tuple[float, float] = (30.0, 45.0)
    seed: int = 0


@dataclass
class CorpusEntry:
    local: EnfSeries
    reference: EnfSeries  # grid truth resampled onto the estimate clock
    forged: bool
    injected: Optional[Tuple[float, float]]  # ground-truth forged interval


def make_detection_corpus(cc: CorpusConfig) -> List[CorpusEntry]:
    """Labeled streams, alternating genuine/forged, estimated and aligned."""
    entries: List[CorpusEntry] = []
    for i in range(cc.n_streams):
        grid = dataclasses.replace(cc.grid, seed=[cc.seed, i])
        truth = gen_enf_truth(grid, cc.duration_s, step_s=1.0)
        stream = embed_audio(
            truth, cc.sample_rate_hz, cc.harmonics, cc.snr_db, seed=[cc.seed, i, 1], grid=grid
        )
        forged = i % 2 == 1
        injected = None
        if forged:
            rng = np.random.default_rng([cc.seed, i, 2])
            flo, fhi = cc.forgery_len_bounds_s
            flen = float(rng.integers(int(flo), int(fhi) + 1))
            a = float(rng.integers(20, int(cc.duration_s - 20 - flen)))
            injected = (a, a + flen)
            stream = forge_segments(
                stream, [injected], ForgeryMode.ReplaceEnf, seed=cc.seed * 100003 + i
            )
        est = estimate_enf(stream, cc.estimator)
        ref = EnfSeries(est.start_time_s, est.step_s, _interp_series(truth, est.times()))
        entries.append(CorpusEntry(local=est, reference=ref, forged=forged, injected=injected))
    return entries


def stream_score(entry: CorpusEntry, det: DetectorConfig) -> float:
    """Per-stream detection score: the minimum window correlation."""
    rep = sliding_window_detect(entry.local, entry.reference, det)
    return min(w.corr for w in rep.windows)


def roc_sweep(window_list: Sequence[float], corpus_cfg: CorpusConfig):
    """ROC/AUC per detector window size over one shared labeled corpus."""
    if not window_list:
        raise InvalidArgumentError("window_list must contain at least one size")
    if max(window_list) >= corpus_cfg.duration_s:
        raise InvalidArgumentError("corpus too short for the largest window")
    entries = make_detection_corpus(corpus_cfg)
    labels = [e.forged for e in entries]
    if all(labels) or not any(labels):
        raise InvalidArgumentError("single-class corpus: ROC undefined")
    out = []
    for w in window_list:
        det = DetectorConfig(window_s=float(w), shift_s=corpus_cfg.shift_s)
        scores = [stream_score(e, det) for e in entries]
        genuine = [s for s, lab in zip(scores, labels) if not lab]
        fake = [s for s, lab in zip(scores, labels) if lab]
        points, auc = roc_curve(genuine, fake)
        out.append({"window_s": float(w), "auc": auc, "points": points})
    return out


def localization_accuracy(
    entries: Sequence[CorpusEntry], det: DetectorConfig, tol_s: Optional[float] = None
):
    """Boundary accuracy of reported forged intervals against injected truth.

    For each forged entry, the reported intervals overlapping the tolerance
    zone of the injected interval are enveloped (min start, max end) and both
    boundary errors must fall within tol_s (default: one shift).
    """
    tol = det.shift_s if tol_s is None else tol_s
    hits = 0
    total = 0
    errors = []
    for e in entries:
        if not e.forged or e.injected is None:
            continue
        total += 1
        a, b = e.injected
        rep = sliding_window_detect(e.local, e.reference, det)
        cands = [(s, t) for s, t in rep.forged_intervals if t > a - tol and s < b + tol]
        if not cands:
            errors.append((np.nan, np.nan))
            continue
        s = min(c[0] for c in cands)
        t = max(c[1] for c in cands)
        errors.append((s - a, t - b))
        if abs(s - a) <= tol and abs(t - b) <= tol:
            hits += 1
    return hits, total, errors
