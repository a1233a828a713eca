"""Capacity-limited triage, reviewer assignment, scoring, and decisions.

Assignment enforces, in order of strictness: no self-review, workload cap,
then keyword similarity >= sim_threshold. Similarity is the only constraint
that relaxes when a pool runs dry; the first two never do. The decision rule
is a fixed threshold partition on the mean score, so re-running it on the
same meta-review always gives the same outcome.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .config import PipelineConfig
from .errors import ConsistencyError
from .rng import RngStream
from .world import Manuscript, Reviewer, mask_jaccard

ACCEPT = "accept"
REJECT = "reject"
REVISE = "revise"


@dataclass
class Review:
    manuscript_id: str
    reviewer_id: str
    score: float
    time_cost: float
    round: int


@dataclass
class MetaReview:
    manuscript_id: str
    disagreement: float
    completeness: float
    mean_score: float
    n_reviews: int
    rounds_used: int


def triage(backlog: list[Manuscript], tau: float, capacity: int,
           rng: RngStream, triage_noise: float) -> tuple[list[Manuscript], list[Manuscript]]:
    """Select up to `capacity` manuscripts whose noisy quality clears tau.

    Every backlog manuscript gets exactly one noise draw per call. Ties on
    score break by earlier arrival, then id. Deferred manuscripts keep
    their backlog order.
    """
    if not backlog or capacity <= 0:
        return [], list(backlog)
    noise = rng.normal_array(0.0, triage_noise, len(backlog))
    scored = [(m.quality + float(noise[i]), m) for i, m in enumerate(backlog)]
    passing = [(s, m) for s, m in scored if s >= tau]
    passing.sort(key=lambda sm: (-sm[0], sm[1].arrived_at, sm[1].id))
    selected = [m for _, m in passing[:capacity]]
    chosen = {m.id for m in selected}
    deferred = [m for m in backlog if m.id not in chosen]
    return selected, deferred


def _pick(candidates: list[int], count: int, rng: RngStream) -> list[int]:
    picked = []
    pool = list(candidates)
    while pool and len(picked) < count:
        j = rng.integers(0, len(pool)) if len(pool) > 1 else 0
        picked.append(pool.pop(j))
    return picked


def assign_reviewers(m: Manuscript, pool: list[Reviewer], rho_ai: float, k: int,
                     s0: float, max_load: int, rng: RngStream,
                     exclude_ids: Optional[set[str]] = None,
                     cluster_bias: float = 0.0,
                     bias_rng: Optional[RngStream] = None) -> list[Reviewer]:
    """Pick up to k distinct reviewers for m; workloads increment here.

    The AI slot count is round(rho_ai * k); an AI shortfall falls back to
    humans. Similarity relaxes to 0 for whatever a pool cannot fill, and if
    reviewers are still short, fewer than k come back. cluster_bias > 0
    routes each human slot to a tagged cluster candidate with that
    probability (the capture regime's lever); all hard constraints above
    still apply to cluster picks.
    """
    exclude = exclude_ids or set()
    ai_primary, ai_relaxed = [], []
    hu_primary, hu_relaxed = [], []
    for i, r in enumerate(pool):
        if r.id in exclude or r.id in m.author_set or r.workload >= max_load:
            continue
        sim_ok = mask_jaccard(m.kw_mask, r.kw_mask) >= s0
        if r.kind == "ai":
            (ai_primary if sim_ok else ai_relaxed).append(i)
        else:
            (hu_primary if sim_ok else hu_relaxed).append(i)

    n_ai = round(rho_ai * k)
    chosen: list[int] = []
    chosen += _pick(ai_primary, n_ai, rng)
    if len(chosen) < n_ai:
        chosen += _pick(ai_relaxed, n_ai - len(chosen), rng)

    n_human = k - len(chosen)
    if cluster_bias > 0.0 and n_human > 0:
        cluster_p = [i for i in hu_primary if pool[i].cluster_id is not None]
        plain_p = [i for i in hu_primary if pool[i].cluster_id is None]
        for _ in range(n_human):
            take_cluster = cluster_p and bias_rng is not None \
                and bias_rng.uniform() < cluster_bias
            src = cluster_p if take_cluster else (plain_p or cluster_p)
            if not src:
                break
            j = rng.integers(0, len(src)) if len(src) > 1 else 0
            chosen.append(src.pop(j))
        hu_relaxed = [i for i in hu_relaxed if i not in chosen]
    else:
        chosen += _pick(hu_primary, n_human, rng)
    if len(chosen) < k:
        chosen += _pick([i for i in hu_relaxed if i not in chosen],
                        k - len(chosen), rng)

    reviewers = [pool[i] for i in chosen]
    for r in reviewers:
        r.workload += 1
    return reviewers


def generate_review(m: Manuscript, r: Reviewer, noise_multiplier: float,
                    cfg: PipelineConfig, score_rng: RngStream,
                    time_rng: RngStream, round_no: int) -> Review:
    sigma = (cfg.noise_base + cfg.noise_complexity_gain * m.complexity) * r.reliability
    if r.kind == "ai":
        sigma *= cfg.ai_noise_multiplier
    sigma *= noise_multiplier
    raw = m.quality + score_rng.normal(0.0, sigma)
    score = 0.0 if raw < 0.0 else 1.0 if raw > 1.0 else raw
    time_cost = time_rng.lognormal(cfg.time_mu, cfg.time_sigma)
    if r.kind == "ai":
        time_cost *= cfg.ai_time_factor
    return Review(manuscript_id=m.id, reviewer_id=r.id, score=score,
                  time_cost=time_cost, round=round_no)


def aggregate_meta(m: Manuscript, k: int) -> MetaReview:
    scores = [rv.score for rv in m.reviews]
    if not scores:
        raise ConsistencyError(f"manuscript {m.id} has no reviews to aggregate")
    return MetaReview(
        manuscript_id=m.id,
        disagreement=max(scores) - min(scores),
        completeness=min(1.0, len(scores) / k),
        mean_score=sum(scores) / len(scores),
        n_reviews=len(scores),
        rounds_used=m.rounds_used,
    )


def maybe_escalate(meta: MetaReview, escalation_enabled: bool,
                   cfg: PipelineConfig) -> bool:
    if not escalation_enabled or meta.rounds_used >= cfg.max_rounds:
        return False
    return meta.disagreement > cfg.disc_th or meta.completeness < cfg.comp_th


def decide(meta: MetaReview, cfg: PipelineConfig) -> str:
    if meta.mean_score >= cfg.accept_th:
        return ACCEPT
    if meta.mean_score < cfg.reject_th:
        return REJECT
    return REVISE


def release_workloads(reviewer_ids: list[str], pool_by_id: dict[str, Reviewer]) -> None:
    for rid in reviewer_ids:
        r = pool_by_id.get(rid)
        if r is None:
            raise ConsistencyError(f"release for unknown reviewer {rid}")
        if r.workload <= 0:
            raise ConsistencyError(f"workload underflow for reviewer {rid}")
        r.workload -= 1
