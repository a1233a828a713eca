"""Participant pools, keyword profiles, and manuscript arrivals.

Researchers carry a fixed keyword set for the whole run. The first
n_human_reviewers researchers double as the human reviewer pool, so a
reviewer can author manuscripts and the no-self-review rule has teeth.
AI reviewers are a separate pool with their own keyword profiles.

Keyword sets are also kept as integer bitmasks; similarity checks during
assignment run on popcounts instead of set ops.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .config import AdversaryConfig, WorldConfig
from .errors import ConfigError
from .rng import RngStream

BACKLOG = "backlog"
IN_REVIEW = "in_review"
ACCEPTED = "accepted"
REJECTED = "rejected"


def jaccard(a: set, b: set) -> float:
    """|a & b| / |a | b|; 0 when both sets are empty."""
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


def _mask(keywords) -> int:
    m = 0
    for k in keywords:
        m |= 1 << k
    return m


def mask_jaccard(a: int, b: int) -> float:
    union = a | b
    if union == 0:
        return 0.0
    return (a & b).bit_count() / union.bit_count()


@dataclass
class Researcher:
    id: str
    keywords: frozenset[int]
    kw_mask: int = 0

    def __post_init__(self):
        if not self.kw_mask:
            self.kw_mask = _mask(self.keywords)


@dataclass
class Reviewer:
    id: str
    kind: str  # "human" | "ai"
    keywords: frozenset[int]
    reliability: float
    workload: int = 0
    cluster_id: Optional[int] = None
    kw_mask: int = 0

    def __post_init__(self):
        if not self.kw_mask:
            self.kw_mask = _mask(self.keywords)


@dataclass
class Manuscript:
    id: str
    authors: list[str]
    keywords: frozenset[int]
    quality: float
    complexity: float
    arrived_at: int
    state: str = BACKLOG
    revision_count: int = 0
    rounds_used: int = 0
    reviews: list = field(default_factory=list)
    kw_mask: int = 0
    author_set: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.kw_mask:
            self.kw_mask = _mask(self.keywords)
        if not self.author_set:
            self.author_set = frozenset(self.authors)


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


class World:
    """Fixed pools for one run plus the arrival process."""

    def __init__(self, cfg: WorldConfig, rng: RngStream,
                 adversary: Optional[AdversaryConfig] = None):
        if cfg.n_authors < 1:
            raise ConfigError("world needs at least one author")
        self.cfg = cfg
        self.researchers: list[Researcher] = []
        self.reviewers: list[Reviewer] = []
        self._next_manuscript = 0

        universe = cfg.keyword_universe_size
        per = cfg.keywords_per_researcher
        cluster_pool = None
        cluster_author_ids: set[int] = set()
        cluster_reviewer_ids: set[int] = set()
        # the engine passes the adversary config whenever the regime can
        # become active, including window-driven activation mid-run
        if adversary is not None and adversary.cluster_reviewers > 0:
            cluster_pool = list(range(min(adversary.cluster_keyword_pool, universe)))
            cluster_reviewer_ids = set(range(min(adversary.cluster_reviewers,
                                                 cfg.n_human_reviewers)))
            # cluster authors sit outside the reviewer block so self-review
            # never masks the bias
            lo = cfg.n_human_reviewers
            hi = min(lo + adversary.cluster_authors, cfg.n_authors)
            cluster_author_ids = set(range(lo, hi))

        for i in range(cfg.n_authors):
            if i in cluster_author_ids or i in cluster_reviewer_ids:
                take = min(per, len(cluster_pool))
                kws = frozenset(cluster_pool[j] for j in rng.sample_indices(len(cluster_pool), take))
            else:
                kws = frozenset(rng.sample_indices(universe, per))
            self.researchers.append(Researcher(id=f"u{i:04d}", keywords=kws))

        for i in range(cfg.n_human_reviewers):
            r = self.researchers[i]
            self.reviewers.append(Reviewer(
                id=r.id,
                kind="human",
                keywords=r.keywords,
                reliability=rng.uniform(cfg.reliability_low, cfg.reliability_high),
                cluster_id=0 if i in cluster_reviewer_ids else None,
            ))
        for i in range(cfg.n_ai_reviewers):
            kws = frozenset(rng.sample_indices(universe, per))
            self.reviewers.append(Reviewer(
                id=f"a{i:03d}",
                kind="ai",
                keywords=kws,
                reliability=rng.uniform(cfg.reliability_low, cfg.reliability_high),
            ))
        self.cluster_author_set = frozenset(
            self.researchers[i].id for i in cluster_author_ids
        )

    def generate_arrivals(self, rng: RngStream, t: int,
                          p_sub_override: Optional[float] = None,
                          quality_mu_override: Optional[float] = None) -> list[Manuscript]:
        cfg = self.cfg
        p = cfg.p_sub if p_sub_override is None else p_sub_override
        if not 0.0 <= p <= 1.0:
            raise ConfigError(f"submission probability must be in [0, 1], got {p}")
        qmu = cfg.quality_mu if quality_mu_override is None else quality_mu_override
        count = rng.binomial(cfg.n_authors, p)
        out = []
        for _ in range(count):
            n_auth = min(rng.integers(1, 4), cfg.n_authors)
            idx = rng.sample_indices(cfg.n_authors, n_auth)
            authors = [self.researchers[i] for i in idx]
            union = sorted(set().union(*(a.keywords for a in authors)))
            n_kw = min(3, len(union))
            kws = frozenset(union[j] for j in rng.sample_indices(len(union), n_kw))
            quality = _clamp01(rng.normal(qmu, cfg.quality_sigma))
            complexity = _clamp01(rng.normal(cfg.complexity_mu, cfg.complexity_sigma))
            m = Manuscript(
                id=f"m{self._next_manuscript:06d}",
                authors=[a.id for a in authors],
                keywords=kws,
                quality=quality,
                complexity=complexity,
                arrived_at=t,
            )
            self._next_manuscript += 1
            out.append(m)
        return out

    def is_cluster_authored(self, m: Manuscript) -> bool:
        return bool(self.cluster_author_set) and not self.cluster_author_set.isdisjoint(m.author_set)
