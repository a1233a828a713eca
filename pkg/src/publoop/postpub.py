"""Delayed impact for accepted manuscripts and retrospective credit.

Impact arrives as Poisson counts whose rate saturates in latent quality.
Author credit accrues per timestep from the smoothed impact's deviation
against a nominal level; reviewer credit settles once per publication when
its accrual horizon closes, rewarding sign agreement between the ex ante
score and the ex post outcome. Nothing here ever touches a past decision.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

from .config import PostpubConfig
from .rng import RngStream


def sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def impact_increment(q: float, cfg: PostpubConfig, rng: RngStream) -> int:
    return rng.poisson(cfg.xi * sigmoid(q - cfg.q0))


def smooth_impact(raw_series: list[int], window: int) -> list[float]:
    """Trailing moving average over the last `window` values."""
    out = []
    for i in range(len(raw_series)):
        lo = max(0, i - window + 1)
        chunk = raw_series[lo:i + 1]
        out.append(sum(chunk) / len(chunk))
    return out


def trailing_mean(raw_series: list[int], window: int) -> float:
    chunk = raw_series[-window:] if window < len(raw_series) else raw_series
    return sum(chunk) / len(chunk) if chunk else 0.0


@dataclass
class Publication:
    manuscript_id: str
    authors: list[str]
    quality: float
    accepted_t: int
    review_scores: list[tuple[str, float]]
    impacts: list[int] = field(default_factory=list)
    retired: bool = False


@dataclass
class CreditLedger:
    author_credit: dict = field(default_factory=lambda: defaultdict(float))
    reviewer_credit: dict = field(default_factory=lambda: defaultdict(float))

    def mean_author(self) -> float:
        if not self.author_credit:
            return 0.0
        return sum(self.author_credit.values()) / len(self.author_credit)

    def mean_reviewer(self) -> float:
        if not self.reviewer_credit:
            return 0.0
        return sum(self.reviewer_credit.values()) / len(self.reviewer_credit)


def update_author_credit(ledger: CreditLedger, author_ids: list[str],
                         c_i: float, alpha_a: float, c_bar: float) -> None:
    """Every coauthor gets the full deviation credit, not a split."""
    delta = alpha_a * (c_i - c_bar)
    for aid in author_ids:
        ledger.author_credit[aid] += delta


def update_reviewer_credit(ledger: CreditLedger, reviewer_id: str, score: float,
                           c_i: float, c_bar: float, accept_midpoint: float,
                           alpha_r: float) -> None:
    """Bounded sign-agreement update: |change| <= alpha_r."""
    ds = score - accept_midpoint
    dc = c_i - c_bar
    if ds == 0.0 or dc == 0.0:
        phi = 0.0
    elif (ds > 0) == (dc > 0):
        phi = 1.0
    else:
        phi = -1.0
    ledger.reviewer_credit[reviewer_id] += alpha_r * phi
