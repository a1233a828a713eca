"""Coordinated reviewer cluster: share growth, EMA detection, mitigation.

A tagged subset of human reviewers tries to concentrate reviews of
cluster-authored manuscripts onto itself. The cluster's target share drives
a per-slot assignment bias; what the detector actually consumes is the
realized within-cluster co-review fraction measured over a sliding window,
smoothed by an EMA. Detection is threshold-plus-patience; once the
intervention fires it stays on and decays the target share every step.
With mitigation disabled the detector still tracks and logs, it just never
intervenes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .config import AdversaryConfig
from .rng import RngStream


def update_kappa(kappa: float, share: float, alpha: float) -> float:
    """One EMA step: (1 - alpha) * kappa + alpha * share."""
    return (1.0 - alpha) * kappa + alpha * share


@dataclass
class CollusionState:
    cfg: AdversaryConfig
    share: float = 0.0
    measured_share: float = 0.0
    kappa: float = 0.0
    consecutive_above: int = 0
    intervention_active: bool = False
    first_intervention_t: Optional[int] = None
    max_kappa: float = 0.0
    window: deque = field(default_factory=deque)

    def step_share(self, rng: RngStream) -> float:
        if self.intervention_active:
            self.share *= 1.0 - self.cfg.mitigation_strength
        else:
            growth = self.cfg.share_growth * (1.0 + rng.normal(0.0, self.cfg.share_noise))
            self.share = min(self.share + growth, self.cfg.share_cap)
            self.share = max(self.share, 0.0)
        return self.share

    def record_assignments(self, cluster_count: int, total_count: int) -> float:
        """Fold this step's cluster-manuscript assignments into the window."""
        self.window.append((cluster_count, total_count))
        while len(self.window) > self.cfg.measure_window:
            self.window.popleft()
        total = sum(n for _, n in self.window)
        if total > 0:
            self.measured_share = sum(c for c, _ in self.window) / total
        return self.measured_share

    def update_kappa(self, s_t: float) -> float:
        self.kappa = update_kappa(self.kappa, s_t, self.cfg.alpha)
        if self.kappa > self.max_kappa:
            self.max_kappa = self.kappa
        return self.kappa

    def check_detection(self, t: int) -> Optional[dict]:
        """Returns an intervention event payload the first time it fires."""
        if self.kappa > self.cfg.detect_threshold:
            self.consecutive_above += 1
        else:
            self.consecutive_above = 0
        if (self.consecutive_above >= self.cfg.patience
                and not self.cfg.disable_mitigation
                and not self.intervention_active):
            self.intervention_active = True
            self.first_intervention_t = t
            return {"kappa": self.kappa, "first_intervention_t": t}
        return None
