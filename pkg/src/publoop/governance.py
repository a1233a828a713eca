"""Aggregate signals, the bounded policy rule, and the diagnostic objective.

The controller never sees individual manuscripts. It reads per-timestep
aggregates and nudges two knobs (triage threshold, AI reviewer fraction)
plus the escalation flag, with fixed step sizes, clamps, and hysteresis.
The scalar objective is logged for diagnostics only; it never drives the
update.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .config import GovernanceConfig


@dataclass(frozen=True)
class PolicyState:
    tau: float
    rho_ai: float
    escalation_enabled: bool


@dataclass(frozen=True)
class SignalSnapshot:
    t: int
    backlog: int
    mean_disagreement: float
    mean_load: float
    max_load_observed: int
    concentration: float
    processed: int
    escalations: int
    perf: float


@dataclass(frozen=True)
class PolicyChange:
    field: str
    old: float | bool
    new: float | bool
    trigger: str


def initial_policy(cfg: GovernanceConfig) -> PolicyState:
    return PolicyState(tau=cfg.triage_th0, rho_ai=cfg.ai_initial,
                       escalation_enabled=cfg.escalation_initial)


def objective(s: SignalSnapshot, cfg: GovernanceConfig) -> float:
    return (cfg.w_backlog * (-s.backlog)
            + cfg.w_disagreement * (-s.mean_disagreement)
            + cfg.w_load * (-s.mean_load)
            + cfg.w_concentration * (-s.concentration)
            + cfg.w_perf * s.perf)


def _sustained(history: Sequence[SignalSnapshot], n: int, pred) -> bool:
    if len(history) < n:
        return False
    return all(pred(s) for s in history[-n:])


def update_policy(policy: PolicyState, s: SignalSnapshot, cfg: GovernanceConfig,
                  history: Sequence[SignalSnapshot]) -> tuple[PolicyState, list[PolicyChange]]:
    """Apply the backlog and disagreement rules; history must end with s.

    Each rule contributes at most one step per knob per call, so
    |d tau| <= 2 * triage_step and |d rho_ai| <= ai_step. Saturated clamps
    produce no change record.
    """
    h = cfg.hysteresis_steps
    tau, rho, esc = policy.tau, policy.rho_ai, policy.escalation_enabled
    changes: list[PolicyChange] = []

    if _sustained(history, h, lambda x: x.backlog > cfg.backlog_high):
        rho += cfg.eta * cfg.ai_step
        tau += cfg.eta * cfg.triage_step
        backlog_trigger = "backlog_high"
    elif _sustained(history, h, lambda x: x.backlog < cfg.backlog_low):
        rho -= cfg.eta * cfg.ai_step
        tau -= cfg.eta * cfg.triage_step
        backlog_trigger = "backlog_low"
    else:
        backlog_trigger = None

    disagreement_trigger = None
    if s.mean_disagreement > cfg.disagreement_high:
        tau += cfg.eta * cfg.triage_step
        disagreement_trigger = "disagreement_high"
        if not esc:
            esc = True
            changes.append(PolicyChange("escalation_enabled", False, True,
                                        "disagreement_high"))
    elif esc and _sustained(history, h,
                            lambda x: x.mean_disagreement <= cfg.disagreement_high):
        esc = False
        changes.append(PolicyChange("escalation_enabled", True, False,
                                    "disagreement_low"))

    rho = min(max(rho, cfg.ai_min), cfg.ai_max)
    tau = min(max(tau, cfg.triage_th0), cfg.tau_max)

    if rho != policy.rho_ai:
        changes.append(PolicyChange("rho_ai", policy.rho_ai, rho,
                                    backlog_trigger or "clamp"))
    if tau != policy.tau:
        changes.append(PolicyChange("tau", policy.tau, tau,
                                    disagreement_trigger or backlog_trigger or "clamp"))
    return PolicyState(tau=tau, rho_ai=rho, escalation_enabled=esc), changes


def collect_signals(t: int, backlog_size: int, disagreements: Sequence[float],
                    mean_load: float, max_load_observed: int, concentration: float,
                    processed: int, escalations: int, capacity: int) -> SignalSnapshot:
    mean_d = sum(disagreements) / len(disagreements) if disagreements else 0.0
    perf = processed / capacity if capacity > 0 else 0.0
    return SignalSnapshot(
        t=t, backlog=backlog_size, mean_disagreement=mean_d,
        mean_load=mean_load, max_load_observed=max_load_observed,
        concentration=concentration, processed=processed,
        escalations=escalations, perf=perf,
    )
