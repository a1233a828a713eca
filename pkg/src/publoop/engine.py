"""Orchestration of one simulation run.

Per timestep: resolve stress windows into effective parameters, advance the
adversary's target share, take arrivals, triage against the previous step's
policy, assign and score reviews under the per-step review budget, aggregate
and possibly escalate once, decide, accrue post-publication impact and
credit, measure loads, release workloads, update the concentration detector,
then let the controller update policy for the next step. Metrics and audit
events for the step are flushed before the next step begins.

Draw order is fixed per step and every module owns a named substream, so a
(seed, resolved config) pair pins every artifact byte.
"""

from __future__ import annotations

import copy
import shutil
from pathlib import Path
from typing import Optional

from . import adversary as adv
from . import pipeline as pl
from . import postpub as pp
from .audit import AuditLog, canonical_json
from .config import ScenarioConfig
from .errors import ConsistencyError
from .governance import (PolicyState, SignalSnapshot, collect_signals,
                         initial_policy, objective, update_policy)
from .metrics import (COLUMNS, MetricsWriter, format_cell,
                      write_resolved_config, write_summary)
from .rng import RngStream
from .world import BACKLOG, IN_REVIEW, ACCEPTED, REJECTED, Manuscript, World

STREAM_LABELS = ("world_init", "arrivals", "triage", "assign", "review",
                 "time", "adversary", "postpub")


class EffectiveParams:
    """Window-adjusted knobs for one timestep."""

    __slots__ = ("arrival_multiplier", "noise_multiplier", "quality_mu_delta",
                 "adversary_active")

    def __init__(self, arrival_multiplier: float = 1.0, noise_multiplier: float = 1.0,
                 quality_mu_delta: float = 0.0, adversary_active: bool = False):
        self.arrival_multiplier = arrival_multiplier
        self.noise_multiplier = noise_multiplier
        self.quality_mu_delta = quality_mu_delta
        self.adversary_active = adversary_active


def effective_params(scenario: ScenarioConfig, t: int) -> EffectiveParams:
    eff = EffectiveParams(adversary_active=scenario.adversary.enabled)
    for w in scenario.windows:
        if not (w.start <= t < w.end):
            continue
        if w.path == "arrival_multiplier":
            eff.arrival_multiplier *= float(w.value)
        elif w.path == "noise_multiplier":
            eff.noise_multiplier *= float(w.value)
        elif w.path == "quality_mu_delta":
            # linear ramp: zero at entry, full value by the window's last step
            eff.quality_mu_delta += float(w.value) * (t - w.start + 1) / (w.end - w.start)
        elif w.path == "adversary_active":
            eff.adversary_active = bool(w.value)
    return eff


class Engine:
    """State and artifacts for a single run; step() advances one timestep."""

    def __init__(self, scenario: ScenarioConfig, run_dir: Optional[Path] = None):
        self.scenario = scenario
        self.run_dir = Path(run_dir) if run_dir else None
        self.t = 0
        self.finalized = False
        self.streams = {label: RngStream(scenario.seed, label)
                        for label in STREAM_LABELS}
        adv_cfg = scenario.adversary if scenario.adversary.enabled or any(
            w.path == "adversary_active" for w in scenario.windows) else None
        self.world = World(scenario.world, self.streams["world_init"], adv_cfg)
        self.reviewer_by_id = {r.id: r for r in self.world.reviewers}
        self.backlog: list[Manuscript] = []
        self.policy: PolicyState = initial_policy(scenario.governance)
        self.adversary: Optional[adv.CollusionState] = (
            adv.CollusionState(scenario.adversary) if adv_cfg else None
        )
        self.ledger = pp.CreditLedger()
        self.published: list[pp.Publication] = []
        self.history: list[SignalSnapshot] = []
        self.counters = {
            "arrivals": 0, "accepted": 0, "rejected": 0, "revised_decisions": 0,
            "processed": 0, "escalations": 0, "max_escalations_per_step": 0,
            "cumulative_impact": 0,
        }
        if self.run_dir:
            self.run_dir.mkdir(parents=True, exist_ok=True)
            write_resolved_config(self.run_dir, scenario.resolved_dict())
            self.audit = AuditLog(self.run_dir / "events.jsonl")
            self.metrics = MetricsWriter(self.run_dir / "metrics.csv")
        else:
            self.audit = AuditLog(None)
            self.metrics = MetricsWriter(None)
        self.audit.append(0, "run_meta", {
            "name": scenario.name,
            "seed": scenario.seed,
            "horizon": scenario.horizon,
            "config_hash": scenario.config_hash(),
            "provenance": scenario.provenance,
        })

    # -- per-step phases -------------------------------------------------

    @property
    def finished(self) -> bool:
        return self.t >= self.scenario.horizon

    def step(self) -> SignalSnapshot:
        if self.finished:
            raise ConsistencyError("step() called past horizon")
        sc = self.scenario
        t = self.t
        eff = effective_params(sc, t)
        pcfg, gcfg = sc.pipeline, sc.governance

        adversary_on = self.adversary is not None and eff.adversary_active
        if adversary_on:
            self.adversary.step_share(self.streams["adversary"])

        p_sub = min(1.0, sc.world.p_sub * eff.arrival_multiplier)
        qmu = sc.world.quality_mu + eff.quality_mu_delta
        arrivals = self.world.generate_arrivals(
            self.streams["arrivals"], t, p_sub_override=p_sub, quality_mu_override=qmu)
        self.backlog.extend(arrivals)
        self.counters["arrivals"] += len(arrivals)

        budget = pcfg.max_reviews_per_timestep
        capacity_ms = budget // pcfg.k_reviewers
        selected, deferred = pl.triage(
            self.backlog, self.policy.tau, capacity_ms,
            self.streams["triage"], pcfg.triage_noise)
        self.backlog = deferred
        self.audit.append(t, "triage_summary", {
            "tau": self.policy.tau, "selected": len(selected),
            "deferred": len(deferred), "capacity": capacity_ms,
        })

        reviews_used = 0
        units_used = 0.0
        step_assignments: list[str] = []
        cluster_assigned = 0
        cluster_total = 0
        disagreements: list[float] = []
        accepted = rejected = revised = escalations = 0

        for m in selected:
            if reviews_used >= budget or units_used >= budget:
                m.state = BACKLOG
                self.backlog.append(m)
                continue
            m.state = IN_REVIEW
            cluster_ms = adversary_on and self.world.is_cluster_authored(m)
            prior_ids: set[str] = set()
            while True:
                bias = self.adversary.share if cluster_ms else 0.0
                assigned = pl.assign_reviewers(
                    m, self.world.reviewers, self.policy.rho_ai, pcfg.k_reviewers,
                    pcfg.sim_threshold, sc.world.max_load, self.streams["assign"],
                    exclude_ids=prior_ids, cluster_bias=bias,
                    bias_rng=self.streams["adversary"] if cluster_ms else None)
                if not assigned:
                    self.audit.append(t, "assignment_fallback", {
                        "manuscript": m.id, "needed": pcfg.k_reviewers,
                        "got": 0, "round": m.rounds_used + 1,
                    })
                for r in assigned:
                    step_assignments.append(r.id)
                    if cluster_ms:
                        cluster_total += 1
                        if r.cluster_id is not None:
                            cluster_assigned += 1
                    if reviews_used >= budget or units_used >= budget:
                        continue
                    review = pl.generate_review(
                        m, r, eff.noise_multiplier, pcfg,
                        self.streams["review"], self.streams["time"],
                        round_no=m.rounds_used + 1)
                    m.reviews.append(review)
                    reviews_used += 1
                    units_used += review.time_cost
                m.rounds_used += 1
                if m.rounds_used > pcfg.max_rounds:
                    raise ConsistencyError(
                        f"manuscript {m.id} exceeded max review rounds")
                if not m.reviews:
                    break
                meta = pl.aggregate_meta(m, pcfg.k_reviewers)
                if (pl.maybe_escalate(meta, self.policy.escalation_enabled, pcfg)
                        and reviews_used < budget and units_used < budget):
                    escalations += 1
                    self.audit.append(t, "escalation", {
                        "manuscript": m.id,
                        "disagreement": meta.disagreement,
                        "completeness": meta.completeness,
                        "round": m.rounds_used + 1,
                    })
                    prior_ids = {rv.reviewer_id for rv in m.reviews}
                    continue
                break

            if not m.reviews:
                # nobody could review it; back to the queue, not a decision
                m.state = BACKLOG
                m.rounds_used = 0
                self.backlog.append(m)
                continue

            meta = pl.aggregate_meta(m, pcfg.k_reviewers)
            disagreements.append(meta.disagreement)
            outcome = pl.decide(meta, pcfg)
            if outcome == pl.ACCEPT:
                m.state = ACCEPTED
                accepted += 1
                if sc.postpub.enabled:
                    self.published.append(pp.Publication(
                        manuscript_id=m.id, authors=list(m.authors),
                        quality=m.quality, accepted_t=t,
                        review_scores=[(rv.reviewer_id, rv.score) for rv in m.reviews],
                    ))
            elif outcome == pl.REJECT:
                m.state = REJECTED
                rejected += 1
            else:
                if m.revision_count < pcfg.max_revisions:
                    m.revision_count += 1
                    m.quality = min(1.0, max(0.0, m.quality + pcfg.revise_quality_bump))
                    m.reviews = []
                    m.rounds_used = 0
                    m.state = BACKLOG
                    self.backlog.append(m)
                    revised += 1
                else:
                    m.state = REJECTED
                    rejected += 1

        processed = accepted + rejected + revised
        self.audit.append(t, "decision_batch_summary", {
            "processed": processed, "accepted": accepted,
            "rejected": rejected, "revised": revised,
            "mean_disagreement": (sum(disagreements) / len(disagreements)
                                  if disagreements else 0.0),
        })

        self._postpub_pass(t)

        n_rev = len(self.world.reviewers)
        mean_load = (sum(r.workload for r in self.world.reviewers) / n_rev
                     if n_rev else 0.0)
        max_load_observed = (max(r.workload for r in self.world.reviewers)
                             if n_rev else 0)
        if max_load_observed > sc.world.max_load:
            raise ConsistencyError("reviewer workload exceeded max_load")
        pl.release_workloads(step_assignments, self.reviewer_by_id)

        if self.adversary is not None:
            if adversary_on:
                measured = self.adversary.record_assignments(cluster_assigned,
                                                             cluster_total)
                self.adversary.update_kappa(measured)
                fired = self.adversary.check_detection(t)
                if fired is not None:
                    self.audit.append(t, "intervention", fired)
                self.audit.append(t, "collusion_state", {
                    "share": self.adversary.share,
                    "measured": self.adversary.measured_share,
                    "kappa": self.adversary.kappa,
                    "intervention_active": self.adversary.intervention_active,
                })
            concentration = self.adversary.kappa
            within_share = self.adversary.measured_share
            intervention = self.adversary.intervention_active
        else:
            concentration = 0.0
            within_share = 0.0
            intervention = False

        signals = collect_signals(
            t=t, backlog_size=len(self.backlog), disagreements=disagreements,
            mean_load=mean_load, max_load_observed=max_load_observed,
            concentration=concentration, processed=processed,
            escalations=escalations, capacity=capacity_ms)
        u = objective(signals, gcfg)
        self.history.append(signals)
        if len(self.history) > max(50, gcfg.hysteresis_steps + 1):
            del self.history[0]

        self.policy, changes = update_policy(self.policy, signals, gcfg, self.history)
        for ch in changes:
            self.audit.append(t, "policy_update", {
                "field": ch.field, "old": ch.old, "new": ch.new,
                "trigger": ch.trigger,
            })
        if not (gcfg.ai_min <= self.policy.rho_ai <= gcfg.ai_max
                and gcfg.triage_th0 <= self.policy.tau <= gcfg.tau_max):
            raise ConsistencyError("policy left its configured bounds")

        self.counters["accepted"] += accepted
        self.counters["rejected"] += rejected
        self.counters["revised_decisions"] += revised
        self.counters["processed"] += processed
        self.counters["escalations"] += escalations
        if escalations > self.counters["max_escalations_per_step"]:
            self.counters["max_escalations_per_step"] = escalations

        settled = self.counters["accepted"] + self.counters["rejected"]
        if settled + len(self.backlog) != self.counters["arrivals"]:
            raise ConsistencyError("manuscript conservation violated")

        self.metrics.write_row({
            "t": t, "backlog": len(self.backlog), "processed": processed,
            "mean_disagreement": signals.mean_disagreement,
            "mean_load": mean_load, "max_load": max_load_observed,
            "rho_ai": self.policy.rho_ai, "tau": self.policy.tau,
            "escalation_enabled": self.policy.escalation_enabled,
            "escalations": escalations, "accepted": accepted,
            "rejected": rejected, "revised": revised,
            "concentration": concentration,
            "within_cluster_share": within_share,
            "intervention_active": intervention,
            "mean_author_credit": self.ledger.mean_author(),
            "mean_reviewer_credit": self.ledger.mean_reviewer(),
            "cumulative_impact": self.counters["cumulative_impact"],
            "objective_U": u,
        })
        self.audit.flush()
        self.metrics.flush()
        self.t += 1
        return signals

    def _postpub_pass(self, t: int) -> None:
        cfg = self.scenario.postpub
        if not cfg.enabled:
            return
        midpoint = (self.scenario.pipeline.accept_th
                    + self.scenario.pipeline.reject_th) / 2.0
        rng = self.streams["postpub"]
        for pub in self.published:
            if pub.retired:
                continue
            age = t - pub.accepted_t
            if age < 1:
                continue
            dc = pp.impact_increment(pub.quality, cfg, rng)
            pub.impacts.append(dc)
            self.counters["cumulative_impact"] += dc
            smoothed = pp.trailing_mean(pub.impacts, cfg.smoothing_window)
            pp.update_author_credit(self.ledger, pub.authors, smoothed,
                                    cfg.alpha_a, cfg.c_bar)
            if age >= cfg.horizon:
                c_mean = sum(pub.impacts) / len(pub.impacts)
                for rid, score in pub.review_scores:
                    pp.update_reviewer_credit(self.ledger, rid, score, c_mean,
                                              cfg.c_bar, midpoint, cfg.alpha_r)
                pub.retired = True

    # -- run control -----------------------------------------------------

    def advance(self, n_steps: int) -> list[SignalSnapshot]:
        out = []
        for _ in range(n_steps):
            if self.finished:
                break
            out.append(self.step())
        return out

    def run_all(self) -> None:
        while not self.finished:
            self.step()

    def summary_dict(self) -> dict:
        sc = self.scenario
        s = {
            "name": sc.name,
            "seed": sc.seed,
            "horizon": sc.horizon,
            "t": self.t,
            "config_hash": sc.config_hash(),
            "final_backlog": len(self.backlog),
            "final_tau": round(self.policy.tau, 12),
            "final_rho_ai": round(self.policy.rho_ai, 12),
            "final_escalation_enabled": self.policy.escalation_enabled,
            "total_escalations": self.counters["escalations"],
            "max_escalations_per_step": self.counters["max_escalations_per_step"],
            "accepted_total": self.counters["accepted"],
            "rejected_total": self.counters["rejected"],
            "revised_total": self.counters["revised_decisions"],
            "processed_total": self.counters["processed"],
            "arrivals_total": self.counters["arrivals"],
            "cumulative_impact": self.counters["cumulative_impact"],
            "max_concentration": round(self.adversary.max_kappa, 12) if self.adversary else 0.0,
            "final_concentration": round(self.adversary.kappa, 12) if self.adversary else 0.0,
            "chain_head": self.audit.head_hash,
            "chain_length": self.audit.next_seq,
        }
        if self.adversary and self.adversary.first_intervention_t is not None:
            s["first_intervention_t"] = self.adversary.first_intervention_t
        return s

    def finalize(self) -> dict:
        summary = self.summary_dict()
        if self.run_dir and not self.finalized:
            write_summary(self.run_dir, summary)
        self.finalized = True
        self.audit.flush()
        self.metrics.flush()
        return summary

    def close(self) -> None:
        self.audit.close()
        self.metrics.close()

    # -- what-if branching -------------------------------------------------

    def fork(self, new_run_dir: Optional[Path] = None) -> "Engine":
        """Deep-copy the run state, including RNG positions and chain head."""
        self.audit.flush()
        self.metrics.flush()
        clone: Engine = object.__new__(Engine)
        clone.scenario = copy.deepcopy(self.scenario)
        clone.run_dir = Path(new_run_dir) if new_run_dir else None
        clone.t = self.t
        clone.finalized = False
        clone.streams = copy.deepcopy(self.streams)
        clone.world = copy.deepcopy(self.world)
        clone.reviewer_by_id = {r.id: r for r in clone.world.reviewers}
        clone.backlog = copy.deepcopy(self.backlog)
        # manuscripts in the backlog belong to the cloned world's id space;
        # nothing else holds references across the copy boundary
        clone.policy = self.policy
        clone.adversary = copy.deepcopy(self.adversary)
        clone.ledger = copy.deepcopy(self.ledger)
        clone.published = copy.deepcopy(self.published)
        clone.history = list(self.history)
        clone.counters = dict(self.counters)
        if clone.run_dir:
            clone.run_dir.mkdir(parents=True, exist_ok=True)
            if self.run_dir:
                for fname in ("config.resolved", "metrics.csv", "events.jsonl"):
                    src = self.run_dir / fname
                    if src.exists():
                        shutil.copyfile(src, clone.run_dir / fname)
            else:
                # source was in-memory: rebuild artifact files from buffers
                write_resolved_config(clone.run_dir, clone.scenario.resolved_dict())
                with open(clone.run_dir / "events.jsonl", "w", encoding="utf-8") as fh:
                    for event in self.audit.events:
                        fh.write(canonical_json(event) + "\n")
                with open(clone.run_dir / "metrics.csv", "w", encoding="utf-8") as fh:
                    fh.write(",".join(COLUMNS) + "\n")
                    for row in self.metrics.rows:
                        fh.write(",".join(format_cell(c, row[c]) for c in COLUMNS) + "\n")
        clone.audit = AuditLog.__new__(AuditLog)
        clone.audit.path = clone.run_dir / "events.jsonl" if clone.run_dir else None
        clone.audit.events = list(self.audit.events)
        clone.audit._seq = self.audit._seq
        clone.audit._prev = self.audit._prev
        clone.audit._fh = (open(clone.audit.path, "a", encoding="utf-8")
                           if clone.audit.path else None)
        clone.metrics = MetricsWriter.__new__(MetricsWriter)
        clone.metrics.path = clone.run_dir / "metrics.csv" if clone.run_dir else None
        clone.metrics.rows = list(self.metrics.rows)
        clone.metrics._fh = (open(clone.metrics.path, "a", encoding="utf-8")
                             if clone.metrics.path else None)
        return clone


def run_scenario(scenario: ScenarioConfig, run_dir: Optional[Path] = None) -> dict:
    """Run to horizon, write artifacts, return the summary."""
    engine = Engine(scenario, run_dir)
    try:
        engine.run_all()
        summary = engine.finalize()
    finally:
        engine.close()
    return summary
