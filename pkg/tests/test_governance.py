from __future__ import annotations

import math

from hypothesis import given
from hypothesis import strategies as st

from publoop.config import GovernanceConfig
from publoop.governance import (PolicyState, SignalSnapshot, collect_signals,
                                initial_policy, objective, update_policy)


def _sig(t=0, backlog=20, disagreement=0.05, load=1.0, concentration=0.0,
         processed=30, perf=0.5):
    return SignalSnapshot(t=t, backlog=backlog, mean_disagreement=disagreement,
                          mean_load=load, max_load_observed=2,
                          concentration=concentration, processed=processed,
                          escalations=0, perf=perf)


def _history(cfg, *backlogs, disagreement=0.05):
    return [_sig(t=i, backlog=b, disagreement=disagreement)
            for i, b in enumerate(backlogs)]


def test_initial_policy_reads_config():
    cfg = GovernanceConfig()
    p = initial_policy(cfg)
    assert p == PolicyState(tau=0.45, rho_ai=0.2, escalation_enabled=True)


def test_objective_oracle():
    cfg = GovernanceConfig()
    s = _sig(backlog=10, disagreement=0.0, load=0.0, concentration=0.0, perf=0.0)
    assert abs(objective(s, cfg) - (-10.0)) < 1e-12
    s2 = _sig(backlog=5, disagreement=0.2, load=1.5, concentration=0.1, perf=0.8)
    assert abs(objective(s2, cfg) - (-5 - 0.2 - 1.5 - 0.1 + 0.8)) < 1e-12


def test_backlog_high_tightens_both_knobs():
    # escalation already off so only the backlog rule is in play
    cfg = GovernanceConfig()
    start = PolicyState(tau=0.45, rho_ai=0.2, escalation_enabled=False)
    history = _history(cfg, 50, 60, 55)
    p, changes = update_policy(start, history[-1], cfg, history)
    assert abs(p.rho_ai - 0.25) < 1e-12
    assert abs(p.tau - 0.48) < 1e-12
    assert {c.field for c in changes} == {"rho_ai", "tau"}
    assert all(c.trigger == "backlog_high" for c in changes)


def test_backlog_high_needs_sustained_signal():
    cfg = GovernanceConfig()
    start = PolicyState(tau=0.45, rho_ai=0.2, escalation_enabled=False)
    history = _history(cfg, 50, 5, 60)  # interrupted: no trigger
    p, changes = update_policy(start, history[-1], cfg, history)
    assert changes == []
    assert p == start


def test_backlog_low_relaxes_both_knobs():
    cfg = GovernanceConfig()
    start = PolicyState(tau=0.6, rho_ai=0.4, escalation_enabled=False)
    history = _history(cfg, 3, 2, 4)
    p, changes = update_policy(start, history[-1], cfg, history)
    assert abs(p.rho_ai - 0.35) < 1e-12
    assert abs(p.tau - 0.57) < 1e-12
    assert all(c.trigger == "backlog_low" for c in changes)


def test_clamps_are_silent():
    cfg = GovernanceConfig()
    at_max = PolicyState(tau=0.7, rho_ai=0.6, escalation_enabled=False)
    history = _history(cfg, 50, 60, 55)
    p, changes = update_policy(at_max, history[-1], cfg, history)
    assert p.tau == 0.7 and p.rho_ai == 0.6
    assert changes == []


def test_disagreement_rise_is_immediate():
    cfg = GovernanceConfig()
    start = PolicyState(tau=0.45, rho_ai=0.2, escalation_enabled=False)
    history = [_sig(t=0, disagreement=0.5)]
    p, changes = update_policy(start, history[-1], cfg, history)
    assert abs(p.tau - 0.48) < 1e-12
    assert p.escalation_enabled is True
    fields = {c.field: c for c in changes}
    assert fields["tau"].trigger == "disagreement_high"
    assert fields["escalation_enabled"].new is True


def test_disagreement_disable_needs_hysteresis():
    cfg = GovernanceConfig()
    start = PolicyState(tau=0.45, rho_ai=0.2, escalation_enabled=True)
    short = [_sig(t=0, disagreement=0.01), _sig(t=1, disagreement=0.01)]
    p, _ = update_policy(start, short[-1], cfg, short)
    assert p.escalation_enabled is True
    long = short + [_sig(t=2, disagreement=0.01)]
    p, changes = update_policy(start, long[-1], cfg, long)
    assert p.escalation_enabled is False
    assert changes[0].trigger == "disagreement_low"


def test_both_rules_can_move_tau_twice():
    cfg = GovernanceConfig()
    history = [_sig(t=i, backlog=50, disagreement=0.5) for i in range(3)]
    p, _ = update_policy(initial_policy(cfg), history[-1], cfg, history)
    assert abs(p.tau - (0.45 + 2 * 0.03)) < 1e-12


def test_eta_scales_steps():
    cfg = GovernanceConfig(eta=0.5)
    history = _history(cfg, 50, 60, 55)
    p, _ = update_policy(initial_policy(cfg), history[-1], cfg, history)
    assert abs(p.tau - 0.465) < 1e-12
    assert abs(p.rho_ai - 0.225) < 1e-12


@given(
    tau=st.floats(0.45, 0.7), rho=st.floats(0.1, 0.6), esc=st.booleans(),
    backlogs=st.lists(st.integers(0, 200), min_size=1, max_size=6),
    disagreement=st.floats(0.0, 1.0),
)
def test_update_never_leaves_bounds_and_is_stepwise(tau, rho, esc, backlogs, disagreement):
    cfg = GovernanceConfig()
    start = PolicyState(tau=tau, rho_ai=rho, escalation_enabled=esc)
    history = [_sig(t=i, backlog=b, disagreement=disagreement)
               for i, b in enumerate(backlogs)]
    p, _ = update_policy(start, history[-1], cfg, history)
    assert cfg.ai_min <= p.rho_ai <= cfg.ai_max
    assert cfg.triage_th0 <= p.tau <= cfg.tau_max
    assert abs(p.tau - tau) <= 2 * cfg.triage_step + 1e-12
    assert abs(p.rho_ai - rho) <= cfg.ai_step + 1e-12


def test_collect_signals_perf_and_empty_disagreements():
    s = collect_signals(t=3, backlog_size=7, disagreements=[], mean_load=0.5,
                        max_load_observed=2, concentration=0.0, processed=30,
                        escalations=0, capacity=60)
    assert s.mean_disagreement == 0.0
    assert abs(s.perf - 0.5) < 1e-12
    zero_cap = collect_signals(t=3, backlog_size=7, disagreements=[0.2],
                               mean_load=0.5, max_load_observed=2,
                               concentration=0.0, processed=0, escalations=0,
                               capacity=0)
    assert zero_cap.perf == 0.0
    assert abs(zero_cap.mean_disagreement - 0.2) < 1e-12


def test_policy_changes_record_old_and_new():
    cfg = GovernanceConfig()
    history = _history(cfg, 50, 60, 55)
    _, changes = update_policy(initial_policy(cfg), history[-1], cfg, history)
    for c in changes:
        assert not math.isclose(c.old, c.new)
