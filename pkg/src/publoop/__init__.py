"""Closed-loop simulator of editorial governance.

A discrete-time, seeded simulator of a scholarly publishing workflow run as
a feedback control system: manuscripts arrive, get triaged, reviewed and
decided under capacity limits, while a bounded rule-based controller adjusts
the triage threshold and the AI reviewer fraction from aggregate signals.
Every run emits a per-timestep metrics table, a hash-chained audit log, and
a summary suitable for multi-seed reports.
"""

__version__ = "0.1.0"
