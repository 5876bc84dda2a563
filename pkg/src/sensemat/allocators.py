"""Greedy sensing-matrix builders.

All three schemes fill the matrix column by column (mini-slot by
mini-slot).  Within a column every user picks the channel with the best
marginal reward; the order in which users pick is the fairness lever:

* column 1 starts from a user chosen by rotating the slot index, then
  proceeds cyclically, so the privileged first pick moves every slot;
* later columns let users pick in ascending order of the reward they have
  accumulated so far, so whoever is worst off so far chooses first.

``build_sms_matrix`` assumes error-free sensing and assigns each channel
at most once.  ``build_msms_matrix`` accounts for false alarms and missed
detections: a channel assigned to earlier users is still worth something
because a false alarm may leave it unclaimed, so channels can repeat up
to ``repeat_cap`` times across the matrix.  ``build_pmsms_matrix``
additionally models a persistence MAC where each user only senses with
probability ``quality.persistence``; at persistence 1.0 it reduces to the
MSMS build exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import (
    ChannelProfile,
    SensingQuality,
    TimingConfig,
    check_feasible,
    rate_table,
)


def rotation_start_user(slot: int, n_su: int) -> int:
    """1-based index of the user who picks first in the given slot."""
    if slot < 1:
        raise ValueError("slot index is 1-based")
    if n_su < 1:
        raise ValueError("n_su must be >= 1")
    return 1 + (slot - 1) % n_su


def _round_one_order(slot: int, n_su: int) -> list[int]:
    start = rotation_start_user(slot, n_su)
    return [1 + (start - 1 + k) % n_su for k in range(n_su)]


# ---------------------------------------------------------------------------
# error-free scheme


def sms_reward(channel, minislot, prefix, profile: ChannelProfile, timing: TimingConfig) -> float:
    """Marginal reward of appending ``channel`` at ``minislot`` to a row
    whose earlier entries are ``prefix``: the probability that every prefix
    channel was busy, times the candidate's free probability, times the
    rate left at that mini-slot."""
    if channel in prefix:
        raise ValueError(f"channel {channel} is already assigned in this row")
    still_searching = 1.0
    for c in prefix:
        still_searching *= 1.0 - profile.p0[c - 1]
    b = rate_table(timing, minislot)[minislot - 1]
    return still_searching * profile.p0[channel - 1] * b


def cumulative_reward(prefix, profile: ChannelProfile, timing: TimingConfig) -> float:
    """Total reward a row accumulated while its prefix was assigned."""
    total = 0.0
    for m, c in enumerate(prefix, start=1):
        total += sms_reward(c, m, prefix[: m - 1], profile, timing)
    return total


def build_sms_matrix(
    profile: ChannelProfile, timing: TimingConfig, n_su: int, slot: int = 1
) -> np.ndarray:
    """Greedy error-free build; every channel is assigned exactly once."""
    if n_su < 1:
        raise ValueError("n_su must be >= 1")
    n_ch = profile.n_channels
    check_feasible(timing, n_ch)
    b = rate_table(timing, n_ch)

    sm = np.zeros((n_su, n_ch), dtype=np.int64)
    available = list(range(1, n_ch + 1))
    still_searching = np.ones(n_su + 1)   # prefix busy-probability per user
    credited = np.zeros(n_su + 1)
    order = _round_one_order(slot, n_su)

    for m in range(1, n_ch + 1):
        if not available:
            break
        for user in order:
            if not available:
                break
            best_c = -1
            best_r = -1.0
            for c in available:
                r = still_searching[user] * profile.p0[c - 1] * b[m - 1]
                if r > best_r:
                    best_r = r
                    best_c = c
            sm[user - 1, m - 1] = best_c
            available.remove(best_c)
            still_searching[user] *= 1.0 - profile.p0[best_c - 1]
            credited[user] += best_r
        order = sorted(range(1, n_su + 1), key=lambda u: (credited[u], u))
    return sm


# ---------------------------------------------------------------------------
# sensing-error-aware schemes


@dataclass(frozen=True)
class OccupancyEstimate:
    """Believed occupancy of a channel at some mini-slot: ``q1`` is the
    probability the channel is unusable (primary present, or grabbed by one
    of the ``prior_count`` users assigned to it in earlier mini-slots)."""

    q1: float
    prior_count: int

    @property
    def q0(self) -> float:
        return 1.0 - self.q1


def _occupancy_q1(p0_c: float, prior_count: int, persistence: float, p_fa: float) -> float:
    if prior_count == 0:
        return 1.0 - p0_c
    # the channel stays usable only if it is primary-free and every prior
    # assignee either skipped its sensing or false-alarmed
    miss = 1.0 - persistence + persistence * p_fa
    return 1.0 - p0_c * miss ** prior_count


def _hbar(n_same_minislot: int, persistence: float, p_fa: float) -> float:
    if persistence == 1.0:
        return (1.0 - p_fa) * p_fa ** n_same_minislot
    miss = 1.0 - persistence + persistence * p_fa
    return persistence * (1.0 - p_fa) * miss ** n_same_minislot


def occupation_probability(
    channel: int, prior_count: int, profile: ChannelProfile, quality: SensingQuality
) -> OccupancyEstimate:
    """Occupancy estimate under the always-sense MAC."""
    if prior_count < 0:
        raise ValueError("prior_count must be >= 0")
    q1 = _occupancy_q1(profile.p0[channel - 1], prior_count, 1.0, quality.p_fa)
    return OccupancyEstimate(q1=q1, prior_count=prior_count)


def occupation_probability_pmac(
    channel: int, prior_count: int, profile: ChannelProfile, quality: SensingQuality
) -> OccupancyEstimate:
    """Occupancy estimate when prior assignees sense only with probability
    ``quality.persistence``."""
    if prior_count < 0:
        raise ValueError("prior_count must be >= 0")
    q1 = _occupancy_q1(
        profile.p0[channel - 1], prior_count, quality.persistence, quality.p_fa
    )
    return OccupancyEstimate(q1=q1, prior_count=prior_count)


def contention_factor_hbar(n_same_minislot: int, quality: SensingQuality) -> float:
    """Probability that a user wins a channel it shares with
    ``n_same_minislot`` co-assigned users in the same mini-slot: the user
    senses and reads the channel free while every rival stays silent."""
    if n_same_minislot < 0:
        raise ValueError("n_same_minislot must be >= 0")
    return _hbar(n_same_minislot, quality.persistence, quality.p_fa)


def _prefix_continue_prob(prefix, quality: SensingQuality) -> float:
    """Probability the user is still searching after its prefix entries:
    per entry, either a false alarm on a free channel or a correct
    detection on a busy one."""
    c1 = 1.0
    for est in prefix:
        c1 *= est.q0 * quality.p_fa + est.q1 * quality.p_d
    return c1


def _reward_error_aware(
    channel, minislot, prefix, n_same_minislot, prior_count,
    profile, timing, quality, persistence,
) -> float:
    c1 = _prefix_continue_prob(prefix, quality)
    q1 = _occupancy_q1(profile.p0[channel - 1], prior_count, persistence, quality.p_fa)
    b = rate_table(timing, minislot)[minislot - 1]
    return c1 * (1.0 - q1) * _hbar(n_same_minislot, persistence, quality.p_fa) * b


def msms_reward(
    channel: int,
    minislot: int,
    prefix,
    n_same_minislot: int,
    prior_count: int,
    profile: ChannelProfile,
    timing: TimingConfig,
    quality: SensingQuality,
) -> float:
    """Expected reward of the candidate under imperfect sensing: the user
    must still be searching (``prefix``), find the channel free, and be the
    only one of its ``n_same_minislot`` co-assignees to claim it."""
    return _reward_error_aware(
        channel, minislot, prefix, n_same_minislot, prior_count,
        profile, timing, quality, persistence=1.0,
    )


def pmsms_reward(
    channel: int,
    minislot: int,
    prefix,
    n_same_minislot: int,
    prior_count: int,
    profile: ChannelProfile,
    timing: TimingConfig,
    quality: SensingQuality,
) -> float:
    """Like ``msms_reward`` with the persistence MAC folded in; identical
    to it at persistence 1.0."""
    return _reward_error_aware(
        channel, minislot, prefix, n_same_minislot, prior_count,
        profile, timing, quality, persistence=quality.persistence,
    )


@dataclass
class AllocationContext:
    """Mutable state of an error-aware build: assignment counts from the
    already-fixed columns, counts inside the column being filled, and per
    user the frozen occupancy estimates and credited rewards."""

    n_channels: int
    n_su: int
    repeat_cap: int
    prior_counts: np.ndarray = field(init=False)
    column_counts: np.ndarray = field(init=False)
    prefixes: list = field(init=False)
    credited: np.ndarray = field(init=False)

    def __post_init__(self):
        self.prior_counts = np.zeros(self.n_channels + 1, dtype=np.int64)
        self.column_counts = np.zeros(self.n_channels + 1, dtype=np.int64)
        self.prefixes = [[] for _ in range(self.n_su + 1)]
        self.credited = np.zeros(self.n_su + 1)

    def candidates(self) -> list[int]:
        return [
            c
            for c in range(1, self.n_channels + 1)
            if self.prior_counts[c] + self.column_counts[c] < self.repeat_cap
        ]

    def commit(self, user: int, channel: int, estimate: OccupancyEstimate, reward: float):
        self.column_counts[channel] += 1
        self.prefixes[user].append(estimate)
        self.credited[user] += reward

    def finish_column(self):
        self.prior_counts += self.column_counts
        self.column_counts[:] = 0

    def exhausted(self) -> bool:
        return not self.candidates()


def _build_error_aware(
    profile: ChannelProfile,
    timing: TimingConfig,
    quality: SensingQuality,
    n_su: int,
    slot: int,
    repeat_cap: int,
    persistence: float,
) -> np.ndarray:
    if n_su < 1:
        raise ValueError("n_su must be >= 1")
    if repeat_cap < 1:
        raise ValueError("repeat_cap must be >= 1")
    n_ch = profile.n_channels
    check_feasible(timing, n_ch)
    b = rate_table(timing, n_ch)

    sm = np.zeros((n_su, n_ch), dtype=np.int64)
    ctx = AllocationContext(n_channels=n_ch, n_su=n_su, repeat_cap=repeat_cap)
    order = _round_one_order(slot, n_su)

    for m in range(1, n_ch + 1):
        if ctx.exhausted():
            break
        for user in order:
            cands = ctx.candidates()
            if not cands:
                continue
            c1 = _prefix_continue_prob(ctx.prefixes[user], quality)
            best_c = 0
            best_r = 0.0
            best_est = None
            for c in cands:
                q1 = _occupancy_q1(
                    profile.p0[c - 1], int(ctx.prior_counts[c]), persistence, quality.p_fa
                )
                r = (
                    c1
                    * (1.0 - q1)
                    * _hbar(int(ctx.column_counts[c]), persistence, quality.p_fa)
                    * b[m - 1]
                )
                if r > best_r:
                    best_r = r
                    best_c = c
                    best_est = OccupancyEstimate(q1=q1, prior_count=int(ctx.prior_counts[c]))
            if best_c == 0:
                # nothing offers positive reward; leave the mini-slot idle
                continue
            sm[user - 1, m - 1] = best_c
            ctx.commit(user, best_c, best_est, best_r)
        ctx.finish_column()
        order = sorted(range(1, n_su + 1), key=lambda u: (ctx.credited[u], u))
    return sm


def build_msms_matrix(
    profile: ChannelProfile,
    timing: TimingConfig,
    quality: SensingQuality,
    n_su: int,
    slot: int = 1,
    repeat_cap: int = 3,
) -> np.ndarray:
    """Error-aware build under the always-sense MAC.  ``quality.persistence``
    is ignored here; it only matters to the PMAC variant."""
    return _build_error_aware(
        profile, timing, quality, n_su, slot, repeat_cap, persistence=1.0
    )


def build_pmsms_matrix(
    profile: ChannelProfile,
    timing: TimingConfig,
    quality: SensingQuality,
    n_su: int,
    slot: int = 1,
    repeat_cap: int = 3,
) -> np.ndarray:
    """Error-aware build that assumes users sense with probability
    ``quality.persistence`` each mini-slot."""
    return _build_error_aware(
        profile, timing, quality, n_su, slot, repeat_cap,
        persistence=quality.persistence,
    )
