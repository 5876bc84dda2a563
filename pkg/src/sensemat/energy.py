"""Search-energy accounting for sensing sequences.

A user walks its sensing sequence until it finds a free channel; each
sensed channel costs ``e_sense`` and each retune between sensed channels
costs ``e_ho``.  ``expected_handovers`` is the closed form for the mean
number of retunes (with the convention that exhausting an all-busy
sequence of length L counts as L retunes); ``handover_enumeration_oracle``
recomputes the same quantity by enumerating all 2^L busy patterns and is
the ground truth the closed form is tested against.

``expected_sensing_count`` is the exact mean number of channels actually
sensed.  Note that ``total_search_energy`` charges one sensing plus the
retune count per user, which exceeds the exact sensing count by the
probability that the whole sequence is busy; the closed forms are kept
as-is on purpose and the gap is asserted in the tests rather than
silently corrected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ChannelProfile, as_matrix


@dataclass(frozen=True)
class EnergyConfig:
    """Per-sensing and per-retune energy costs (arbitrary units)."""

    e_sense: float = 1.0
    e_ho: float = 0.0

    def __post_init__(self):
        if self.e_sense < 0.0 or self.e_ho < 0.0:
            raise ValueError("energy costs must be non-negative")


def _check_sequence(sequence, profile: ChannelProfile) -> list[int]:
    seq = [int(c) for c in sequence]
    n_ch = profile.n_channels
    for c in seq:
        if not 1 <= c <= n_ch:
            raise ValueError(f"channel {c} outside 1..{n_ch}")
    if len(set(seq)) != len(seq):
        raise ValueError("sequence must be repetition-free")
    return seq


def expected_handovers(sequence, profile: ChannelProfile) -> float:
    """Mean number of retunes while walking ``sequence`` for a free channel."""
    seq = _check_sequence(sequence, profile)
    length = len(seq)
    if length == 0:
        return 0.0
    p0 = profile.p0
    total = 0.0
    busy_prefix = 1.0 - p0[seq[0] - 1]
    for k in range(2, length + 1):
        total += (k - 1) * p0[seq[k - 1] - 1] * busy_prefix
        busy_prefix *= 1.0 - p0[seq[k - 1] - 1]
    total += length * busy_prefix
    return total


def handover_enumeration_oracle(sequence, profile: ChannelProfile) -> float:
    """Same expectation by brute force over every busy/free pattern."""
    seq = _check_sequence(sequence, profile)
    length = len(seq)
    if length == 0:
        return 0.0
    p0 = profile.p0
    total = 0.0
    for pattern in range(1 << length):
        weight = 1.0
        for k in range(length):
            busy = (pattern >> k) & 1
            weight *= (1.0 - p0[seq[k] - 1]) if busy else p0[seq[k] - 1]
        handovers = length     # every channel busy: retuned after each one
        for k in range(length):
            if not (pattern >> k) & 1:
                handovers = k  # free at position k+1 after k retunes
                break
        total += weight * handovers
    return total


def expected_sensing_count(sequence, profile: ChannelProfile) -> float:
    """Exact mean number of channels the walk actually senses."""
    seq = _check_sequence(sequence, profile)
    total = 0.0
    busy_prefix = 1.0
    for c in seq:
        total += busy_prefix
        busy_prefix *= 1.0 - profile.p0[c - 1]
    return total


def row_sequences(sm) -> list[list[int]]:
    """Nonzero entries of each row, in mini-slot order."""
    sm = as_matrix(sm)
    return [[int(c) for c in row if c != 0] for row in sm]


def total_search_energy(
    sm,
    profile: ChannelProfile,
    energy: EnergyConfig,
    include_handover: bool = True,
) -> float:
    """Per-slot search-energy form: one sensing per user with a nonempty
    row, plus the expected retunes, each retune optionally paying ``e_ho``
    on top of its sensing."""
    sequences = [seq for seq in row_sequences(sm) if seq]
    if not sequences:
        return 0.0
    g_total = sum(expected_handovers(seq, profile) for seq in sequences)
    value = (len(sequences) + g_total) * energy.e_sense
    if include_handover:
        value += g_total * energy.e_ho
    return value


def homogeneous_energy_closed_form(
    p_free: float, n_channels: int, n_su: int, e_sense: float = 1.0
) -> float:
    """Approximate closed form of the full-sequence search energy when
    every channel has the same free probability.  At ``p_free`` 0 it
    degenerates to sensing all channels: ``n_su * n_channels * e_sense``."""
    if not 0.0 <= p_free <= 1.0:
        raise ValueError("p_free must lie in [0, 1]")
    if n_channels < 1 or n_su < 1:
        raise ValueError("n_channels and n_su must be >= 1")
    if p_free == 0.0:
        return e_sense * n_su * n_channels
    q = 1.0 - p_free
    return e_sense * n_su * ((q ** 2 - q ** (n_channels + 1)) / p_free + 1.0)


def full_sequence_sensing_energy(
    p_free: float, n_channels: int, n_su: int, e_sense: float = 1.0
) -> float:
    """Exact expected sensing energy when every user walks a full-length
    sequence over channels with a common free probability; this is the
    ground-truth counterpart of ``homogeneous_energy_closed_form``."""
    if not 0.0 <= p_free <= 1.0:
        raise ValueError("p_free must lie in [0, 1]")
    if n_channels < 1 or n_su < 1:
        raise ValueError("n_channels and n_su must be >= 1")
    if p_free == 0.0:
        return e_sense * n_su * n_channels
    q = 1.0 - p_free
    per_user = (1.0 - q ** n_channels) / p_free
    return e_sense * n_su * per_user


def sms_energy_bounds(
    n_channels: int, n_su: int, e_sense: float = 1.0
) -> tuple[float, float]:
    """(best, worst) per-slot sensing energy of the error-free greedy
    matrix: every channel is assigned once, so at most ``n_channels``
    sensings happen, and at least one per user holding channels."""
    if n_channels < 1 or n_su < 1:
        raise ValueError("n_channels and n_su must be >= 1")
    return (min(n_channels, n_su) * e_sense, n_channels * e_sense)
