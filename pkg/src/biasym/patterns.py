"""Preset-mode switching patterns for blind interference alignment.

Users equipped with reconfigurable antennas switch among preset modes on a
fixed schedule (the supersymbol) so that, without any channel knowledge at
the transmitters, interference collapses into low-dimensional subspaces.

Two constructions live here:

* the flat pattern, where every user staggers its mode switches against
  every other user directly, and
* a two-level grouping construction, where users are partitioned into
  groups; each user follows the Cartesian product of an element-level
  pattern (m1, staggered within the group) and a group-level pattern
  (m2, staggered across groups).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import prod

__all__ = [
    "ModeSpec",
    "GroupingConfig",
    "UserPattern",
    "PresetPattern",
    "base_pattern",
    "sequence_cartesian_product",
    "grouped_pattern",
    "flat_length",
    "grouped_length",
    "pattern_table",
]

PATTERN_TABLE_HEADER = "# biasym pattern table v1"


# ======================================================================
# Mode bookkeeping
# ======================================================================

@dataclass(frozen=True)
class ModeSpec:
    """Preset mode counts equipped at each user's transmit-receive pair.

    ``modes[k]`` is the number of reconfigurable-antenna preset modes user k
    can switch among.  Single-antenna transmitters with one RF chain are
    assumed throughout, so the mode count is the only per-user parameter.
    """

    modes: tuple[int, ...]

    def __init__(self, modes) -> None:
        object.__setattr__(self, "modes", tuple(int(m) for m in modes))
        if len(self.modes) < 1:
            raise ValueError("mode list must be nonempty")
        if any(m < 2 for m in self.modes):
            raise ValueError("every preset mode count must be >= 2")

    @property
    def num_users(self) -> int:
        return len(self.modes)


@dataclass(frozen=True)
class GroupingConfig:
    """A validated grouping of users plus per-user used mode counts.

    ``groups`` holds original user indices (0-based), already in canonical
    within-group order: descending used mode count, original index breaking
    ties.  ``element_counts[k]`` is the element-level mode count shared by
    the users at within-group position k of every group; it must satisfy
    ``used == element_counts[position] * group_mode_counts[group]`` for
    every user, which is exactly the condition that lets group-level
    switching align across groups.

    A single-group config carries ``group_mode_counts == (1,)``: one group
    means no group level at all, and the construction degenerates to the
    flat pattern over the used mode counts.
    """

    equipped: tuple[int, ...]
    used: tuple[int, ...]
    groups: tuple[tuple[int, ...], ...]
    group_mode_counts: tuple[int, ...]
    element_counts: tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        eq = tuple(int(m) for m in self.equipped)
        us = tuple(int(m) for m in self.used)
        grs = tuple(tuple(int(u) for u in g) for g in self.groups)
        mgs = tuple(int(m) for m in self.group_mode_counts)
        object.__setattr__(self, "equipped", eq)
        object.__setattr__(self, "used", us)
        object.__setattr__(self, "groups", grs)
        object.__setattr__(self, "group_mode_counts", mgs)

        K = len(eq)
        if K < 1:
            raise ValueError("equipped mode list must be nonempty")
        if any(m < 2 for m in eq):
            raise ValueError("every equipped mode count must be >= 2")
        if len(us) != K:
            raise ValueError("used mode list must match the user count")
        if any(u < 2 for u in us):
            raise ValueError("every used mode count must be >= 2")
        if any(u > m for u, m in zip(us, eq)):
            raise ValueError("used mode counts cannot exceed equipped mode counts")

        kg = len(grs)
        if kg < 1 or len(mgs) != kg:
            raise ValueError("one group mode count is required per group")
        if K % kg != 0:
            raise ValueError("user count must be divisible by the group count")
        ke = K // kg
        if any(len(g) != ke for g in grs):
            raise ValueError("all groups must have exactly users-per-group members")
        flat = [u for g in grs for u in g]
        if sorted(flat) != list(range(K)):
            raise ValueError("groups must partition the users")

        if kg == 1:
            if mgs != (1,):
                raise ValueError("a single group must have group mode count 1")
        elif any(m < 2 for m in mgs):
            raise ValueError("group mode counts must be >= 2 when there are several groups")

        # within-group canonical order: descending used modes
        for g in grs:
            if any(us[g[j]] < us[g[j + 1]] for j in range(ke - 1)):
                raise ValueError("group members must be in descending used-mode order")

        # alignment condition: element-level counts agree across groups per position
        elem = []
        for pos in range(ke):
            counts = set()
            for i, g in enumerate(grs):
                u = us[g[pos]]
                m = mgs[i]
                if u % m != 0:
                    raise ValueError(
                        "group mode count must divide every member's used mode count"
                    )
                counts.add(u // m)
            if len(counts) != 1:
                raise ValueError(
                    "element mode counts must match across groups at each position"
                )
            e = counts.pop()
            if e < 2:
                raise ValueError("element mode counts must be >= 2")
            elem.append(e)
        object.__setattr__(self, "element_counts", tuple(elem))

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------

    @classmethod
    def flat(cls, equipped, used=None) -> "GroupingConfig":
        """Single-group config: the plain flat construction over used modes."""
        eq = tuple(int(m) for m in equipped)
        us = eq if used is None else tuple(int(m) for m in used)
        order = sorted(range(len(eq)), key=lambda j: (-us[j], j))
        return cls(eq, us, (tuple(order),), (1,))

    @classmethod
    def grouped(cls, equipped, groups, group_mode_counts, used=None) -> "GroupingConfig":
        """Build a config from explicit user-index groups, normalizing order."""
        eq = tuple(int(m) for m in equipped)
        us = eq if used is None else tuple(int(m) for m in used)
        norm = tuple(
            tuple(sorted(g, key=lambda j: (-us[j], j))) for g in groups
        )
        return cls(eq, us, norm, tuple(group_mode_counts))

    # ------------------------------------------------------------------
    # derived views
    # ------------------------------------------------------------------

    @property
    def num_users(self) -> int:
        return len(self.equipped)

    @property
    def num_groups(self) -> int:
        return len(self.groups)

    @property
    def users_per_group(self) -> int:
        return self.num_users // self.num_groups

    def labels(self) -> list[tuple[int, int]]:
        """(position, group) labels, 1-based, in group-major user order."""
        return [
            (k + 1, i + 1)
            for i in range(self.num_groups)
            for k in range(self.users_per_group)
        ]

    def user_order(self) -> list[int]:
        """Original user indices in group-major order."""
        return [u for g in self.groups for u in g]

    def canonical_string(self) -> str:
        parts = [f"KG={self.num_groups}"]
        for i, g in enumerate(self.groups):
            eq = ",".join(str(self.equipped[u]) for u in g)
            parts.append(f"G{i + 1}=[{eq}]/MG{self.group_mode_counts[i]}")
        used = ",".join(str(self.used[u]) for u in self.user_order())
        parts.append(f"used={used}")
        return ";".join(parts)

    def __str__(self) -> str:
        return self.canonical_string()


# ======================================================================
# Flat construction
# ======================================================================

def base_pattern(mode_counts) -> list[tuple[int, ...]]:
    """Per-user mode sequences of the flat staggered construction.

    The schedule has two parts.  An interleaving block first enumerates, in
    mixed-radix order with the last user's digit moving fastest, every
    combination of non-final modes (user k cycling through 1..M_k - 1).
    Then one hold segment per user follows, in user order: inside segment k
    user k pins its final mode M_k while the other users re-enumerate their
    non-final modes in the same mixed-radix order.

    Args:
        mode_counts: per-user switching mode counts, each >= 2.

    Returns:
        One tuple of 1-based mode indices per user, all of equal length
        ``flat_length(mode_counts)``.
    """
    counts = tuple(int(m) for m in mode_counts)
    if not counts:
        raise ValueError("mode list must be nonempty")
    if any(m < 2 for m in counts):
        raise ValueError("every mode count must be >= 2")
    K = len(counts)
    seqs: list[list[int]] = [[] for _ in range(K)]

    for digits in itertools.product(*(range(1, m) for m in counts)):
        for k in range(K):
            seqs[k].append(digits[k])

    for k in range(K):
        others = [q for q in range(K) if q != k]
        for digits in itertools.product(*(range(1, counts[q]) for q in others)):
            for pos, q in enumerate(others):
                seqs[q].append(digits[pos])
            seqs[k].append(counts[k])

    return [tuple(s) for s in seqs]


def flat_length(mode_counts) -> int:
    """Supersymbol length of the flat construction.

    Equals prod(M_k - 1) for the interleaving block plus, for each user k,
    prod over q != k of (M_q - 1) for its hold segment.
    """
    counts = tuple(int(m) for m in mode_counts)
    if any(m < 2 for m in counts):
        raise ValueError("every mode count must be >= 2")
    block = prod(m - 1 for m in counts)
    segments = sum(block // (m - 1) for m in counts)
    return block + segments


def sequence_cartesian_product(seq_a, seq_b) -> tuple:
    """All pairs of two sequences, second-component major.

    The element at 1-based position (j - 1) * len(seq_a) + i is
    (seq_a[i], seq_b[j]): the whole of ``seq_a`` repeats once per entry of
    ``seq_b``.  This is the order in which a two-level pattern scans its
    slots, so the element-level pattern occupies contiguous runs.
    """
    a = tuple(seq_a)
    b = tuple(seq_b)
    return tuple((x, y) for y in b for x in a)


# ======================================================================
# Two-level construction
# ======================================================================

@dataclass(frozen=True)
class UserPattern:
    """One user's switching schedule inside a two-level supersymbol."""

    orig_index: int
    position: int  # 1-based within-group position
    group: int  # 1-based group index
    used: int
    element_modes: int
    group_modes: int
    element_seq: tuple[int, ...]
    group_seq: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.element_seq) * len(self.group_seq)

    @property
    def label(self) -> str:
        return f"u{self.position}.{self.group}"

    def composite(self, t: int) -> tuple[int, int]:
        """(m1, m2) mode pair at 1-based slot t."""
        l1 = len(self.element_seq)
        s2, s1 = divmod(t - 1, l1)
        return self.element_seq[s1], self.group_seq[s2]

    def physical(self, t: int) -> int:
        """1-based physical preset mode at slot t: (m2 - 1) * M_E + m1."""
        m1, m2 = self.composite(t)
        return (m2 - 1) * self.element_modes + m1

    def physical_seq(self) -> tuple[int, ...]:
        return tuple(self.physical(t) for t in range(1, self.length + 1))

    def composite_seq(self) -> tuple[tuple[int, int], ...]:
        return sequence_cartesian_product(self.element_seq, self.group_seq)

    def factored(self) -> str:
        m1 = ",".join(str(m) for m in self.element_seq)
        m2 = ",".join(str(m) for m in self.group_seq)
        return f"({m1})x({m2})"


@dataclass(frozen=True)
class PresetPattern:
    """The full supersymbol: one UserPattern per user, group-major order."""

    config: GroupingConfig
    users: tuple[UserPattern, ...]

    @property
    def element_length(self) -> int:
        return len(self.users[0].element_seq)

    @property
    def group_length(self) -> int:
        return len(self.users[0].group_seq)

    @property
    def length(self) -> int:
        return self.element_length * self.group_length

    def user(self, position: int, group: int) -> UserPattern:
        """Look up a user by 1-based (position, group) label."""
        for u in self.users:
            if u.position == position and u.group == group:
                return u
        raise KeyError(f"no user at position {position}, group {group}")


def grouped_pattern(config: GroupingConfig) -> PresetPattern:
    """Construct the two-level supersymbol pattern for a grouping config.

    Every group shares the element-level pattern family built from the
    common element mode counts; group i's members all follow group i's
    group-level sequence.  With a single group the group level is the
    constant sequence (1) and the result coincides with the flat pattern
    over the used mode counts.
    """
    m1_family = base_pattern(config.element_counts)
    if config.num_groups == 1:
        m2_family = [(1,)]
    else:
        m2_family = base_pattern(config.group_mode_counts)

    users = []
    for i, group in enumerate(config.groups):
        for k, orig in enumerate(group):
            users.append(
                UserPattern(
                    orig_index=orig,
                    position=k + 1,
                    group=i + 1,
                    used=config.used[orig],
                    element_modes=config.element_counts[k],
                    group_modes=config.group_mode_counts[i],
                    element_seq=m1_family[k],
                    group_seq=m2_family[i],
                )
            )
    return PresetPattern(config=config, users=tuple(users))


def grouped_length(config: GroupingConfig) -> int:
    """Supersymbol length of a config without constructing the pattern."""
    l1 = flat_length(config.element_counts)
    if config.num_groups == 1:
        return l1
    return l1 * flat_length(config.group_mode_counts)


# ======================================================================
# Serialization
# ======================================================================

def pattern_table(pattern: PresetPattern) -> str:
    """Plain-text table: one row per slot, one column per user.

    Entries read "m1.m2/phys".  Intended for golden-file comparisons and
    for eyeballing small supersymbols.
    """
    header = ["slot"] + [u.label for u in pattern.users]
    lines = [PATTERN_TABLE_HEADER, ",".join(header)]
    for t in range(1, pattern.length + 1):
        row = [str(t)]
        for u in pattern.users:
            m1, m2 = u.composite(t)
            row.append(f"{m1}.{m2}/{u.physical(t)}")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
