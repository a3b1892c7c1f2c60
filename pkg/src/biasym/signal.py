"""Simulated block-fading channels and alignment verification.

The transmitters know nothing about the channel; each symbol vector is
simply repeated over the slots its stream occupies, one slot per own
preset mode.  All alignment therefore has to come from the switching
pattern itself, and this module measures whether it does: it assembles
the effective (channel times repetition) matrices seen at each receiver,
compares their numerical ranks against the exact predictions, and runs a
zero-forcing decode round trip.

Channels are drawn i.i.d. CN(0, 1) per fading block; a block spans
``coherence_length`` consecutive slots, so alignment only survives when
a whole supersymbol fits inside one block.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .dof import rank_predictions
from .patterns import GroupingConfig, PresetPattern, grouped_length

__all__ = [
    "Stream",
    "UserStreams",
    "StreamPlacement",
    "ChannelSet",
    "ReceivedBlock",
    "InterfererRank",
    "ReceiverReport",
    "AlignmentReport",
    "UserDecode",
    "DecodeResult",
    "build_streams",
    "draw_channels",
    "effective_matrix",
    "assemble_received",
    "alignment_report",
    "decode",
    "matrix_rank",
    "random_symbols",
    "report_to_csv",
]

ALIGNMENT_CSV_HEADER = "# biasym alignment report v1"

RANK_RTOL = 1e-10  # singular values below max_dim * smax * RANK_RTOL count as zero


def matrix_rank(matrix: np.ndarray) -> int:
    """Numerical rank from singular values.

    The cutoff is max(matrix.shape) * largest_singular_value * 1e-10, which
    cleanly separates the populated and aligned subspaces for the channel
    scales used here.
    """
    if matrix.size == 0:
        return 0
    s = np.linalg.svd(matrix, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > max(matrix.shape) * s[0] * RANK_RTOL))


# ======================================================================
# Stream placement
# ======================================================================

@dataclass(frozen=True)
class Stream:
    """One symbol vector: its dimension and the 1-based slots it repeats in."""

    dim: int
    slots: tuple[int, ...]


@dataclass(frozen=True)
class UserStreams:
    label: tuple[int, int]
    orig_index: int
    dim: int
    streams: tuple[Stream, ...]


@dataclass(frozen=True)
class StreamPlacement:
    """All users' streams against one supersymbol, group-major user order."""

    users: tuple[UserStreams, ...]

    def total_streams(self) -> int:
        return sum(len(u.streams) for u in self.users)


def _flat_stream_slots(mode_counts, user: int) -> dict[tuple, list[int]]:
    """Slot occupancy of one user's streams in the flat construction.

    Streams are indexed by the frozen digits of the other users: a stream
    repeats wherever those digits recur, which is M_user - 1 slots of the
    interleaving block plus one slot of the user's own hold segment.  Keys
    are the other users' digit tuples, in ascending user order.
    """
    counts = tuple(int(m) for m in mode_counts)
    K = len(counts)
    slots: dict[tuple, list[int]] = {}
    t = 0
    for digits in itertools.product(*(range(1, m) for m in counts)):
        t += 1
        key = digits[:user] + digits[user + 1:]
        slots.setdefault(key, []).append(t)
    for j in range(K):
        others = [q for q in range(K) if q != j]
        for digits in itertools.product(*(range(1, counts[q]) for q in others)):
            t += 1
            if j == user:
                slots.setdefault(digits, []).append(t)
    return slots


def build_streams(pattern: PresetPattern, config: GroupingConfig | None = None) -> StreamPlacement:
    """Place every user's streams on the supersymbol.

    Two-level streams are products of an element-level stream (digits of
    the other in-group positions) and a group-level replication (digits of
    the other groups); a stream occupies the element slots inside each of
    its group-level slots.  Each stream carries one M'-dimensional symbol
    vector and sees every own physical mode exactly once.
    """
    if config is None:
        config = pattern.config
    l1 = pattern.element_length
    users = []
    for u in pattern.users:
        m1_slots = _flat_stream_slots(config.element_counts, u.position - 1)
        if config.num_groups == 1:
            m2_slots: dict[tuple, list[int]] = {(): [1]}
        else:
            m2_slots = _flat_stream_slots(config.group_mode_counts, u.group - 1)
        streams = []
        for b_key in sorted(m2_slots):
            for a_key in sorted(m1_slots):
                occupied = sorted(
                    (s2 - 1) * l1 + s1
                    for s2 in m2_slots[b_key]
                    for s1 in m1_slots[a_key]
                )
                streams.append(Stream(dim=u.used, slots=tuple(occupied)))
        users.append(
            UserStreams(
                label=(u.position, u.group),
                orig_index=u.orig_index,
                dim=u.used,
                streams=tuple(streams),
            )
        )
    return StreamPlacement(users=tuple(users))


# ======================================================================
# Channels
# ======================================================================

@dataclass(frozen=True)
class ChannelSet:
    """Block-fading channel draws for every (receiver, transmitter) pair.

    ``gains[(rx, tx)]`` has shape (n_blocks, rx used modes, tx used modes):
    one row vector per receive preset mode, one column per transmit antenna
    dimension, redrawn independently every ``coherence_length`` slots.
    Indices are group-major user positions, matching PresetPattern.users.
    """

    seed: int
    coherence_length: int
    n_blocks: int
    gains: dict[tuple[int, int], np.ndarray] = field(repr=False)

    def block_of(self, t: int) -> int:
        return (t - 1) // self.coherence_length

    def row(self, rx: int, tx: int, t: int, mode: int) -> np.ndarray:
        """Channel row seen by rx (in preset mode ``mode``) from tx at slot t."""
        return self.gains[(rx, tx)][self.block_of(t), mode - 1, :]

    def save_npz(self, path) -> None:
        arrays = {
            f"g_{rx}_{tx}": g for (rx, tx), g in sorted(self.gains.items())
        }
        np.savez(
            path,
            seed=np.int64(self.seed),
            coherence_length=np.int64(self.coherence_length),
            n_blocks=np.int64(self.n_blocks),
            **arrays,
        )

    @classmethod
    def load_npz(cls, path) -> "ChannelSet":
        data = np.load(path)
        gains = {}
        for key in data.files:
            if key.startswith("g_"):
                _, rx, tx = key.split("_")
                gains[(int(rx), int(tx))] = data[key]
        return cls(
            seed=int(data["seed"]),
            coherence_length=int(data["coherence_length"]),
            n_blocks=int(data["n_blocks"]),
            gains=gains,
        )


def draw_channels(
    config: GroupingConfig,
    coherence_length: int | None = None,
    seed: int = 0,
) -> ChannelSet:
    """Draw i.i.d. CN(0, 1) block-fading channels covering one supersymbol.

    Args:
        config: validated grouping config; transmit antenna dimensions equal
            the used mode count of the paired receiver.
        coherence_length: slots per fading block; None means one block spans
            the whole supersymbol (the ideal staggered-fading case).
        seed: numpy default_rng seed; draws are made pair by pair in
            row-major (rx, tx) order, so a seed pins the whole set.
    """
    length = grouped_length(config)
    if coherence_length is None:
        coherence_length = length
    if coherence_length < 1:
        raise ValueError("coherence length must be >= 1")
    n_blocks = -(-length // coherence_length)
    rng = np.random.default_rng(seed)
    order = config.user_order()
    K = len(order)
    dims = [config.used[orig] for orig in order]
    gains = {}
    for rx in range(K):
        for tx in range(K):
            shape = (n_blocks, dims[rx], dims[tx])
            gains[(rx, tx)] = (
                rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
            ) / np.sqrt(2.0)
    return ChannelSet(
        seed=int(seed),
        coherence_length=int(coherence_length),
        n_blocks=int(n_blocks),
        gains=gains,
    )


# ======================================================================
# Effective matrices and received signal
# ======================================================================

def effective_matrix(
    placement: StreamPlacement,
    pattern: PresetPattern,
    channels: ChannelSet,
    rx: int,
    tx: int,
) -> np.ndarray:
    """Stacked channel rows mapping tx's symbol vectors to rx's samples.

    Shape (supersymbol length, tx streams * tx dim).  Row t holds, in the
    columns of stream s, the channel row rx sees from tx at slot t if the
    stream occupies that slot, and zeros otherwise.  Ranks of these blocks
    are what alignment predictions speak about.
    """
    L = pattern.length
    tx_streams = placement.users[tx].streams
    dim = placement.users[tx].dim
    rx_modes = pattern.users[rx].physical_seq()
    out = np.zeros((L, len(tx_streams) * dim), dtype=complex)
    for s, stream in enumerate(tx_streams):
        cols = slice(s * dim, (s + 1) * dim)
        for t in stream.slots:
            out[t - 1, cols] = channels.row(rx, tx, t, rx_modes[t - 1])
    return out


@dataclass(frozen=True)
class ReceivedBlock:
    """One receiver's samples over a supersymbol (noise kept separately)."""

    label: tuple[int, int]
    samples: np.ndarray
    noise: np.ndarray | None = None


def random_symbols(placement: StreamPlacement, seed: int = 0) -> list[list[np.ndarray]]:
    """Unit-norm complex symbol vectors, one per stream, in placement order."""
    rng = np.random.default_rng(seed)
    out = []
    for u in placement.users:
        vecs = []
        for stream in u.streams:
            v = rng.standard_normal(stream.dim) + 1j * rng.standard_normal(stream.dim)
            vecs.append(v / np.linalg.norm(v))
        out.append(vecs)
    return out


def assemble_received(
    placement: StreamPlacement,
    pattern: PresetPattern,
    channels: ChannelSet,
    symbols: list[list[np.ndarray]],
    noise_scale: float = 0.0,
    noise_seed: int | None = None,
) -> list[ReceivedBlock]:
    """Superpose every transmitter's contribution at every receiver.

    ``symbols[tx][s]`` is stream s's symbol vector.  Noise, when requested,
    is CN(0, 1) scaled by ``noise_scale`` (use 1/sqrt(SNR)).
    """
    K = len(placement.users)
    L = pattern.length
    for u, user_syms in zip(placement.users, symbols):
        if len(user_syms) != len(u.streams):
            raise ValueError("one symbol vector per stream is required")
        for vec, stream in zip(user_syms, u.streams):
            if np.shape(vec) != (stream.dim,):
                raise ValueError("symbol vector dimension must match the stream")
    rng = np.random.default_rng(noise_seed) if noise_scale > 0.0 else None
    out = []
    for rx in range(K):
        y = np.zeros(L, dtype=complex)
        for tx in range(K):
            stacked = np.concatenate(symbols[tx])
            y += effective_matrix(placement, pattern, channels, rx, tx) @ stacked
        noise = None
        if rng is not None:
            noise = noise_scale * (
                rng.standard_normal(L) + 1j * rng.standard_normal(L)
            ) / np.sqrt(2.0)
            y = y + noise
        out.append(
            ReceivedBlock(label=placement.users[rx].label, samples=y, noise=noise)
        )
    return out


# ======================================================================
# Alignment reports
# ======================================================================

@dataclass(frozen=True)
class InterfererRank:
    label: tuple[int, int]
    kind: str  # "IUI" or "IGI"
    measured: int
    predicted: int


@dataclass(frozen=True)
class ReceiverReport:
    label: tuple[int, int]
    desired_measured: int
    desired_predicted: int
    interferers: tuple[InterfererRank, ...]
    combined_measured: int
    combined_predicted: int
    joint_measured: int
    joint_predicted: int

    @property
    def iui_measured(self) -> int:
        return sum(r.measured for r in self.interferers if r.kind == "IUI")

    @property
    def igi_measured(self) -> int:
        return sum(r.measured for r in self.interferers if r.kind == "IGI")

    @property
    def match(self) -> bool:
        return (
            self.desired_measured == self.desired_predicted
            and all(r.measured == r.predicted for r in self.interferers)
            and self.combined_measured == self.combined_predicted
            and self.joint_measured == self.joint_predicted
        )


@dataclass(frozen=True)
class AlignmentReport:
    receivers: tuple[ReceiverReport, ...]

    @property
    def all_match(self) -> bool:
        return all(r.match for r in self.receivers)


def alignment_report(
    placement: StreamPlacement,
    pattern: PresetPattern,
    channels: ChannelSet,
) -> AlignmentReport:
    """Measure effective-matrix ranks at every receiver against predictions.

    Per receiver: rank of the desired block, rank of each interferer's
    block, rank of all interference blocks stacked, and the joint rank of
    [desired | interference].  Predictions assume one fading block per
    supersymbol; shorter coherence shows up as measured > predicted.
    """
    preds = rank_predictions(pattern.config)
    K = len(placement.users)
    reports = []
    for rx in range(K):
        pred = preds[rx]
        desired = effective_matrix(placement, pattern, channels, rx, rx)
        interferers = []
        blocks = []
        for tx in range(K):
            if tx == rx:
                continue
            block = effective_matrix(placement, pattern, channels, rx, tx)
            blocks.append(block)
            lab = placement.users[tx].label
            interferers.append(
                InterfererRank(
                    label=lab,
                    kind=pred.kinds[lab],
                    measured=matrix_rank(block),
                    predicted=pred.per_interferer[lab],
                )
            )
        combined = (
            np.hstack(blocks) if blocks else np.zeros((pattern.length, 0), complex)
        )
        joint = np.hstack([desired, combined])
        reports.append(
            ReceiverReport(
                label=placement.users[rx].label,
                desired_measured=matrix_rank(desired),
                desired_predicted=pred.desired,
                interferers=tuple(interferers),
                combined_measured=matrix_rank(combined),
                combined_predicted=pred.iui_total + pred.igi_total,
                joint_measured=matrix_rank(joint),
                joint_predicted=pred.length,
            )
        )
    return AlignmentReport(receivers=tuple(reports))


def report_to_csv(report: AlignmentReport) -> str:
    """Flat CSV: receiver, measured/predicted rank quadruple, match flag."""
    lines = [
        ALIGNMENT_CSV_HEADER,
        "receiver,desired_meas,desired_pred,iui_meas,iui_pred,"
        "igi_meas,igi_pred,joint_meas,joint_pred,match",
    ]
    for r in report.receivers:
        iui_pred = sum(x.predicted for x in r.interferers if x.kind == "IUI")
        igi_pred = sum(x.predicted for x in r.interferers if x.kind == "IGI")
        lines.append(
            f"u{r.label[0]}.{r.label[1]},{r.desired_measured},{r.desired_predicted},"
            f"{r.iui_measured},{iui_pred},{r.igi_measured},{igi_pred},"
            f"{r.joint_measured},{r.joint_predicted},{str(r.match).lower()}"
        )
    return "\n".join(lines) + "\n"


# ======================================================================
# Decoding
# ======================================================================

@dataclass(frozen=True)
class UserDecode:
    """Zero-forcing decode outcome for one receiver.

    ``estimates[s]`` estimates stream s's symbol vector.  ``deficiency`` is
    how many desired dimensions fell inside the interference span; any
    deficiency marks the whole receiver unrecoverable since no stream's
    estimate can then be trusted.
    """

    label: tuple[int, int]
    estimates: list[np.ndarray]
    recoverable: bool
    deficiency: int


@dataclass(frozen=True)
class DecodeResult:
    users: tuple[UserDecode, ...]

    @property
    def all_recoverable(self) -> bool:
        return all(u.recoverable for u in self.users)


def decode(
    placement: StreamPlacement,
    pattern: PresetPattern,
    channels: ChannelSet,
    received: list[ReceivedBlock],
) -> DecodeResult:
    """Null interference at each receiver, then least-squares the rest.

    Projects the received supersymbol onto the orthogonal complement of the
    stacked interference columns and solves for the desired symbol vectors.
    Exact up to numerical precision whenever the joint rank condition holds
    and the samples are noiseless.
    """
    K = len(placement.users)
    out = []
    for rx in range(K):
        original = effective_matrix(placement, pattern, channels, rx, rx)
        blocks = [
            effective_matrix(placement, pattern, channels, rx, tx)
            for tx in range(K)
            if tx != rx
        ]
        desired = original
        y = received[rx].samples
        if blocks:
            interference = np.hstack(blocks)
            u_mat, s, _ = np.linalg.svd(interference, full_matrices=False)
            if s.size and s[0] > 0.0:
                keep = s > max(interference.shape) * s[0] * RANK_RTOL
                basis = u_mat[:, keep]
                desired = original - basis @ (basis.conj().T @ original)
                y = y - basis @ (basis.conj().T @ y)
        solution = np.linalg.lstsq(desired, y, rcond=None)[0]
        dim = placement.users[rx].dim
        estimates = [
            solution[s * dim:(s + 1) * dim]
            for s in range(len(placement.users[rx].streams))
        ]
        # desired columns swallowed by the nulling only look tiny relative
        # to the unprojected channel scale, so rank against that scale
        ref = np.linalg.svd(original, compute_uv=False)
        ref_max = float(ref[0]) if ref.size else 0.0
        if ref_max == 0.0:
            surviving = 0
        else:
            s_proj = np.linalg.svd(desired, compute_uv=False)
            cutoff = max(desired.shape) * ref_max * RANK_RTOL
            surviving = int(np.sum(s_proj > cutoff))
        deficiency = desired.shape[1] - surviving
        out.append(
            UserDecode(
                label=placement.users[rx].label,
                estimates=estimates,
                recoverable=deficiency == 0,
                deficiency=deficiency,
            )
        )
    return DecodeResult(users=tuple(out))
