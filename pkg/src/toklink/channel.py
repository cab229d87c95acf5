"""PDU packing and the seeded erasure channel.

Encoded tokens are grouped per class into fixed-size PDUs (the last one may
run short). Each PDU is lost independently with its class's block error
probability; tokens in lost PDUs fall back to the co-located reference
token at the receiver. Losing any part of the reference slice itself zeroes
the whole slice and flags the outcome, and every reconstruction anchored on
the reference then uses those zeros, mirroring what a receiver would hold.

All randomness flows through SplitMix64 seeded per trial, so outcomes are
reproducible bit-for-bit from (inputs, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import fmean, pstdev

import numpy as np

from .codec import TokenBitstream
from .linkadapt import Candidate, LinkProfile
from .rng import SplitMix64
from .tokens import SemanticTokenMask, TokenGrid


class ChannelError(ValueError):
    """Mismatched plans, candidates, or malformed channel inputs."""


@dataclass(frozen=True)
class Pdu:
    """One transmission unit: the flat grid positions of its tokens."""

    positions: np.ndarray

    def __post_init__(self):
        pos = np.ascontiguousarray(self.positions, dtype=np.int64)
        if pos.ndim != 1 or pos.size == 0:
            raise ChannelError("a PDU must hold at least one token position")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def token_count(self) -> int:
        return self.positions.size


@dataclass(frozen=True)
class PduPlan:
    token_class: str
    tokens_per_pdu: int
    header_bits: int
    bits_per_token: int
    pdus: tuple[Pdu, ...]

    @property
    def token_count(self) -> int:
        return sum(p.token_count for p in self.pdus)

    @property
    def total_bits(self) -> int:
        """Payload plus header bits over every PDU in the plan."""
        return sum(
            p.token_count * self.bits_per_token + self.header_bits
            for p in self.pdus
        )

    def resource_usage(self, efficiency: float, bandwidth_hz: float):
        """(Hz*s, s) actually consumed by this plan's PDUs."""
        resource = self.total_bits / efficiency
        return resource, resource / bandwidth_hz


def _group(positions: np.ndarray, tokens_per_pdu: int) -> tuple[Pdu, ...]:
    return tuple(
        Pdu(positions=positions[i : i + tokens_per_pdu])
        for i in range(0, positions.size, tokens_per_pdu)
    )


def pack_pdus(
    stream: TokenBitstream, mask: SemanticTokenMask, profile: LinkProfile
) -> tuple[PduPlan, PduPlan]:
    """Split the encoded tokens into per-class PDU plans.

    Class s carries the reference slice first, then intended tokens of
    later slices; class n carries the rest. Both enumerate positions in
    row-major (tau, i, j) order.
    """
    g = stream.geometry
    if mask.mask.shape != (g.t, g.h, g.w):
        raise ChannelError(
            f"dimension mismatch: mask {mask.mask.shape} vs stream "
            f"({g.t}, {g.h}, {g.w})"
        )
    slice_size = g.h * g.w
    later = mask.mask[1:].ravel().astype(bool)
    later_positions = np.arange(later.size, dtype=np.int64) + slice_size

    positions_s = np.concatenate(
        [np.arange(slice_size, dtype=np.int64), later_positions[later]]
    )
    positions_n = later_positions[~later]

    plan_s = PduPlan(
        token_class="s",
        tokens_per_pdu=profile.tokens_per_pdu_s,
        header_bits=profile.header_bits_s,
        bits_per_token=stream.config.b_full,
        pdus=_group(positions_s, profile.tokens_per_pdu_s),
    )
    plan_n = PduPlan(
        token_class="n",
        tokens_per_pdu=profile.tokens_per_pdu_n,
        header_bits=profile.header_bits_n,
        bits_per_token=stream.config.b_delta,
        pdus=_group(positions_n, profile.tokens_per_pdu_n),
    )
    return plan_s, plan_n


def pdu_loss_flags(pdu_count: int, loss_prob: float, rng: SplitMix64) -> np.ndarray:
    """One Bernoulli draw per PDU, in PDU order."""
    if not (0.0 <= loss_prob <= 1.0):
        raise ChannelError("loss probability must lie in [0, 1]")
    return np.fromiter(
        (rng.bernoulli(loss_prob) for _ in range(pdu_count)),
        dtype=bool,
        count=pdu_count,
    )


@dataclass(frozen=True)
class ChannelOutcome:
    seed: int
    loss_flags_s: np.ndarray
    loss_flags_n: np.ndarray
    reconstructed: TokenGrid
    reference_lost: bool
    erased_positions_s: np.ndarray
    erased_positions_n: np.ndarray
    bits_sent: int
    resource_used: float
    delay_s: float

    @property
    def pdus_lost_s(self) -> int:
        return int(self.loss_flags_s.sum())

    @property
    def pdus_lost_n(self) -> int:
        return int(self.loss_flags_n.sum())

    @property
    def erased_count_s(self) -> int:
        return self.erased_positions_s.size

    @property
    def erased_count_n(self) -> int:
        return self.erased_positions_n.size


def _erased_positions(plan: PduPlan, flags: np.ndarray) -> np.ndarray:
    lost = [p.positions for p, f in zip(plan.pdus, flags) if f]
    if not lost:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(lost)


def _receiver_reconstruct(
    stream: TokenBitstream,
    mask: SemanticTokenMask,
    erased: np.ndarray,
    reference_lost: bool,
) -> np.ndarray:
    """Rebuild the index grid exactly as a receiver with these losses would."""
    g = stream.geometry
    cfg = stream.config
    n = cfg.codebook_size
    q = cfg.clip_radius
    slice_size = g.h * g.w

    if reference_lost:
        reference = np.zeros(slice_size, dtype=np.int64)
    else:
        reference = np.minimum(stream.reference_values.astype(np.int64), n - 1)

    intended = mask.mask[1:].ravel().astype(bool)
    symbols = stream.payload_values.astype(np.int64)
    ref_tiled = np.tile(reference, g.t - 1)

    full = np.minimum(symbols, n - 1)
    deltas = np.minimum(symbols, 2 * q)
    differential = np.clip(ref_tiled + deltas - q, 0, n - 1)
    rest = np.where(intended, full, differential)

    later_erased = erased[erased >= slice_size] - slice_size
    rest[later_erased] = ref_tiled[later_erased]

    grid = np.concatenate([reference, rest])
    return grid.reshape(g.t, g.h, g.w)


def transmit(
    stream: TokenBitstream,
    mask: SemanticTokenMask,
    plans: tuple[PduPlan, PduPlan],
    candidates: tuple[Candidate, Candidate],
    loss_probs: tuple[float, float],
    seed: int,
) -> ChannelOutcome:
    """One channel realization.

    Draw order is fixed: class-s PDUs in plan order, then class-n PDUs.
    Totals come from the actual PDUs and the candidates' spectral
    efficiencies; lost PDUs still consume their air time.
    """
    plan_s, plan_n = plans
    cand_s, cand_n = candidates
    if plan_s.token_class != "s" or plan_n.token_class != "n":
        raise ChannelError("plans must be (class s, class n)")
    if cand_s.token_class != "s" or cand_n.token_class != "n":
        raise ChannelError("candidates must be (class s, class n)")
    if plan_s.bits_per_token != cand_s.bit_precision:
        raise ChannelError(
            f"class-s bit width mismatch: plan {plan_s.bits_per_token}, "
            f"candidate {cand_s.bit_precision}"
        )
    if plan_n.bits_per_token != cand_n.bit_precision:
        raise ChannelError(
            f"class-n bit width mismatch: plan {plan_n.bits_per_token}, "
            f"candidate {cand_n.bit_precision}"
        )

    rng = SplitMix64(seed)
    flags_s = pdu_loss_flags(len(plan_s.pdus), loss_probs[0], rng)
    flags_n = pdu_loss_flags(len(plan_n.pdus), loss_probs[1], rng)

    erased_s = _erased_positions(plan_s, flags_s)
    erased_n = _erased_positions(plan_n, flags_n)

    slice_size = stream.geometry.h * stream.geometry.w
    reference_lost = bool((erased_s < slice_size).any())
    erased_all = np.concatenate([erased_s, erased_n])

    indices = _receiver_reconstruct(stream, mask, erased_all, reference_lost)
    if reference_lost:
        indices = indices.copy()
        indices[0] = 0

    grid = TokenGrid(
        codebook_size=stream.config.codebook_size,
        geometry=stream.geometry,
        indices=indices,
    )

    res_s = plan_s.total_bits / cand_s.spectral_efficiency
    res_n = plan_n.total_bits / cand_n.spectral_efficiency
    # delay_per_token = resource_per_token / W_B, so this recovers W_B
    bandwidth_hz = cand_s.resource_per_token / cand_s.delay_per_token
    delay = (res_s + res_n) / bandwidth_hz

    return ChannelOutcome(
        seed=seed,
        loss_flags_s=_frozen_bool(flags_s),
        loss_flags_n=_frozen_bool(flags_n),
        reconstructed=grid,
        reference_lost=reference_lost,
        erased_positions_s=_frozen_i64(erased_s),
        erased_positions_n=_frozen_i64(erased_n),
        bits_sent=plan_s.total_bits + plan_n.total_bits,
        resource_used=res_s + res_n,
        delay_s=delay,
    )


def _frozen_bool(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=bool)
    out.setflags(write=False)
    return out


def _frozen_i64(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.int64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class MonteCarloSummary:
    trials: int
    base_seed: int
    token_count_s: int
    token_count_n: int
    mean_erased_s: float
    std_erased_s: float
    mean_erased_n: float
    std_erased_n: float
    mean_value_errors_s: float
    std_value_errors_s: float
    mean_value_errors_n: float
    std_value_errors_n: float
    mean_pdu_loss_fraction_s: float
    mean_pdu_loss_fraction_n: float
    mean_delay_s: float
    reference_lost_trials: int

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "base_seed": self.base_seed,
            "token_count_s": self.token_count_s,
            "token_count_n": self.token_count_n,
            "mean_erased_s": self.mean_erased_s,
            "std_erased_s": self.std_erased_s,
            "mean_erased_n": self.mean_erased_n,
            "std_erased_n": self.std_erased_n,
            "mean_value_errors_s": self.mean_value_errors_s,
            "std_value_errors_s": self.std_value_errors_s,
            "mean_value_errors_n": self.mean_value_errors_n,
            "std_value_errors_n": self.std_value_errors_n,
            "mean_pdu_loss_fraction_s": self.mean_pdu_loss_fraction_s,
            "mean_pdu_loss_fraction_n": self.mean_pdu_loss_fraction_n,
            "mean_delay_s": self.mean_delay_s,
            "reference_lost_trials": self.reference_lost_trials,
        }


def monte_carlo(
    stream: TokenBitstream,
    mask: SemanticTokenMask,
    plans: tuple[PduPlan, PduPlan],
    candidates: tuple[Candidate, Candidate],
    loss_probs: tuple[float, float],
    trials: int,
    base_seed: int,
) -> MonteCarloSummary:
    """Aggregate `transmit` over seeds base_seed .. base_seed+trials-1.

    Value errors count positions whose reconstruction differs from the
    loss-free reconstruction, split by transmission class (the reference
    slice counts toward class s).
    """
    if trials < 1:
        raise ChannelError("trials must be >= 1")
    plan_s, plan_n = plans

    lossless = transmit(
        stream, mask, plans, candidates, (0.0, 0.0), seed=base_seed
    ).reconstructed.indices

    g = stream.geometry
    slice_size = g.h * g.w
    later_intended = mask.mask[1:].ravel().astype(bool)
    class_s_sel = np.concatenate(
        [np.ones(slice_size, dtype=bool), later_intended]
    )
    flat_lossless = lossless.ravel()

    erased_s, erased_n = [], []
    val_err_s, val_err_n = [], []
    frac_s, frac_n = [], []
    delays = []
    ref_lost = 0
    for k in range(trials):
        out = transmit(
            stream, mask, plans, candidates, loss_probs, seed=base_seed + k
        )
        erased_s.append(out.erased_count_s)
        erased_n.append(out.erased_count_n)
        diff = out.reconstructed.indices.ravel() != flat_lossless
        val_err_s.append(int(diff[class_s_sel].sum()))
        val_err_n.append(int(diff[~class_s_sel].sum()))
        frac_s.append(
            out.pdus_lost_s / len(plan_s.pdus) if plan_s.pdus else 0.0
        )
        frac_n.append(
            out.pdus_lost_n / len(plan_n.pdus) if plan_n.pdus else 0.0
        )
        delays.append(out.delay_s)
        ref_lost += out.reference_lost

    return MonteCarloSummary(
        trials=trials,
        base_seed=base_seed,
        token_count_s=plan_s.token_count,
        token_count_n=plan_n.token_count,
        mean_erased_s=fmean(erased_s),
        std_erased_s=pstdev(erased_s),
        mean_erased_n=fmean(erased_n),
        std_erased_n=pstdev(erased_n),
        mean_value_errors_s=fmean(val_err_s),
        std_value_errors_s=pstdev(val_err_s),
        mean_value_errors_n=fmean(val_err_n),
        std_value_errors_n=pstdev(val_err_n),
        mean_pdu_loss_fraction_s=fmean(frac_s),
        mean_pdu_loss_fraction_n=fmean(frac_n),
        mean_delay_s=fmean(delays),
        reference_lost_trials=ref_lost,
    )
