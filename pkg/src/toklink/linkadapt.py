"""Class-level link adaptation: candidate generation, BLER lookup, and the
exact joint selection of bit precision and MCS per token class.

Each transmission class (s = intended tokens plus the reference slice,
n = the rest) picks one (bit precision, MCS) candidate. A candidate's
per-token resource cost follows from PDU amortization,

    c = (L*B + H) / (L*g),    g = rho_oh * m * r   [bit/s/Hz]

with delay c / W_B and distortion alpha * exp(-beta * B). The optimizer
enumerates every feasible candidate pair exactly (the sets are tiny) and
minimizes

    J = w_D * D_norm + w_T * T_norm

where the normalizations use class-wise extrema over the candidate sets.
Feasibility: total resource within eta * W_B * T_RB, and each class BLER
within its cap.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

NORMALIZATION_EPSILON = 1e-12


class LinkAdaptError(ValueError):
    """Invalid profile, table, or candidate-generation failure."""


class InfeasibleError(LinkAdaptError):
    """No candidate pair satisfies all constraints.

    binding_constraints names the constraint families that eliminated
    pairs; pair_counts maps each family to how many pairs it removed.
    """

    def __init__(self, message: str, binding_constraints: tuple[str, ...],
                 pair_counts: dict[str, int]):
        super().__init__(message)
        self.binding_constraints = binding_constraints
        self.pair_counts = pair_counts


@dataclass(frozen=True)
class McsScheme:
    """Modulation-and-coding scheme with its SNR activation threshold."""

    name: str
    modulation_order: int
    code_rate: float
    snr_activation_db: float

    def __post_init__(self):
        if self.modulation_order < 1:
            raise LinkAdaptError("modulation_order must be >= 1")
        if not (0.0 < self.code_rate <= 1.0):
            raise LinkAdaptError("code_rate must lie in (0, 1]")


DEFAULT_MCS_CATALOG = (
    McsScheme("QPSK_1/3", 2, 1.0 / 3.0, -5.0),
    McsScheme("QPSK_1/2", 2, 0.5, -5.0),
    McsScheme("16QAM_1/2", 4, 0.5, 4.0),
    McsScheme("16QAM_3/4", 4, 0.75, 4.0),
)

DEFAULT_CLASS_S_MCS = ("QPSK_1/3", "QPSK_1/2")
DEFAULT_CLASS_N_MCS = ("QPSK_1/3", "QPSK_1/2", "16QAM_1/2", "16QAM_3/4")


class BlerTable:
    """Per-MCS block error rate curves, linearly interpolated in SNR.

    Lookups outside a curve's SNR range clamp to its endpoint values.
    """

    def __init__(self, curves: dict[str, list[tuple[float, float]]]):
        if not curves:
            raise LinkAdaptError("BLER table must contain at least one MCS")
        self._curves: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        for name, points in curves.items():
            if len(points) < 1:
                raise LinkAdaptError(f"BLER curve {name!r} is empty")
            snr = np.asarray([p[0] for p in points], dtype=np.float64)
            bler = np.asarray([p[1] for p in points], dtype=np.float64)
            if np.any(np.diff(snr) <= 0):
                raise LinkAdaptError(
                    f"BLER curve {name!r}: SNR points must strictly increase"
                )
            if np.any((bler < 0) | (bler > 1)):
                raise LinkAdaptError(
                    f"BLER curve {name!r}: values must lie in [0, 1]"
                )
            snr.setflags(write=False)
            bler.setflags(write=False)
            self._curves[name] = (snr, bler)

    @property
    def mcs_names(self) -> tuple[str, ...]:
        return tuple(self._curves)

    def lookup(self, mcs_name: str, snr_db: float) -> float:
        if not math.isfinite(snr_db):
            raise LinkAdaptError("snr_db must be finite")
        try:
            snr, bler = self._curves[mcs_name]
        except KeyError:
            raise LinkAdaptError(
                f"unknown MCS name {mcs_name!r} in BLER table"
            ) from None
        return float(np.interp(snr_db, snr, bler))

    def to_dict(self) -> dict:
        return {
            name: [[float(s), float(b)] for s, b in zip(*curve)]
            for name, curve in self._curves.items()
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, BlerTable):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def load_bler_table(path) -> BlerTable:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise LinkAdaptError("BLER table file must hold an object of curves")
    return BlerTable({name: [tuple(p) for p in pts] for name, pts in raw.items()})


def default_bler_table() -> BlerTable:
    ref = resources.files("toklink").joinpath("data/default_bler.json")
    raw = json.loads(ref.read_text(encoding="utf-8"))
    return BlerTable({name: [tuple(p) for p in pts] for name, pts in raw.items()})


def bler_lookup(table: BlerTable, mcs: McsScheme | str, snr_db: float) -> float:
    name = mcs if isinstance(mcs, str) else mcs.name
    return table.lookup(name, snr_db)


@dataclass(frozen=True)
class LinkProfile:
    """Everything the optimizer needs for one (SNR, bandwidth) operating
    point. All defaults are overridable via keyword or profile file."""

    snr_db: float
    bandwidth_hz: float
    overhead_factor: float = 0.85
    resource_fraction: float = 0.7
    block_duration_s: float = 0.1
    tokens_per_pdu_s: int = 512
    header_bits_s: int = 128
    tokens_per_pdu_n: int = 512
    header_bits_n: int = 128
    p_max_s: float = 0.01
    p_max_n_base: float = 0.1
    p_max_n_steps: tuple[tuple[float, float], ...] = ((4.0, 0.05),)
    alpha_s: float = 1.0
    beta_s: float = 0.2
    alpha_n: float = 1.0
    beta_n: float = 0.2
    weight_distortion: float = 0.5
    weight_delay: float = 0.5
    full_precision_bits: int = 16
    delta_bits_choices: tuple[int, ...] = (16, 15, 14, 13, 12, 11, 10)
    mcs_catalog: tuple[McsScheme, ...] = DEFAULT_MCS_CATALOG
    class_s_mcs: tuple[str, ...] = DEFAULT_CLASS_S_MCS
    class_n_mcs: tuple[str, ...] = DEFAULT_CLASS_N_MCS
    bler_table: BlerTable = field(default_factory=default_bler_table)

    def __post_init__(self):
        if not math.isfinite(self.snr_db):
            raise LinkAdaptError("snr_db must be finite")
        if self.bandwidth_hz <= 0:
            raise LinkAdaptError("bandwidth_hz must be positive")
        if not (0.0 < self.overhead_factor <= 1.0):
            raise LinkAdaptError("overhead_factor must lie in (0, 1]")
        if not (0.0 <= self.resource_fraction <= 1.0):
            raise LinkAdaptError("resource_fraction must lie in [0, 1]")
        if self.block_duration_s <= 0:
            raise LinkAdaptError("block_duration_s must be positive")
        for name in ("tokens_per_pdu_s", "tokens_per_pdu_n"):
            if getattr(self, name) < 1:
                raise LinkAdaptError(f"{name} must be >= 1")
        for name in ("header_bits_s", "header_bits_n"):
            if getattr(self, name) < 0:
                raise LinkAdaptError(f"{name} must be >= 0")
        for name in ("p_max_s", "p_max_n_base"):
            if not (0.0 <= getattr(self, name) <= 1.0):
                raise LinkAdaptError(f"{name} must lie in [0, 1]")
        if abs(self.weight_distortion + self.weight_delay - 1.0) > 1e-9:
            raise LinkAdaptError("weight_distortion + weight_delay must be 1")
        if min(self.weight_distortion, self.weight_delay) < 0:
            raise LinkAdaptError("weights must be non-negative")
        if not self.delta_bits_choices:
            raise LinkAdaptError("delta_bits_choices must be non-empty")
        if any(b < 2 for b in self.delta_bits_choices):
            raise LinkAdaptError("delta bit precisions must be >= 2")
        if self.full_precision_bits < 2:
            raise LinkAdaptError("full_precision_bits must be >= 2")
        names = {m.name for m in self.mcs_catalog}
        for group in (self.class_s_mcs, self.class_n_mcs):
            missing = [n for n in group if n not in names]
            if missing:
                raise LinkAdaptError(f"MCS names not in catalog: {missing}")

    @property
    def resource_budget(self) -> float:
        """R_max in Hz*s: the usable time-frequency product per block."""
        return (
            self.resource_fraction * self.bandwidth_hz * self.block_duration_s
        )

    def p_max_n_at(self, snr_db: float) -> float:
        cap = self.p_max_n_base
        for threshold, value in self.p_max_n_steps:
            if snr_db >= threshold:
                cap = value
        return cap

    def scheme(self, name: str) -> McsScheme:
        for m in self.mcs_catalog:
            if m.name == name:
                return m
        raise LinkAdaptError(f"unknown MCS name {name!r}")

    def to_dict(self) -> dict:
        return {
            "snr_db": self.snr_db,
            "bandwidth_hz": self.bandwidth_hz,
            "overhead_factor": self.overhead_factor,
            "resource_fraction": self.resource_fraction,
            "block_duration_s": self.block_duration_s,
            "tokens_per_pdu_s": self.tokens_per_pdu_s,
            "header_bits_s": self.header_bits_s,
            "tokens_per_pdu_n": self.tokens_per_pdu_n,
            "header_bits_n": self.header_bits_n,
            "p_max_s": self.p_max_s,
            "p_max_n_base": self.p_max_n_base,
            "p_max_n_steps": [list(step) for step in self.p_max_n_steps],
            "alpha_s": self.alpha_s,
            "beta_s": self.beta_s,
            "alpha_n": self.alpha_n,
            "beta_n": self.beta_n,
            "weight_distortion": self.weight_distortion,
            "weight_delay": self.weight_delay,
            "full_precision_bits": self.full_precision_bits,
            "delta_bits_choices": list(self.delta_bits_choices),
            "mcs_catalog": [
                {
                    "name": m.name,
                    "modulation_order": m.modulation_order,
                    "code_rate": m.code_rate,
                    "snr_activation_db": m.snr_activation_db,
                }
                for m in self.mcs_catalog
            ],
            "class_s_mcs": list(self.class_s_mcs),
            "class_n_mcs": list(self.class_n_mcs),
            "bler_table": self.bler_table.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LinkProfile":
        known = {
            "snr_db", "bandwidth_hz", "overhead_factor", "resource_fraction",
            "block_duration_s", "tokens_per_pdu_s", "header_bits_s",
            "tokens_per_pdu_n", "header_bits_n", "p_max_s", "p_max_n_base",
            "p_max_n_steps", "alpha_s", "beta_s", "alpha_n", "beta_n",
            "weight_distortion", "weight_delay", "full_precision_bits",
            "delta_bits_choices", "mcs_catalog", "class_s_mcs", "class_n_mcs",
            "bler_table",
        }
        unknown = set(data) - known
        if unknown:
            raise LinkAdaptError(f"unknown profile fields: {sorted(unknown)}")
        kwargs = dict(data)
        if "p_max_n_steps" in kwargs:
            kwargs["p_max_n_steps"] = tuple(
                (float(t), float(v)) for t, v in kwargs["p_max_n_steps"]
            )
        if "delta_bits_choices" in kwargs:
            kwargs["delta_bits_choices"] = tuple(
                int(b) for b in kwargs["delta_bits_choices"]
            )
        if "mcs_catalog" in kwargs:
            kwargs["mcs_catalog"] = tuple(
                McsScheme(
                    name=m["name"],
                    modulation_order=int(m["modulation_order"]),
                    code_rate=float(m["code_rate"]),
                    snr_activation_db=float(m["snr_activation_db"]),
                )
                for m in kwargs["mcs_catalog"]
            )
        for key in ("class_s_mcs", "class_n_mcs"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        if "bler_table" in kwargs and isinstance(kwargs["bler_table"], dict):
            kwargs["bler_table"] = BlerTable(
                {
                    name: [tuple(p) for p in pts]
                    for name, pts in kwargs["bler_table"].items()
                }
            )
        return cls(**kwargs)


def load_profile(path) -> LinkProfile:
    with open(path, "r", encoding="utf-8") as fh:
        return LinkProfile.from_dict(json.load(fh))


def save_profile(path, profile: LinkProfile):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(profile.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def with_overrides(profile: LinkProfile, **overrides) -> LinkProfile:
    return replace(profile, **overrides)


def spectral_efficiency(mcs: McsScheme, overhead_factor: float) -> float:
    """Net data bits per second per Hz after overhead derating."""
    return overhead_factor * mcs.modulation_order * mcs.code_rate


def per_token_costs(
    bit_precision: int,
    efficiency: float,
    tokens_per_pdu: int,
    header_bits: int,
    bandwidth_hz: float,
) -> tuple[float, float]:
    """(resource Hz*s, delay s) per token, PDU header amortized over L."""
    if tokens_per_pdu < 1:
        raise LinkAdaptError("tokens_per_pdu must be >= 1")
    if efficiency <= 0:
        raise LinkAdaptError("spectral efficiency must be positive")
    pdu_bits = tokens_per_pdu * bit_precision + header_bits
    resource = pdu_bits / (tokens_per_pdu * efficiency)
    return resource, resource / bandwidth_hz


def distortion(bit_precision: float, alpha: float, beta: float) -> float:
    return alpha * math.exp(-beta * bit_precision)


@dataclass(frozen=True)
class Candidate:
    """One (class, bit precision, MCS) option with its derived figures."""

    token_class: str
    bit_precision: int
    mcs: McsScheme
    spectral_efficiency: float
    bler: float
    resource_per_token: float
    delay_per_token: float
    distortion_value: float

    @property
    def name(self) -> str:
        return f"B{self.bit_precision:02d}_{self.mcs.name}"


def _class_params(profile: LinkProfile, token_class: str):
    if token_class == "s":
        return (
            profile.tokens_per_pdu_s,
            profile.header_bits_s,
            profile.alpha_s,
            profile.beta_s,
            profile.class_s_mcs,
            (profile.full_precision_bits,),
        )
    if token_class == "n":
        return (
            profile.tokens_per_pdu_n,
            profile.header_bits_n,
            profile.alpha_n,
            profile.beta_n,
            profile.class_n_mcs,
            profile.delta_bits_choices,
        )
    raise LinkAdaptError(f"token_class must be 's' or 'n', got {token_class!r}")


def build_candidate(
    profile: LinkProfile, token_class: str, bit_precision: int, mcs: McsScheme
) -> Candidate:
    tokens_per_pdu, header_bits, alpha, beta, _, _ = _class_params(
        profile, token_class
    )
    g = spectral_efficiency(mcs, profile.overhead_factor)
    resource, delay = per_token_costs(
        bit_precision, g, tokens_per_pdu, header_bits, profile.bandwidth_hz
    )
    return Candidate(
        token_class=token_class,
        bit_precision=bit_precision,
        mcs=mcs,
        spectral_efficiency=g,
        bler=profile.bler_table.lookup(mcs.name, profile.snr_db),
        resource_per_token=resource,
        delay_per_token=delay,
        distortion_value=distortion(bit_precision, alpha, beta),
    )


def generate_candidates(profile: LinkProfile, token_class: str) -> list[Candidate]:
    """All (bit precision, MCS) options whose MCS is active at this SNR.

    Class s uses the full precision only; class n crosses the reduced
    precision choices with its MCS list. Raises when SNR activation
    leaves the set empty.
    """
    _, _, _, _, mcs_names, bit_choices = _class_params(profile, token_class)
    out = []
    for bits in bit_choices:
        for name in mcs_names:
            mcs = profile.scheme(name)
            if profile.snr_db < mcs.snr_activation_db:
                continue
            out.append(build_candidate(profile, token_class, bits, mcs))
    if not out:
        raise LinkAdaptError(
            f"no feasible MCS at this SNR ({profile.snr_db} dB) for class "
            f"{token_class}"
        )
    return out


@dataclass(frozen=True)
class AdaptationPlan:
    """Selected candidate pair plus the objective bookkeeping behind it."""

    candidate_s: Candidate
    candidate_n: Candidate
    count_s: int
    count_n: int
    distortion_total: float
    delay_total: float
    resource_used: float
    resource_budget: float
    distortion_bounds: tuple[float, float]
    delay_bounds: tuple[float, float]
    distortion_norm: float
    delay_norm: float
    objective: float

    @property
    def utilization(self) -> float:
        if self.resource_budget == 0:
            return math.inf if self.resource_used > 0 else 0.0
        return self.resource_used / self.resource_budget


def _pair_totals(cand_s, cand_n, count_s, count_n):
    d_tot = count_s * cand_s.distortion_value + count_n * cand_n.distortion_value
    t_tot = count_s * cand_s.delay_per_token + count_n * cand_n.delay_per_token
    r_tot = (
        count_s * cand_s.resource_per_token
        + count_n * cand_n.resource_per_token
    )
    return d_tot, t_tot, r_tot


def optimize(profile: LinkProfile, count_s: int, count_n: int) -> AdaptationPlan:
    """Exact minimizer of the weighted distortion-delay objective.

    Enumerates every candidate pair; ties broken by lower total
    distortion, then lower total delay, then candidate names. Raises
    InfeasibleError when no pair satisfies the resource budget and both
    BLER caps; its fields say which constraints were binding.
    """
    if count_s < 0 or count_n < 0:
        raise LinkAdaptError("token counts must be non-negative")
    if count_s == 0 and count_n == 0:
        raise LinkAdaptError("token counts must not both be zero")

    cands_s = generate_candidates(profile, "s")
    cands_n = generate_candidates(profile, "n")

    d_min = count_s * min(c.distortion_value for c in cands_s) + count_n * min(
        c.distortion_value for c in cands_n
    )
    d_max = count_s * max(c.distortion_value for c in cands_s) + count_n * max(
        c.distortion_value for c in cands_n
    )
    t_min = count_s * min(c.delay_per_token for c in cands_s) + count_n * min(
        c.delay_per_token for c in cands_n
    )
    t_max = count_s * max(c.delay_per_token for c in cands_s) + count_n * max(
        c.delay_per_token for c in cands_n
    )

    cap_s = profile.p_max_s
    cap_n = profile.p_max_n_at(profile.snr_db)
    budget = profile.resource_budget

    rejected = {"bler_s": 0, "bler_n": 0, "resource": 0}
    sole_violations = set()
    best = None
    best_key = None
    for cs in cands_s:
        for cn in cands_n:
            bad = []
            if cs.bler > cap_s:
                bad.append("bler_s")
            if cn.bler > cap_n:
                bad.append("bler_n")
            d_tot, t_tot, r_tot = _pair_totals(cs, cn, count_s, count_n)
            if r_tot > budget:
                bad.append("resource")
            if bad:
                for b in bad:
                    rejected[b] += 1
                if len(bad) == 1:
                    sole_violations.add(bad[0])
                continue
            d_norm = (d_tot - d_min) / (d_max - d_min + NORMALIZATION_EPSILON)
            t_norm = (t_tot - t_min) / (t_max - t_min + NORMALIZATION_EPSILON)
            j = (
                profile.weight_distortion * d_norm
                + profile.weight_delay * t_norm
            )
            key = (j, d_tot, t_tot, (cs.name, cn.name))
            if best_key is None or key < best_key:
                best_key = key
                best = AdaptationPlan(
                    candidate_s=cs,
                    candidate_n=cn,
                    count_s=count_s,
                    count_n=count_n,
                    distortion_total=d_tot,
                    delay_total=t_tot,
                    resource_used=r_tot,
                    resource_budget=budget,
                    distortion_bounds=(d_min, d_max),
                    delay_bounds=(t_min, t_max),
                    distortion_norm=d_norm,
                    delay_norm=t_norm,
                    objective=j,
                )
    if best is None:
        # a family is binding when relaxing it alone would admit a pair;
        # if every pair violates two or more, report all violated families
        binding = tuple(
            k for k in rejected if k in sole_violations
        ) or tuple(k for k, v in rejected.items() if v > 0)
        raise InfeasibleError(
            "infeasible: binding constraint(s): " + ", ".join(binding),
            binding_constraints=binding,
            pair_counts=dict(rejected),
        )
    return best


def plan_to_dict(plan: AdaptationPlan) -> dict:
    def cand(c: Candidate) -> dict:
        return {
            "name": c.name,
            "token_class": c.token_class,
            "bit_precision": c.bit_precision,
            "mcs": c.mcs.name,
            "modulation_order": c.mcs.modulation_order,
            "code_rate": c.mcs.code_rate,
            "spectral_efficiency": c.spectral_efficiency,
            "bler": c.bler,
            "resource_per_token": c.resource_per_token,
            "delay_per_token": c.delay_per_token,
            "distortion_per_token": c.distortion_value,
        }

    return {
        "class_s": cand(plan.candidate_s),
        "class_n": cand(plan.candidate_n),
        "count_s": plan.count_s,
        "count_n": plan.count_n,
        "distortion_total": plan.distortion_total,
        "delay_total_s": plan.delay_total,
        "resource_used": plan.resource_used,
        "resource_budget": plan.resource_budget,
        "utilization": plan.utilization,
        "distortion_bounds": list(plan.distortion_bounds),
        "delay_bounds_s": list(plan.delay_bounds),
        "distortion_norm": plan.distortion_norm,
        "delay_norm": plan.delay_norm,
        "objective": plan.objective,
    }
