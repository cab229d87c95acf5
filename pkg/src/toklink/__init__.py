"""Intent-weighted video token coding with class-level link adaptation
and PDU erasure simulation."""

from .channel import (
    ChannelError,
    ChannelOutcome,
    MonteCarloSummary,
    Pdu,
    PduPlan,
    monte_carlo,
    pack_pdus,
    pdu_loss_flags,
    transmit,
)
from .codec import (
    CodecConfig,
    CodecError,
    IntegrityError,
    TokenBitstream,
    bitstream_from_bytes,
    bitstream_to_bytes,
    bpp,
    decode,
    encode,
    load_bitstream,
    mask_digest,
    payload_bits,
    save_bitstream,
    side_info_overhead,
    transmitted_counts,
)
from .fileio import (
    FileFormatError,
    load_pixel_masks,
    load_token_grid,
    load_token_mask,
    save_pixel_masks,
    save_token_grid,
    save_token_mask,
)
from .linkadapt import (
    AdaptationPlan,
    BlerTable,
    Candidate,
    InfeasibleError,
    LinkAdaptError,
    LinkProfile,
    McsScheme,
    bler_lookup,
    build_candidate,
    default_bler_table,
    distortion,
    generate_candidates,
    load_bler_table,
    load_profile,
    optimize,
    per_token_costs,
    plan_to_dict,
    save_profile,
    spectral_efficiency,
    with_overrides,
)
from .rng import SplitMix64
from .tokens import (
    Geometry,
    PixelMaskSequence,
    SemanticTokenMask,
    TokenGrid,
    TokenModelError,
    intended_ratio,
    pool_pixel_masks,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptationPlan",
    "BlerTable",
    "Candidate",
    "ChannelError",
    "ChannelOutcome",
    "CodecConfig",
    "CodecError",
    "FileFormatError",
    "Geometry",
    "InfeasibleError",
    "IntegrityError",
    "LinkAdaptError",
    "LinkProfile",
    "McsScheme",
    "MonteCarloSummary",
    "Pdu",
    "PduPlan",
    "PixelMaskSequence",
    "SemanticTokenMask",
    "SplitMix64",
    "TokenBitstream",
    "TokenGrid",
    "TokenModelError",
    "bitstream_from_bytes",
    "bitstream_to_bytes",
    "bler_lookup",
    "bpp",
    "build_candidate",
    "decode",
    "default_bler_table",
    "distortion",
    "encode",
    "generate_candidates",
    "intended_ratio",
    "load_bitstream",
    "load_bler_table",
    "load_pixel_masks",
    "load_profile",
    "load_token_grid",
    "load_token_mask",
    "mask_digest",
    "monte_carlo",
    "optimize",
    "pack_pdus",
    "payload_bits",
    "pdu_loss_flags",
    "per_token_costs",
    "plan_to_dict",
    "pool_pixel_masks",
    "save_bitstream",
    "save_pixel_masks",
    "save_profile",
    "save_token_grid",
    "save_token_mask",
    "side_info_overhead",
    "spectral_efficiency",
    "transmit",
    "transmitted_counts",
    "with_overrides",
]
