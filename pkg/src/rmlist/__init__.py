"""Recursive list decoding of Reed-Muller codes and their relatives."""

from rmlist.code_tree import (
    CodeTree,
    Kind,
    ParameterError,
    apply_freezing,
    build_quad_tree,
    build_rm_tree,
    dimension,
    freeze_leading,
    min_distance,
    tree_from_spec,
)
from rmlist.encoder import encode, xor_count
from rmlist.channel import (
    ChannelParams,
    awgn,
    bsc_evidence,
    modulate,
    to_evidence,
    to_llr,
)
from rmlist.decoder import (
    DecodeResult,
    ListSchedule,
    combine_u,
    combine_v,
    likelihood_of,
    list_decode,
)
from rmlist.oracle import Codebook, enumerate_codebook, ml_decode_exhaustive
from rmlist.estimators import AWGNChannel, RMEncoder, RecursiveListDecoder

__version__ = "0.1.0"

__all__ = [
    "AWGNChannel",
    "ChannelParams",
    "CodeTree",
    "Codebook",
    "DecodeResult",
    "Kind",
    "ListSchedule",
    "ParameterError",
    "RMEncoder",
    "RecursiveListDecoder",
    "apply_freezing",
    "awgn",
    "bsc_evidence",
    "build_quad_tree",
    "build_rm_tree",
    "combine_u",
    "combine_v",
    "dimension",
    "encode",
    "enumerate_codebook",
    "freeze_leading",
    "likelihood_of",
    "list_decode",
    "min_distance",
    "ml_decode_exhaustive",
    "modulate",
    "to_evidence",
    "to_llr",
    "tree_from_spec",
    "xor_count",
]
