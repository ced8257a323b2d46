"""GuitarPro 5 <-> event-token codec.

Thin re-export of the compiled core. Tokens are plain strings, one spelling
per list element; GP5 images are ``bytes``.
"""

from ._core import (
    ContractError,
    Gp5Error,
    Song,
    count_errors,
    decode,
    duration_name,
    encode,
    infer_time_signature,
    musically_equivalent,
    read_gp5,
    sanitize,
    stats_json,
    ticks_to_seconds,
    vocab,
    write_gp5,
)

__all__ = [
    "ContractError",
    "Gp5Error",
    "Song",
    "count_errors",
    "decode",
    "duration_name",
    "encode",
    "infer_time_signature",
    "musically_equivalent",
    "read_gp5",
    "sanitize",
    "stats_json",
    "ticks_to_seconds",
    "vocab",
    "write_gp5",
]
