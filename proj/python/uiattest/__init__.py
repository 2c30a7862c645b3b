"""Screen-session integrity verdicts and request signing.

Thin wrapper over the native module: replay a recorded session against the
trusted render, extract what the user typed at the focus indicators, and
sign the outgoing request only when everything lines up.
"""

from ._core import (  # noqa: F401
    IoError,
    ParseError,
    __version__,
    canonical_request,
    classify_edit,
    generate_session,
    hsv_to_rgb,
    hue_distance,
    keygen,
    normalize_text,
    recognize_text,
    rgb_to_hsv,
    sample_schedule,
    sha256_hex,
    verify_and_sign,
    verify_session,
    verify_signature,
)

__all__ = [
    "IoError",
    "ParseError",
    "__version__",
    "canonical_request",
    "classify_edit",
    "generate_session",
    "hsv_to_rgb",
    "hue_distance",
    "keygen",
    "normalize_text",
    "recognize_text",
    "rgb_to_hsv",
    "sample_schedule",
    "sha256_hex",
    "verify_and_sign",
    "verify_session",
    "verify_signature",
]
