"""Backend selection for the hot synth/decode loops.

The compiled extension and the pure numpy implementation produce
bit-identical output (same RNG stream, same expression order); the
extension just runs the per-sample loops in C.  Set GAZEMARK_BACKEND=pure
to force the fallback, e.g. for benchmarking.
"""

import os

if os.environ.get("GAZEMARK_BACKEND", "").lower() == "pure":
    from . import pure as impl

    BACKEND = "pure"
else:
    try:
        from . import native as impl  # type: ignore[attr-defined]

        BACKEND = "native"
    except ImportError:
        from . import pure as impl

        BACKEND = "pure"
