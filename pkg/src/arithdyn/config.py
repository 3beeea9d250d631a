"""Runtime limits.

The degree cap bounds every polynomial produced by iteration or
pushforward; coefficient blowup under iteration is doubly exponential, so
desk-scale experiments need the cap more than memory does.  The cap can be
overridden by the ARITHDYN_DEGREE_CAP environment variable or per call.
"""

import os

DEFAULT_DEGREE_CAP = 4096


def degree_cap() -> int:
    raw = os.environ.get("ARITHDYN_DEGREE_CAP")
    if raw is None:
        return DEFAULT_DEGREE_CAP
    try:
        cap = int(raw)
    except ValueError:
        return DEFAULT_DEGREE_CAP
    return cap if cap > 0 else DEFAULT_DEGREE_CAP
