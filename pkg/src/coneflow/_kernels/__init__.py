"""Kernel backend selection.

The compiled Cython core is used when it imported cleanly and the weight
kind is one of the analytic built-ins; the pure-numpy backend covers
tabulated weights and installs without a C toolchain.  Set
CONEFLOW_PURE=1 to force the fallback (used by the benchmark and tests).
"""

import os

from . import pure

WKIND_CODES = {"power": 0, "log1p": 1, "sigmoid_exp": 2}

try:
    from . import _core as compiled
except ImportError:
    compiled = None

if os.environ.get("CONEFLOW_PURE"):
    compiled = None

HAVE_COMPILED = compiled is not None


def backend_name() -> str:
    return "compiled" if HAVE_COMPILED else "pure"
