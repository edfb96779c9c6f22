"""Hot-kernel backend selection.

The compiled extension (`_core`, Cython) and the NumPy fallback
(`numpy_ref`) implement the same three kernels:

    lstm_forward(x, wx, wh, b, p_i, p_f, p_o) -> (g, i, f, o, c, h)
    lstm_backward(x, wh, p_i, p_f, p_o, traces, dh) -> parameter gradients
    ctc_alpha_beta(log_y_state, can_skip) -> (log_alpha, log_beta, log_p)

The extension is used when importable. Set MOTSOCR_BACKEND=numpy to force
the fallback, or MOTSOCR_BACKEND=cython to require the extension.
"""
from __future__ import annotations

import os

from . import numpy_ref

_requested = os.environ.get("MOTSOCR_BACKEND", "").strip().lower()

if _requested == "numpy":
    _impl = numpy_ref
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "cython":
            raise ImportError(
                "MOTSOCR_BACKEND=cython but the compiled extension is not "
                "available; reinstall with a C compiler present"
            ) from None
        _impl = numpy_ref

BACKEND = "numpy" if _impl is numpy_ref else "cython"

lstm_forward = _impl.lstm_forward
lstm_backward = _impl.lstm_backward
ctc_alpha_beta = _impl.ctc_alpha_beta

__all__ = [
    "BACKEND",
    "lstm_forward",
    "lstm_backward",
    "ctc_alpha_beta",
    "numpy_ref",
]
