"""Named parameter sets that regenerate each published sweep.

A preset is a flat dict of the same keys the CLI and config files use, so
precedence is a plain ``dict`` merge: preset, then file, then flags.
"""

from __future__ import annotations

import numpy as np

__all__ = ["PRESETS", "get_preset", "q_grid"]


def q_grid(start, stop, step=0.05):
    """Inclusive grid rounded to 10 decimals so values print cleanly."""
    n = int(round((stop - start) / step)) + 1
    return [round(float(x), 10) for x in np.linspace(start, stop, n)]


_FIG3_M = [100, 500, 1000, 5000, 10000]
_LOG_M = [100, 316, 1000, 3162, 10000]
_FIG5_ELL = [0.1, 0.2, 0.3, 0.4]

PRESETS = {
    "fig3a": {
        "description": "single-beam rate over perfect-CSI rate vs q, unit gains",
        "schemes": ["single-beam"], "M": _FIG3_M, "q": q_grid(0.05, 1.0), "gain": "unit",
    },
    "fig3b": {
        "description": "single-beam rate over perfect-CSI rate vs q, CN(0,1) gains",
        "schemes": ["single-beam"], "M": _FIG3_M, "q": q_grid(0.05, 1.0), "gain": "cn",
    },
    "fig4a": {
        "description": "single-beam rate vs M for q = 0.1..0.5, CN(0,1) gains",
        "schemes": ["single-beam"], "M": _LOG_M, "q": q_grid(0.1, 0.5, 0.1), "gain": "cn",
    },
    "fig4b": {
        "description": "single-beam rate vs M for q = 0.6..1.0, CN(0,1) gains",
        "schemes": ["single-beam"], "M": _LOG_M, "q": q_grid(0.6, 1.0, 0.1), "gain": "cn",
    },
    "fig5a": {
        "description": "multi-beam single-user rate over perfect-CSI rate vs q per ell, M = 1000, unit gains",
        "schemes": ["multibeam-su"], "M": [1000], "q": q_grid(0.05, 0.95), "ell": _FIG5_ELL,
        "gain": "unit",
    },
    "fig5b": {
        "description": "multi-beam single-user rate over perfect-CSI rate vs q per ell, M = 1000, CN(0,1) gains",
        "schemes": ["multibeam-su"], "M": [1000], "q": q_grid(0.05, 0.95), "ell": _FIG5_ELL,
        "gain": "cn",
    },
    "fig6a": {
        "description": "multi-beam single-user rate vs M per ell, q = 0.3, CN(0,1) gains",
        "schemes": ["multibeam-su"], "M": _LOG_M, "q": [0.3], "ell": [0.1, 0.2, 0.3, 0.4],
        "gain": "cn",
    },
    "fig6b": {
        "description": "multi-beam multi-user per-user rate vs M per ell, q = 0.7, total power 1, CN(0,1) gains",
        "schemes": ["multibeam-mu"], "M": _LOG_M, "q": [0.7], "ell": [0.1, 0.2, 0.3, 0.4, 0.5],
        "gain": "cn", "power": "total", "power_value": 1.0, "metric": "per_beam",
    },
}


def get_preset(name):
    try:
        preset = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}") from None
    return {k: v for k, v in preset.items() if k != "description"}
