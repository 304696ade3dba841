"""Hot per-pulse tally kernels, in two interchangeable flavors.

Both flavors consume the *same* pre-drawn random arrays and perform the
same comparisons, so their outputs are bit-identical; which one runs is
decided at import time.  Set PHOTON_GATE_NUMBA=0 to force the
pure-numpy path (it is also the automatic fallback when numba is not
importable).

A photon at index j of pulse i goes to channel A when routes[i, j] <
0.5 and then actually fires the detector when detects[i, j] is below
that channel's efficiency.  Background click counts are drawn per pulse
and per channel upstream; any positive count is a click (the detectors
saturate at one click per pulse).
"""

from __future__ import annotations

import os

import numpy as np


def _fixed_clicks_numpy(routes, detects, bg_a, bg_b, eta1, eta2, click_a, click_b):
    to_a = routes < 0.5
    fired = np.where(to_a, detects < eta1, detects < eta2)
    np.logical_or((fired & to_a).any(axis=1), bg_a > 0, out=click_a)
    np.logical_or((fired & ~to_a).any(axis=1), bg_b > 0, out=click_b)


def _poisson_clicks_numpy(counts, routes, detects, bg_a, bg_b, eta1, eta2, click_a, click_b):
    m = counts.shape[0]
    pulse = np.repeat(np.arange(m), counts)
    to_a = routes < 0.5
    fired = np.where(to_a, detects < eta1, detects < eta2)
    np.greater(bg_a, 0, out=click_a)
    np.greater(bg_b, 0, out=click_b)
    click_a[pulse[fired & to_a]] = True
    click_b[pulse[fired & ~to_a]] = True


def _fixed_clicks_py(routes, detects, bg_a, bg_b, eta1, eta2, click_a, click_b):
    m, s = routes.shape
    for i in range(m):
        a = bg_a[i] > 0
        b = bg_b[i] > 0
        for j in range(s):
            if routes[i, j] < 0.5:
                if detects[i, j] < eta1:
                    a = True
            elif detects[i, j] < eta2:
                b = True
        click_a[i] = a
        click_b[i] = b


def _poisson_clicks_py(counts, routes, detects, bg_a, bg_b, eta1, eta2, click_a, click_b):
    m = counts.shape[0]
    k = 0
    for i in range(m):
        a = bg_a[i] > 0
        b = bg_b[i] > 0
        for _ in range(counts[i]):
            if routes[k] < 0.5:
                if detects[k] < eta1:
                    a = True
            elif detects[k] < eta2:
                b = True
            k += 1
        click_a[i] = a
        click_b[i] = b


_flag = os.environ.get("PHOTON_GATE_NUMBA", "1").strip().lower()
_want_numba = _flag not in ("0", "false", "no", "off")
_have_numba = False
if _want_numba:
    try:
        from numba import njit

        _fixed_clicks_numba = njit(cache=True, nogil=True)(_fixed_clicks_py)
        _poisson_clicks_numba = njit(cache=True, nogil=True)(_poisson_clicks_py)
        _have_numba = True
    except ImportError:  # pragma: no cover - exercised via env flag instead
        pass

if _have_numba:
    fixed_clicks = _fixed_clicks_numba
    poisson_clicks = _poisson_clicks_numba
else:
    fixed_clicks = _fixed_clicks_numpy
    poisson_clicks = _poisson_clicks_numpy


def backend() -> str:
    """Name of the kernel flavor in use: 'numba' or 'numpy'."""
    return "numba" if _have_numba else "numpy"
