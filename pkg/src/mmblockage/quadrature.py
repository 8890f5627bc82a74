"""Adaptive Simpson quadrature for the smooth radial integrals of the model."""

from __future__ import annotations

import math
from typing import Callable


class QuadratureError(ArithmeticError):
    """The integral did not converge to the requested tolerance."""


MAX_INTERVALS = 2 ** 20


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     rtol: float = 1e-10, max_intervals: int = MAX_INTERVALS) -> float:
    """Integrate ``f`` over ``[a, b]`` to relative tolerance ``rtol``.

    Intervals are bisected until the Simpson/two-panel-Simpson discrepancy
    is below 15 times the local share of the tolerance; the accepted panels
    get the usual Richardson correction. Raises :class:`QuadratureError` if
    more than ``max_intervals`` panels would be needed.
    """
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, rtol, max_intervals)

    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0
    # A coarse composite-Simpson pass sets the absolute scale; guards against a
    # lucky near-zero first Simpson value.
    xs = [a + (b - a) * k / 32 for k in range(33)]
    ys = [f(x) for x in xs]
    coarse = (b - a) / 96 * (ys[0] + ys[-1] + 4 * sum(ys[1:-1:2]) + 2 * sum(ys[2:-1:2]))
    scale = max(abs(coarse), abs(whole))
    abs_tol = rtol * scale if scale > 0 else rtol
    width = b - a

    total = 0.0
    n_intervals = 1
    stack = [(a, b, fa, fm, fb, whole)]
    while stack:
        lo, hi, flo, fmid, fhi, s = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        h = hi - lo
        left = h * (flo + 4.0 * flm + fmid) / 12.0
        right = h * (fmid + 4.0 * frm + fhi) / 12.0
        err = left + right - s
        if abs(err) <= 15.0 * abs_tol * (h / width) or h <= width * 1e-15:
            total += left + right + err / 15.0
            continue
        n_intervals += 1
        if n_intervals > max_intervals:
            raise QuadratureError(
                f"adaptive Simpson exceeded {max_intervals} intervals on [{a}, {b}]")
        stack.append((mid, hi, fmid, frm, fhi, right))
        stack.append((lo, mid, flo, flm, fmid, left))
    if not math.isfinite(total):
        raise QuadratureError(f"non-finite integral on [{a}, {b}]")
    return total
