import math
import warnings
from typing import Callable, Iterable, Optional

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from utils.errors import NumericalError

# Periods of the fastest oscillation covered by one quad call
PERIODS_PER_SEGMENT = 4.0
MAX_SEGMENTS = 4000
SINC_TAYLOR_LIMIT = 1e-4
# Below this per-segment tolerance quad starts reporting roundoff on O(1) integrands
ABS_TOLERANCE_FLOOR = 1e-14


def sinc(x):
    """
    Unnormalized sinc(x) = sin(x) / x with sinc(0) = 1

    Uses the Taylor series 1 - x^2/6 + x^4/120 for |x| < 1e-4.
    """
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < SINC_TAYLOR_LIMIT
    safe = np.where(small, 1.0, x)
    x2 = x * x
    result = np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, np.sin(safe) / safe)
    return result if result.ndim else float(result)


def cexpm1(z):
    """exp(z) - 1 for complex z without cancellation near z = 0"""
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    real = np.expm1(x) * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2
    imag = np.exp(x) * np.sin(y)
    result = real + 1j * imag
    return result if result.ndim else complex(result)


def _segment_edges(lower: float, upper: float, max_frequency: float,
                   points: Optional[Iterable[float]]) -> np.ndarray:
    periods = (upper - lower) * abs(max_frequency) / (2 * math.pi)
    n_segments = int(min(MAX_SEGMENTS, max(1, math.ceil(periods / PERIODS_PER_SEGMENT))))
    edges = np.linspace(lower, upper, n_segments + 1)
    if points is not None:
        inner = [p for p in points if lower < p < upper]
        if inner:
            edges = np.unique(np.concatenate([edges, inner]))
    return edges


def integrate(
    func: Callable[[float], float],
    upper: float,
    lower: float = 0.0,
    max_frequency: float = 0.0,
    epsabs: float = 1e-12,
    epsrel: float = 1e-10,
    points: Optional[Iterable[float]] = None,
    weight: Optional[str] = None,
    wvar: Optional[float] = None,
) -> float:
    """
    Adaptive quadrature of an oscillatory integrand over [lower, upper]

    The interval is split so each scipy.integrate.quad call sees a few
    periods of max_frequency; the segment tolerances add up to epsabs.

    Args:
        func: Real integrand
        upper: Upper limit
        lower: Lower limit
        max_frequency: Fastest angular frequency in the integrand
        epsabs: Absolute tolerance of the full integral
        epsrel: Relative tolerance per segment
        points: Extra break points (e.g. table nodes)
        weight, wvar: Optional quad weight ('cos' or 'sin') and its frequency

    Returns:
        The integral value

    Raises:
        NumericalError: when any segment fails to converge
    """
    if upper == lower:
        return 0.0
    if weight is not None:
        max_frequency = max(abs(max_frequency), abs(wvar or 0.0))
    edges = _segment_edges(lower, upper, max_frequency, points)
    segment_abs = max(epsabs / (len(edges) - 1), ABS_TOLERANCE_FLOOR)

    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            try:
                value, _ = quad(
                    func, a, b, epsabs=segment_abs, epsrel=epsrel, limit=200,
                    weight=weight, wvar=wvar,
                )
            except IntegrationWarning as exc:
                raise NumericalError(
                    f"quadrature did not converge on [{a:.6g}, {b:.6g}]: {exc}", field="quadrature"
                )
            total += value
    return total
