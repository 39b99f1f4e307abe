"""Composite Simpson quadrature with panel doubling.

The integrands in this package (exponentially damped polynomials) are smooth,
so plain Simpson refinement converges fast and adaptive machinery is not
needed. The rule doubles the panel count until two successive estimates agree
to a relative tolerance, with a hard cap on function evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class QuadratureError(RuntimeError):
    """Raised when refinement does not converge within the evaluation budget."""


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerance and budget for :func:`integrate`."""

    rtol: float = 1e-8
    max_evals: int = 2_000_000

    def __post_init__(self):
        if not (self.rtol > 0.0):
            raise ValueError(f"rtol must be > 0, got {self.rtol}")
        if self.max_evals < 9:
            raise ValueError("max_evals too small for even one refinement")


def _simpson(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, panels: int) -> float:
    x = np.linspace(a, b, 2 * panels + 1)
    y = np.asarray(f(x), dtype=np.float64)
    h = (b - a) / (2 * panels)
    return float(h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-2:2].sum()))


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    config: QuadratureConfig = QuadratureConfig(),
) -> float:
    """Integrate a vectorized function over [a, b].

    Parameters
    ----------
    f : callable
        Maps a float64 sample array to integrand values of the same shape.
    a, b : float
        Integration bounds, a <= b.
    config : QuadratureConfig
        Relative tolerance between successive estimates and evaluation cap.

    Raises
    ------
    QuadratureError
        If the doubling sequence exhausts ``config.max_evals`` before two
        successive estimates agree to ``config.rtol``.
    """
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ValueError(f"bounds must be finite, got ({a}, {b})")
    if b < a:
        raise ValueError(f"upper bound {b} below lower bound {a}")
    if a == b:
        return 0.0

    panels = 4
    estimate = _simpson(f, a, b, panels)
    evals = 2 * panels + 1
    while True:
        panels *= 2
        evals += 2 * panels + 1
        if evals > config.max_evals:
            raise QuadratureError(
                f"no convergence to rtol={config.rtol} within {config.max_evals} evaluations"
            )
        refined = _simpson(f, a, b, panels)
        scale = max(abs(refined), np.finfo(np.float64).tiny)
        if abs(refined - estimate) <= config.rtol * scale:
            return refined
        estimate = refined
