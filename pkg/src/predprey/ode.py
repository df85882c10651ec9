"""Dormand-Prince 5(4) integrator with PI step-size control and dense output.

Small, dependency-free and deterministic: the step sequence depends only on
the inputs.  The continuous extension is the standard 4th-order
interpolant of Hairer, Norsett & Wanner (Solving ODEs I, II.6).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["IntegrationError", "DenseSolution", "dopri5"]

# Butcher tableau
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
# 5th minus 4th order weights
E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# dense output
D = np.array(
    [
        -12715105075 / 11282082432,
        0.0,
        87487479700 / 32700410799,
        -10690763975 / 1880347072,
        701980252875 / 199316789632,
        -1453857185 / 822651844,
        69997945 / 29380423,
    ]
)

ORDER = 5
SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
# PI controller exponents
BETA = 0.04
ALPHA = 1.0 / ORDER - 0.75 * BETA


class IntegrationError(RuntimeError):
    """Raised when the step size underflows or the derivative is not finite."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} at t={t!r}")
        self.t = t


@dataclass
class DenseSolution:
    """Piecewise quartic interpolant over the accepted steps."""

    t_steps: np.ndarray
    y_steps: np.ndarray
    _coeffs: np.ndarray = field(repr=False, default=None)
    n_rejected: int = 0
    n_evals: int = 0

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.searchsorted(self.t_steps, t, side="right") - 1
        idx = np.clip(idx, 0, len(self.t_steps) - 2)
        r = self._coeffs[idx]
        t0 = self.t_steps[idx]
        th = ((t - t0) / (self.t_steps[idx + 1] - t0))[:, None]
        th1 = 1.0 - th
        return r[:, 0] + th * (r[:, 1] + th1 * (r[:, 2] + th * (r[:, 3] + th1 * r[:, 4])))


def _rms(v) -> float:
    # scaled so that huge components do not overflow when squared
    m = float(np.max(np.abs(v)))
    if m == 0.0 or not math.isfinite(m):
        return m
    return m * math.sqrt(np.mean((v / m) ** 2))


def _initial_step(fun, t0, y0, f0, rtol, atol):
    # Hairer's starting-step heuristic
    sc = atol + rtol * np.abs(y0)
    d0 = _rms(y0 / sc)
    d1 = _rms(f0 / sc)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = max(h0, 1e-300)
    f1 = np.asarray(fun(t0 + h0, y0 + h0 * f0), dtype=float)
    d2 = _rms((f1 - f0) / sc) / h0
    if not math.isfinite(d2):
        return h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / ORDER)
    return min(100 * h0, h1)


def dopri5(
    fun,
    t_end: float,
    y0,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    max_step: float = math.inf,
    first_step: float | None = None,
) -> DenseSolution:
    """Integrate ``y' = fun(t, y)`` from ``t = 0`` to ``t_end``.

    Parameters
    ----------
    fun : callable
        ``fun(t, y) -> array`` of the same shape as ``y``.
    t_end : float
        Final time, > 0.
    y0 : array_like
        Initial state.
    rtol, atol : float
        Local error tolerances, mixed per component.
    max_step : float
        Upper bound on the step size.
    first_step : float, optional
        Initial step; chosen automatically when omitted.

    Returns
    -------
    DenseSolution
        Callable interpolant plus the accepted step grid.

    Raises
    ------
    IntegrationError
        On step-size underflow or a non-finite derivative.
    """
    y = np.array(y0, dtype=float)
    t = 0.0
    n_evals = 1
    f = np.asarray(fun(t, y), dtype=float)
    if not np.all(np.isfinite(f)):
        raise IntegrationError("non-finite derivative", t)
    if first_step is None:
        h = _initial_step(fun, t, y, f, rtol, atol)
        n_evals += 1
    else:
        h = first_step
    h = min(h, max_step, t_end)

    ts = [t]
    ys = [y.copy()]
    coeffs = []
    err_prev = 1e-4
    n_rejected = 0
    K = np.empty((7, y.size))

    while t < t_end:
        if t_end - t < h * (1 + 1e-12):
            h = t_end - t
        if h <= 16 * np.finfo(float).eps * max(abs(t), 1.0):
            raise IntegrationError("step size underflow", t)

        K[0] = f
        for i in range(1, 7):
            yi = y + h * (np.dot(A[i], K[:i]))
            K[i] = fun(t + C[i] * h, yi)
        n_evals += 6
        y_new = yi  # stage 7 is evaluated at the 5th-order solution (FSAL)
        f_new = K[6]
        if not np.all(np.isfinite(f_new)):
            h *= 0.25
            n_rejected += 1
            continue

        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(h * np.dot(E, K) / scale)

        if err <= 1.0:
            ydiff = y_new - y
            bspl = h * f - ydiff
            coeffs.append(
                (y.copy(), ydiff, bspl, ydiff - h * f_new - bspl, h * np.dot(D, K))
            )
            t = t + h
            if t_end - t < 1e-14 * t_end:
                t = t_end
            y, f = y_new, f_new.copy()
            ts.append(t)
            ys.append(y.copy())
            if err == 0.0:
                fac = MAX_FACTOR
            else:
                fac = SAFETY * err**-ALPHA * err_prev**BETA
                fac = min(MAX_FACTOR, max(MIN_FACTOR, fac))
            err_prev = max(err, 1e-4)
            h = min(h * fac, max_step)
        else:
            n_rejected += 1
            h *= max(MIN_FACTOR, SAFETY * err**-ALPHA)

    return DenseSolution(
        np.array(ts), np.array(ys), np.array(coeffs), n_rejected=n_rejected, n_evals=n_evals
    )
