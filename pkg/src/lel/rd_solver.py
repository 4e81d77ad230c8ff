"""Rate-distortion curve via alternating minimization.

Points on R(D) are parameterized by the Lagrangian slope s >= 0: each solve
minimizes I(X;Y) + s * E[d(X,Y)] over test channels P(Y|X), with I in bits
(so the conditional update weights outputs by 2**(-s * d)). Updates run in
the log domain to stay stable at large slopes.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .finite_prob import Channel, entropy

LN2 = math.log(2.0)

DEFAULT_RATE_TOL = 1e-9
DEFAULT_MAX_ITERS = 10000
# Slack for the objective monotonicity check; alternating minimization can
# only violate it through floating-point noise.
OBJECTIVE_SLACK = 1e-9


@dataclass(frozen=True)
class DistortionMeasure:
    """Per-letter distortion table d(x, y) with nonnegative finite entries."""

    table: np.ndarray

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        if table.ndim != 2 or table.size == 0:
            raise ValueError("distortion table must be a nonempty 2-D array")
        if np.any(table < 0) or not np.all(np.isfinite(table)):
            raise ValueError("distortion entries must be finite and nonnegative")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    def __eq__(self, other):
        return isinstance(other, DistortionMeasure) and np.array_equal(
            self.table, other.table
        )

    @property
    def d_max(self):
        return float(self.table.max())

    @classmethod
    def hamming(cls, size):
        return cls(1.0 - np.eye(size))


@dataclass(frozen=True)
class RdPoint:
    """One solved point on the rate-distortion curve."""

    slope: float
    distortion: float
    rate: float
    channel: Channel  # P(Y|X) achieving the point
    iterations: int
    converged: bool
    objective_history: tuple = field(default=(), repr=False)


def expected_distortion(source, channel, d):
    """E[d(X, Y)] under source and forward channel."""
    return float((source.probs[:, None] * channel.rows * d.table).sum())


def _rate_bits(p, ln_cond, ln_out):
    cond = np.exp(ln_cond)
    with np.errstate(invalid="ignore"):
        terms = cond * (ln_cond - ln_out[None, :])
    terms[cond == 0] = 0.0
    terms[p == 0, :] = 0.0  # unreachable rows may hold inf against a dead output
    return float((p[:, None] * terms).sum() / LN2)


def blahut_arimoto(source, d, slope, tol=DEFAULT_RATE_TOL, max_iters=DEFAULT_MAX_ITERS):
    """Solve for the R(D) point at Lagrangian slope `slope`.

    Alternates the marginal and conditional updates until successive rate
    iterates differ by less than `tol`. On non-convergence the best iterate
    is returned with converged=False.
    """
    if slope < 0:
        raise ValueError("slope must be >= 0")
    nx, ny = d.table.shape
    if nx != source.alphabet_size:
        raise ValueError(
            f"distortion table has {nx} source rows, source alphabet is "
            f"{source.alphabet_size}"
        )

    if slope == 0.0:
        # Rate is unconstrained-minimal; pick the single output symbol with
        # the least expected distortion (lowest index on ties).
        per_output = source.probs @ d.table
        y_star = int(np.argmin(per_output))
        rows = np.zeros((nx, ny))
        rows[:, y_star] = 1.0
        return RdPoint(
            slope=0.0,
            distortion=float(per_output[y_star]),
            rate=0.0,
            channel=Channel(rows),
            iterations=0,
            converged=True,
            objective_history=(0.0,),
        )

    p = source.probs
    with np.errstate(divide="ignore"):
        ln_p = np.log(p)
    penalty = slope * LN2 * d.table
    # Shift each row by its own minimum so huge slopes stay representable;
    # the per-row normalization cancels the shift exactly.
    penalty = penalty - penalty.min(axis=1, keepdims=True)
    ln_cond = np.full((nx, ny), -math.log(ny))

    history = []
    rate = None
    distortion = None
    prev_obj = None
    converged = False
    iterations = 0
    for iterations in range(1, max_iters + 1):
        ln_out = logsumexp(ln_p[:, None] + ln_cond, axis=0)
        ln_cond = ln_out[None, :] - penalty
        norms = logsumexp(ln_cond, axis=1, keepdims=True)
        if np.any(np.isinf(norms)):
            raise ValueError(
                "slope too large for this distortion table: a conditional row "
                "lost all numerical support"
            )
        ln_cond = ln_cond - norms

        rate_prev = rate
        rate = _rate_bits(p, ln_cond, ln_out)
        distortion = float((p[:, None] * np.exp(ln_cond) * d.table).sum())
        obj = rate + slope * distortion
        if prev_obj is not None and obj > prev_obj + OBJECTIVE_SLACK:
            raise RuntimeError(
                f"alternating-minimization objective increased from {prev_obj!r} "
                f"to {obj!r} at iteration {iterations}"
            )
        prev_obj = obj
        history.append(obj)

        if rate_prev is not None and abs(rate - rate_prev) < tol:
            converged = True
            break

    return RdPoint(
        slope=float(slope),
        distortion=distortion,
        rate=rate,
        channel=Channel(np.exp(ln_cond)),
        iterations=iterations,
        converged=converged,
        objective_history=tuple(history),
    )


def distortion_range(source, d):
    """(min achievable distortion, distortion of the best zero-rate point)."""
    d_min = float((source.probs * d.table.min(axis=1)).sum())
    d_zero_rate = float((source.probs @ d.table).min())
    return d_min, d_zero_rate


def rd_point_at_distortion(
    source,
    d,
    target_d,
    tol=1e-6,
    rate_tol=DEFAULT_RATE_TOL,
    max_iters=DEFAULT_MAX_ITERS,
):
    """Bisect the Lagrangian slope until the solved distortion matches target_d.

    Returns a point whose channel satisfies E[d] <= target_d, with
    |distortion - target_d| < tol. Targets at or above the zero-rate
    distortion return the slope-0 point directly.
    """
    d_min, d_zero_rate = distortion_range(source, d)
    if target_d < d_min - 1e-12:
        raise ValueError(
            f"target distortion {target_d} below the achievable minimum {d_min}"
        )
    if target_d >= d_zero_rate:
        return blahut_arimoto(source, d, 0.0, tol=rate_tol, max_iters=max_iters)

    solve = lambda s: blahut_arimoto(source, d, s, tol=rate_tol, max_iters=max_iters)

    lo = 0.0
    hi = 1.0
    hi_point = solve(hi)
    doublings = 0
    while hi_point.distortion > target_d:
        lo = hi
        hi *= 2.0
        doublings += 1
        if doublings > 80:
            if abs(hi_point.distortion - target_d) < tol:
                return hi_point
            raise ValueError(
                f"target distortion {target_d} not reachable within tolerance "
                f"{tol} (asymptotic minimum is {d_min})"
            )
        hi_point = solve(hi)

    for _ in range(200):
        if target_d - hi_point.distortion < tol:
            break
        mid = 0.5 * (lo + hi)
        mid_point = solve(mid)
        if mid_point.distortion <= target_d:
            hi, hi_point = mid, mid_point
        else:
            lo = mid
    return hi_point


def rd_curve(source, d, slopes, tol=DEFAULT_RATE_TOL, max_iters=DEFAULT_MAX_ITERS):
    """Solve a sweep of slopes, in the given order."""
    return [blahut_arimoto(source, d, s, tol=tol, max_iters=max_iters) for s in slopes]


def lossless_rate(source):
    """Rate of the zero-distortion limit, for cross-checks."""
    return entropy(source)
