"""Empirical convergence-order certification.

A first-order prediction is checked against the exact decomposition of the
perturbed matrix on a geometric ladder of perturbation sizes.  Residuals of
the corrected expansion shrink like epsilon^2; a variant carrying a
first-order defect only manages epsilon^1, and the fitted log-log slopes
separate the two cleanly.

Residuals are measured in the expansion's own affine chart: the exact
perturbed vector (unit norm, from the full decomposition) is rescaled so
that its coefficient along the unperturbed vector equals 1, matching the
prediction's parametrization, and the Euclidean difference is taken.  The
rescale also makes the comparison sign-proof.  Exact triplets are tracked
across the perturbation by the largest right-vector overlap; an overlap
below MATCH_TOL means the perturbation is too large to track and raises
TripletMatchAmbiguous.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InsufficientSamples,
    TripletMatchAmbiguous,
    ZeroVector,
)
from .linalg import frobenius_norm, svd
from .perturbation import (
    FormulaVariant,
    expand_triplet,
    partition_svd,
    tall_problem,
    triplet_gap,
)

# Residuals at or below FLOOR_TOL sit in the numerical noise floor and are
# excluded from slope fits; MATCH_TOL is the minimum |overlap| for tracking
# a triplet across the perturbation.
FLOOR_TOL = 1e-13
MATCH_TOL = 0.7


@dataclass(frozen=True)
class ResidualSample:
    """Prediction-vs-exact residuals at one perturbation size."""

    epsilon: float
    res_u: float
    res_v: float
    res_sigma: float

    def __post_init__(self):
        vals = (self.epsilon, self.res_u, self.res_v, self.res_sigma)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("residual sample contains non-finite values")
        if self.epsilon < 0.0:
            raise ValueError("epsilon must be nonnegative")
        if min(self.res_u, self.res_v, self.res_sigma) < 0.0:
            raise ValueError("residuals must be nonnegative")


@dataclass(frozen=True)
class ConvergenceReport:
    """Fitted log-log slopes (one per metric) over a residual ladder."""

    variant: FormulaVariant
    samples: tuple
    order_u: float
    order_v: float
    order_sigma: float
    r2_u: float
    r2_v: float
    r2_sigma: float

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        eps = [s.epsilon for s in self.samples]
        if len(eps) < 4:
            raise ValueError("a report needs at least 4 samples")
        if any(e <= 0.0 for e in eps):
            raise ValueError("ladder epsilons must be strictly positive")
        ratios = [eps[i + 1] / eps[i] for i in range(len(eps) - 1)]
        if any(not 0.0 < r < 1.0 for r in ratios):
            raise ValueError("ladder epsilons must decrease strictly")
        if any(abs(r - ratios[0]) > 1e-9 * ratios[0] for r in ratios):
            raise ValueError("ladder epsilons must decrease by a constant factor")

    @property
    def min_r2(self) -> float:
        return min(self.r2_u, self.r2_v, self.r2_sigma)


def align_sign(reference, candidate) -> np.ndarray:
    """Return candidate or -candidate, whichever has nonnegative inner
    product with reference (a zero inner product keeps candidate)."""
    ref = np.asarray(reference, dtype=float).reshape(-1)
    cand = np.asarray(candidate, dtype=float).reshape(-1)
    if ref.shape != cand.shape:
        raise DimensionMismatch(
            f"vectors must have equal length, got {ref.shape[0]} vs {cand.shape[0]}"
        )
    if not float(cand @ cand) > 0.0:
        raise ZeroVector("candidate vector is zero")
    return cand if float(ref @ cand) >= 0.0 else -cand


def _gauge(exact: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Rescale the exact unit vector into the chart where its coefficient
    along the reference vector is 1."""
    c = float(exact @ reference)
    if abs(c) < MATCH_TOL:
        raise TripletMatchAmbiguous(abs(c), MATCH_TOL)
    return exact / c


def residuals_at(
    X,
    E_dir,
    epsilon: float,
    k: int = 1,
    variant: FormulaVariant = FormulaVariant.CORRECTED,
) -> ResidualSample:
    """Residuals of the variant's prediction at one perturbation size.

    Computes the exact decomposition of X + epsilon * E_dir, tracks the
    k-th triplet by the largest right-vector overlap with the unperturbed
    one, rescales the exact vectors into the prediction's affine chart,
    and returns the Euclidean residuals plus |sigma_exact - sigma~|.
    E_dir must have unit Frobenius norm.
    """
    if not (math.isfinite(epsilon) and epsilon >= 0.0):
        raise ValueError(f"epsilon must be finite and >= 0, got {epsilon}")
    Xo, Eo, swapped = tall_problem(X, E_dir)
    nrm = frobenius_norm(Eo)
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"direction must have unit Frobenius norm, got {nrm}")
    part = partition_svd(svd(Xo), k)
    pred = expand_triplet(part, epsilon * Eo, variant)
    exact = svd(Xo + epsilon * Eo)
    overlaps = exact.V.T @ part.v1
    j = int(np.argmax(np.abs(overlaps)))
    if abs(float(overlaps[j])) < MATCH_TOL:
        raise TripletMatchAmbiguous(abs(float(overlaps[j])), MATCH_TOL)
    u_exact = _gauge(exact.U[:, j], part.u1)
    v_exact = exact.V[:, j] / float(overlaps[j])
    res_u = float(np.linalg.norm(u_exact - pred.u_tilde))
    res_v = float(np.linalg.norm(v_exact - pred.v_tilde))
    res_sigma = abs(float(exact.S[j]) - pred.sigma_tilde)
    if swapped:
        res_u, res_v = res_v, res_u
    return ResidualSample(
        epsilon=float(epsilon), res_u=res_u, res_v=res_v, res_sigma=res_sigma
    )


def fit_loglog_slope(epsilons, residuals):
    """Least-squares slope of log(residual) against log(epsilon).

    Returns (slope, r2).  A synthetic ladder residual = epsilon^q fits
    q exactly up to roundoff.
    """
    x = np.log(np.asarray(epsilons, dtype=float))
    y = np.log(np.asarray(residuals, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res == 0.0 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(slope), float(r2)


def fit_report(variant: FormulaVariant, samples) -> ConvergenceReport:
    """Fit per-metric orders over a residual ladder.

    Samples at or below FLOOR_TOL are excluded per metric; fewer than 3
    survivors for any metric raises InsufficientSamples.
    """
    samples = tuple(samples)
    orders = {}
    r2s = {}
    for metric in ("res_u", "res_v", "res_sigma"):
        pts = [
            (s.epsilon, getattr(s, metric))
            for s in samples
            if getattr(s, metric) > FLOOR_TOL
        ]
        if len(pts) < 3:
            raise InsufficientSamples(
                f"{metric}: only {len(pts)} samples above the noise floor"
            )
        orders[metric], r2s[metric] = fit_loglog_slope(
            [p[0] for p in pts], [p[1] for p in pts]
        )
    return ConvergenceReport(
        variant=variant,
        samples=samples,
        order_u=orders["res_u"],
        order_v=orders["res_v"],
        order_sigma=orders["res_sigma"],
        r2_u=r2s["res_u"],
        r2_v=r2s["res_v"],
        r2_sigma=r2s["res_sigma"],
    )


def convergence_ladder(
    X,
    E_dir,
    k: int = 1,
    variant: FormulaVariant = FormulaVariant.CORRECTED,
    eps0: float = 1e-2,
    factor: float = 0.5,
    count: int = 8,
) -> ConvergenceReport:
    """Residual ladder epsilon_i = eps0 * factor^i, i = 0..count-1, plus
    fitted per-metric orders.

    Requires count >= 4, 0 < factor < 1, and eps0 < 0.1 * (spectral gap at
    the selected triplet) so that tracking stays unambiguous.  Sampling is
    strictly sequential, so identical inputs give bitwise-identical
    reports.
    """
    if count < 4:
        raise ValueError(f"count must be >= 4, got {count}")
    if not (math.isfinite(factor) and 0.0 < factor < 1.0):
        raise ValueError(f"factor must lie in (0, 1), got {factor}")
    if not (math.isfinite(eps0) and eps0 > 0.0):
        raise ValueError(f"eps0 must be positive, got {eps0}")
    Xo, _, _ = tall_problem(X, E_dir)
    full = svd(Xo)
    # triplet separation is a data problem and is reported as such,
    # before eps0 (a flag problem) is ever compared against the gap
    partition_svd(full, k)
    gap = triplet_gap(full, k)
    if eps0 >= 0.1 * gap:
        raise ValueError(
            f"eps0 ={eps0} must stay below 0.1 * spectral gap ({0.1 * gap:.3e})"
        )
    samples = [
        residuals_at(X, E_dir, eps0 * factor**i, k, variant)
        for i in range(count)
    ]
    return fit_report(variant, samples)
