"""Euclidean projection onto lp balls, for every norm index p in [0, inf].

For p > 1 the projection is computed from its coordinatewise dual
characterization: each output magnitude solves ``psi + lam*psi**(p-1) = |y_i|``
at the common multiplier ``lam*`` that makes the shrunk vector exactly
feasible, and ``lam*`` is located by doubling plus safeguarded bisection on
the strictly decreasing dual sum.  ``p = 1`` uses exact sort-and-threshold
water filling, ``p = 0`` keeps the largest magnitudes, ``p = inf`` clips.
For p in (0, 1) the problem is nonconvex; a deterministic multiplier scan
returns a stationary point together with a weak-duality gap certificate, and
tiny problems are additionally solved by exhaustive enumeration of the
stationary equality systems.

General radii are handled by solving on the unit ball after rescaling
``y / r`` and mapping the solution back.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BracketFailureError,
    DimensionMismatchError,
    InvalidParameterError,
    NonFiniteInputError,
)
from .shrinkage import (
    DEFAULT_TOL,
    branch_roots,
    branch_vanish_lambda,
    prox_jump_lambda,
    prox_power_many,
    psi_many,
)

# Feasibility slack on the p-th power sum; keeps ||x||_p <= r*(1 + 1e-9).
SUM_FEAS_TOL = 1e-10

# Outer multiplier search stops at this dual-sum gap or at relative bracket
# width 1e-14*(1 + lam), whichever happens first.
LAMBDA_GAP_TOL = 1e-10

# Problems of at most this dimension get the exhaustive p < 1 solver.
EXHAUSTIVE_DIM = 4


@dataclass(frozen=True)
class LpBall:
    """Constraint set: the lp ball of the given radius, or the sparsity set.

    ``p = 0`` encodes the sparsity constraint ``||x||_0 <= sparsity`` (the
    radius must be omitted); any ``p > 0`` including ``inf`` takes a radius.
    """

    p: float
    dim: int
    radius: float | None = None
    sparsity: int | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidParameterError(f"dim must be >= 1, got {self.dim}")
        if self.p < 0 or math.isnan(self.p):
            raise InvalidParameterError(f"p must lie in [0, inf], got {self.p}")
        if self.p == 0:
            if self.sparsity is None or self.radius is not None:
                raise InvalidParameterError("p = 0 requires sparsity and no radius")
            if not (1 <= self.sparsity <= self.dim):
                raise InvalidParameterError(
                    f"sparsity must lie in [1, {self.dim}], got {self.sparsity}"
                )
        else:
            if self.radius is None or self.sparsity is not None:
                raise InvalidParameterError("p > 0 requires radius and no sparsity")
            if not (self.radius > 0):
                raise InvalidParameterError(f"radius must be positive, got {self.radius}")

    @property
    def conjugate(self) -> float:
        """Holder conjugate q with 1/p + 1/q = 1; pairs (1, inf) and (inf, 1)."""
        if self.p == 1:
            return math.inf
        if self.p == math.inf:
            return 1.0
        if self.p > 1:
            return self.p / (self.p - 1.0)
        raise InvalidParameterError(f"conjugate undefined for p = {self.p}")

    def contains(self, y: np.ndarray, feas_tol: float = 1e-9) -> bool:
        y = np.asarray(y, dtype=float)
        if self.p == 0:
            return int(np.count_nonzero(y)) <= self.sparsity
        return lp_norm(y, self.p) <= self.radius * (1.0 + feas_tol)


def lp_norm(x: np.ndarray, p: float) -> float:
    """(Quasi)norm ||x||_p; number of nonzeros when p = 0."""
    x = np.asarray(x, dtype=float)
    if p == 0:
        return float(np.count_nonzero(x))
    if p == math.inf:
        return float(np.max(np.abs(x))) if x.size else 0.0
    a = np.abs(x)
    pos = a[a > 0]
    if pos.size == 0:
        return 0.0
    return float(np.sum(pos**p) ** (1.0 / p))


@dataclass
class ProjectionResult:
    """Projection output together with its optimality certificate.

    ``multiplier`` is the Lagrange-type multiplier of the coordinatewise
    fixed point in the original (unrescaled) coordinates; it is 0 for
    feasible inputs and, degenerately, for the direct ``p = 0`` and
    ``p = inf`` routines, which have no scalar multiplier.  ``kkt_residual``
    is the maximum of the stationarity and complementary-slackness residuals
    (stationarity over nonzero coordinates only when p <= 1).
    ``duality_gap`` is reported only for p in (0, 1), where the returned
    point is a stationary candidate rather than a certified global minimum.
    """

    point: np.ndarray
    multiplier: float
    kkt_residual: float
    iterations: int
    duality_gap: float | None = None


def project_top_s(s: int, y: np.ndarray) -> np.ndarray:
    """Keep the s largest-magnitude entries, zero the rest (ties: lowest index)."""
    y = np.asarray(y, dtype=float)
    if not (1 <= s <= y.size):
        raise InvalidParameterError(f"sparsity must lie in [1, {y.size}], got {s}")
    order = np.argsort(-np.abs(y), kind="stable")
    out = np.zeros_like(y)
    keep = order[:s]
    out[keep] = y[keep]
    return out


def project_clip(r: float, y: np.ndarray) -> np.ndarray:
    """Coordinatewise clip to [-r, r]."""
    if not (r > 0):
        raise InvalidParameterError(f"radius must be positive, got {r}")
    y = np.asarray(y, dtype=float)
    return np.sign(y) * np.minimum(np.abs(y), r)


def dual_sum(lam: float, y: np.ndarray, p: float, radius: float = 1.0,
             tol: float = DEFAULT_TOL) -> float:
    """Sum of shrunk magnitudes to the p-th power at multiplier ``lam``.

    Continuous and strictly decreasing in ``lam``; equals ``||y/r||_p**p`` at
    ``lam = 0`` and tends to 0 as ``lam`` grows.
    """
    if not (p > 1):
        raise InvalidParameterError(f"dual_sum requires p > 1, got {p}")
    if lam < 0:
        raise InvalidParameterError(f"lam must be nonnegative, got {lam}")
    t = np.abs(np.asarray(y, dtype=float)) / radius
    psi = psi_many(p, lam, t, tol)
    return float(np.sum(psi[psi > 0] ** p))


def _dual_sum_and_slope(p: float, lam: float, t: np.ndarray, tol: float):
    psi = psi_many(p, lam, t, tol)
    pos = psi > 0
    value = float(np.sum(psi[pos] ** p))
    with np.errstate(over="ignore", divide="ignore"):
        pw = psi[pos] ** (p - 1.0)
        denom = 1.0 + lam * (p - 1.0) * psi[pos] ** (p - 2.0)
        slope = -float(np.sum(p * pw * pw / denom))
    return value, slope, psi


def _find_lambda_star(p: float, t: np.ndarray, gap_tol: float):
    """Multiplier making the dual sum equal 1, given sum(t**p) > 1."""
    if not np.all(np.isfinite(t)):
        raise BracketFailureError("non-finite magnitudes in multiplier search")
    inner_tol = min(gap_tol / 10, DEFAULT_TOL)
    iterations = 0
    lo = 0.0
    hi = 1.0
    value, slope, psi = _dual_sum_and_slope(p, hi, t, inner_tol)
    iterations += 1
    while value > 1.0:
        lo = hi
        hi *= 2.0
        if hi > 1e300:
            raise BracketFailureError("failed to bracket the dual multiplier")
        value, slope, psi = _dual_sum_and_slope(p, hi, t, inner_tol)
        iterations += 1

    lam = 0.5 * (lo + hi)
    for _ in range(200):
        value, slope, psi = _dual_sum_and_slope(p, lam, t, inner_tol)
        iterations += 1
        f = value - 1.0
        if abs(f) <= gap_tol or (hi - lo) <= 1e-14 * (1.0 + lam):
            break
        if f > 0:
            lo = lam
        else:
            hi = lam
        newton = lam - f / slope if slope < 0 else math.nan
        if math.isfinite(newton) and lo < newton < hi:
            lam = newton
        else:
            lam = 0.5 * (lo + hi)
    else:  # pragma: no cover - bracket shrinks strictly every iteration
        _, _, psi = _dual_sum_and_slope(p, lam, t, inner_tol)
        iterations += 1
    return lam, psi, iterations


def find_lambda_star(y: np.ndarray, p: float, radius: float = 1.0,
                     tol: float = LAMBDA_GAP_TOL) -> float:
    """Multiplier at which the dual sum hits 1: doubling then safeguarded bisection.

    Requires ``p > 1`` and an infeasible input (``||y/r||_p > 1``); feasible
    inputs never reach this search (the projection returns them with a zero
    multiplier).  The result satisfies ``|dual_sum(lam) - 1| <= tol`` unless
    the bracket collapses to relative width 1e-14 first.
    """
    if not (p > 1):
        raise InvalidParameterError(f"find_lambda_star requires p > 1, got {p}")
    t = np.abs(np.asarray(y, dtype=float)) / radius
    pos = t > 0
    if not np.any(pos) or float(np.sum(t[pos] ** p)) <= 1.0:
        raise InvalidParameterError("input lies inside the ball; multiplier is 0")
    lam, _, _ = _find_lambda_star(p, t, tol)
    return lam


def _kkt_pieces(y: np.ndarray, x: np.ndarray, lam: float, p: float, radius: float):
    ay, ax = np.abs(y), np.abs(x)
    nz = ax > 0
    if p == 1:
        stat_nz = np.abs(ay[nz] - ax[nz] - lam) if np.any(nz) else np.array([0.0])
        stat_z = np.maximum(ay[~nz] - lam, 0.0) if np.any(~nz) else np.array([0.0])
        stat = max(float(np.max(stat_nz)), float(np.max(stat_z)))
    else:
        with np.errstate(over="ignore"):
            stat = float(np.max(np.abs(ay[nz] - ax[nz] - lam * ax[nz] ** (p - 1.0)))) \
                if np.any(nz) else 0.0
        if p > 1 and np.any(~nz):
            # for p > 1 a zero output coordinate requires a zero input
            stat = max(stat, float(np.max(ay[~nz])))
    powsum = float(np.sum(ax[nz] ** p)) if np.any(nz) else 0.0
    if p < 1:
        # stationary candidates may sit strictly inside the ball; only an
        # infeasible excess counts against the certificate
        slack = lam * max(powsum - radius**p, 0.0)
    else:
        slack = abs(lam * (powsum - radius**p))
    return max(stat, slack)


def kkt_residual(y: np.ndarray, result: ProjectionResult, p: float,
                 radius: float = 1.0) -> float:
    """Maximum of the stationarity and complementary-slackness residuals."""
    if not (p > 1):
        raise InvalidParameterError(f"kkt_residual requires p > 1, got {p}")
    return _kkt_pieces(np.asarray(y, float), result.point, result.multiplier, p, radius)


def _project_l1_unit(t: np.ndarray):
    """Water-filling threshold for the unit l1 ball; t = |y|, sum(t) > 1."""
    u = np.sort(t)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, t.size + 1)
    rho = int(np.max(np.nonzero(u > (css - 1.0) / j)[0])) + 1
    tau = (css[rho - 1] - 1.0) / rho
    return np.maximum(t - tau, 0.0), float(tau)


def _quasinorm_candidates_scan(p: float, t: np.ndarray, tol: float):
    """Deterministic multiplier scan for p < 1: prox path + weak dual bounds."""
    t_max = float(np.max(t))
    anchor = float(prox_jump_lambda(p, t_max))
    grid = anchor * np.geomspace(1e-6, 1e6, 64)

    def batch(lams):
        X = prox_power_many(p, np.asarray(lams)[:, None], t[None, :], tol)
        with np.errstate(invalid="ignore"):
            powsums = np.sum(np.where(X > 0, X**p, 0.0), axis=1)
        objs = 0.5 * np.sum((X - t) ** 2, axis=1)
        duals = objs + (np.asarray(lams) / p) * (powsums - 1.0)
        return X, powsums, objs, duals

    X, powsums, objs, duals = batch(grid)
    best_dual = float(np.max(duals))
    feas = powsums <= 1.0 + SUM_FEAS_TOL
    candidates = [(float(objs[i]), X[i], float(grid[i]))
                  for i in range(grid.size) if feas[i]]
    evals = grid.size

    for i in range(grid.size - 1):
        if feas[i] or not feas[i + 1]:
            continue
        lo, hi = float(grid[i]), float(grid[i + 1])
        for _ in range(50):
            mid = math.sqrt(lo * hi)
            Xm, sm, om, dm = batch([mid])
            evals += 1
            best_dual = max(best_dual, float(dm[0]))
            if sm[0] <= 1.0 + SUM_FEAS_TOL:
                candidates.append((float(om[0]), Xm[0], mid))
                hi = mid
            else:
                lo = mid
    return candidates, best_dual, evals


def _quasinorm_prefix_candidates(p: float, t: np.ndarray, tol: float):
    """Boundary candidates on prefix supports for p < 1 at any dimension.

    For each support size j in a ladder (every size near the smallest
    feasible one, then geometric steps), solve the one-dimensional equality
    ``sum of the j kept roots**p = 1`` in the multiplier, under the two
    branch patterns a restricted-support local minimum can have: all kept
    coordinates on the increasing branch, or exactly one -- taken as the
    smallest kept magnitude -- on the decreasing branch.  (Two decreasing
    coordinates always admit a feasible second-order descent direction.)
    These are the stationary points the per-coordinate prox path jumps over.
    """
    d = t.size
    order = np.argsort(-t, kind="stable")
    ts = t[order]
    nnz = int(np.count_nonzero(ts > 0))
    if nnz == 0:
        return [], 0
    prefix_at_zero = np.cumsum(ts[:nnz] ** p)
    first = int(np.searchsorted(prefix_at_zero, 1.0))  # index of first sum >= 1
    if first >= nnz:
        return [], 0
    ladder = list(range(first + 1, min(first + 9, nnz + 1)))
    step = first + 9
    while step <= nnz:
        ladder.append(step)
        step = int(math.ceil(step * 1.5))
    if nnz > first:
        ladder.append(nnz)
    ladder = sorted(set(ladder))

    n_grid = 40
    lam_top = float(np.max(branch_vanish_lambda(p, ts[:nnz])))
    grid = np.geomspace(lam_top * 1e-10, lam_top * (1 - 1e-9), n_grid)
    up = branch_roots(p, grid[:, None], ts[None, :nnz], True, tol)
    low = branch_roots(p, grid[:, None], ts[None, :nnz], False, tol)
    evals = 2 * n_grid
    with np.errstate(invalid="ignore"):
        up_pw = up**p
        low_pw = low**p
        H_up = np.cumsum(up_pw, axis=1)

    items = []  # (j, last_lower, lam_lo, lam_hi, f_lo)
    for last_lower in (False, True):
        for j in ladder:
            col = H_up[:, j - 1] - 1.0
            if last_lower:
                col = col - up_pw[:, j - 1] + low_pw[:, j - 1]
            fin = np.isfinite(col)
            for l in range(n_grid - 1):
                if fin[l] and fin[l + 1] and col[l] * col[l + 1] <= 0:
                    items.append((j, last_lower, grid[l], grid[l + 1], col[l]))
    if not items:
        return [], evals

    js = np.array([it[0] for it in items])
    lowers = np.array([it[1] for it in items])
    lo = np.array([it[2] for it in items])
    hi = np.array([it[3] for it in items])
    flo = np.array([it[4] for it in items])
    n = len(items)
    jmax = int(np.max(js))
    tv = np.broadcast_to(ts[:jmax], (n, jmax))
    mask_it = np.ones((n, jmax), dtype=bool)
    mask_it[lowers, js[lowers] - 1] = False

    def equality_values(lams):
        rts = branch_roots(p, lams[:, None], tv, mask_it, tol)
        with np.errstate(invalid="ignore"):
            fm = np.cumsum(rts**p, axis=1)[np.arange(n), js - 1] - 1.0
        return rts, fm

    for _ in range(50):
        mid = 0.5 * (lo + hi)
        _, fm = equality_values(mid)
        evals += n
        left = flo * fm <= 0
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        flo = np.where(left, flo, fm)
        conv = np.nanmax(np.abs(fm)) if np.any(np.isfinite(fm)) else math.inf
        if conv <= 1e-12:
            break
    lam_eq = 0.5 * (lo + hi)
    rts, _ = equality_values(lam_eq)
    candidates = []
    for k in range(n):
        j = int(js[k])
        x = rts[k, :j]
        if not np.all(np.isfinite(x)):
            continue
        powsum = float(np.sum(x**p))
        if powsum > 1.0:
            x = x * powsum ** (-1.0 / p)
        full = np.zeros(d)
        full[order[:j]] = x
        obj = float(0.5 * np.sum((full - t) ** 2))
        candidates.append((obj, full, float(lam_eq[k])))
    return candidates, evals


def _quasinorm_candidates_exhaustive(p: float, t: np.ndarray, tol: float):
    """All equality-constrained stationary systems for p < 1 at tiny dimension.

    The optimal support is a prefix of the coordinates sorted by magnitude
    (swapping a kept smaller magnitude for a dropped larger one never hurts),
    and each kept coordinate sits on one of the two branches of the fixed
    point; enumerate every (prefix, branch assignment) and solve the
    one-dimensional equality ``sum(x_i**p) = 1`` in the multiplier, locating
    sign changes on a grid and bisecting them jointly.
    """
    d = t.size
    order = np.argsort(-t, kind="stable")
    ts = t[order]
    candidates = []
    evals = 0
    n_grid = 40

    for j in range(1, d + 1):
        prefix = ts[:j]
        if prefix[-1] <= 0:
            break
        lam_ub = float(np.min(branch_vanish_lambda(p, prefix)))
        grid = np.geomspace(lam_ub * 1e-8, lam_ub * (1 - 1e-9), n_grid)
        masks = np.array(list(itertools.product((True, False), repeat=j)), dtype=bool)
        roots = branch_roots(p, grid[None, :, None], prefix[None, None, :],
                             masks[:, None, :], tol)
        evals += masks.shape[0] * n_grid
        with np.errstate(invalid="ignore"):
            h = np.sum(roots**p, axis=2) - 1.0  # NaN where a branch is missing

        items = []
        for c in range(masks.shape[0]):
            for i in range(n_grid - 1):
                a, b = h[c, i], h[c, i + 1]
                if np.isfinite(a) and np.isfinite(b) and a * b <= 0:
                    items.append((c, grid[i], grid[i + 1], a))
        if not items:
            continue
        cidx = np.array([it[0] for it in items])
        lo = np.array([it[1] for it in items])
        hi = np.array([it[2] for it in items])
        flo = np.array([it[3] for it in items])
        mask_it = masks[cidx]
        pref = np.broadcast_to(prefix, (len(items), j))
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            rts = branch_roots(p, mid[:, None], pref, mask_it, tol)
            evals += len(items)
            with np.errstate(invalid="ignore"):
                fm = np.sum(rts**p, axis=1) - 1.0
            left = flo * fm <= 0
            hi = np.where(left, mid, hi)
            lo = np.where(left, lo, mid)
            flo = np.where(left, flo, fm)
            conv = np.nanmax(np.abs(fm)) if np.any(np.isfinite(fm)) else math.inf
            if conv <= 1e-13:
                break
        lam_eq = 0.5 * (lo + hi)
        rts = branch_roots(p, lam_eq[:, None], pref, mask_it, tol)
        for k in range(len(items)):
            x = rts[k]
            if not np.all(np.isfinite(x)):
                continue
            full = np.zeros(d)
            full[order[:j]] = x
            obj = float(0.5 * np.sum((full - t) ** 2))
            candidates.append((obj, full, float(lam_eq[k])))
    return candidates, evals


def _project_quasinorm_unit(p: float, t: np.ndarray, tol: float):
    """Stationary projection of magnitudes t onto the unit ball, p in (0,1)."""
    candidates, best_dual, evals = _quasinorm_candidates_scan(p, t, tol)
    ladder, more = _quasinorm_prefix_candidates(p, t, tol)
    candidates.extend(ladder)
    evals += more
    if t.size <= EXHAUSTIVE_DIM:
        extra, more = _quasinorm_candidates_exhaustive(p, t, tol)
        for obj, x, lam in extra:
            pos = x > 0
            powsum = float(np.sum(x[pos] ** p))
            if powsum > 1.0:
                # the multiplier bisection leaves O(1e-12) boundary error;
                # snap onto the boundary rather than reject the candidate
                x = x * powsum ** (-1.0 / p)
                obj = float(0.5 * np.sum((x - t) ** 2))
            candidates.append((obj, x, lam))
        evals += more
    if not candidates:
        # everything shrunk to zero is always feasible at a large multiplier
        lam = float(prox_jump_lambda(p, float(np.max(t)))) * 1.01
        candidates.append((float(0.5 * np.sum(t**2)), np.zeros_like(t), lam))
    obj, x, lam = min(candidates, key=lambda c: (c[0], c[2]))
    gap = max(obj - best_dual, 0.0)
    return x, lam, gap, evals


def project(ball: LpBall, y: np.ndarray, tol: float = LAMBDA_GAP_TOL) -> ProjectionResult:
    """Euclidean projection of ``y`` onto the ball.

    Unique minimizer for p >= 1; for p in (0, 1) a stationary point with a
    reported weak-duality gap.  ``tol`` controls the outer multiplier search.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size != ball.dim:
        raise DimensionMismatchError(
            f"expected a vector of length {ball.dim}, got shape {y.shape}"
        )
    if not np.all(np.isfinite(y)):
        raise NonFiniteInputError("input vector contains non-finite entries")

    p, r = ball.p, ball.radius

    if p == 0:
        return ProjectionResult(project_top_s(ball.sparsity, y), 0.0, 0.0, 0)
    if p == math.inf:
        return ProjectionResult(project_clip(r, y), 0.0, 0.0, 0)

    t = np.abs(y) / r
    pos = t > 0
    powsum = float(np.sum(t[pos] ** p)) if np.any(pos) else 0.0
    if powsum <= 1.0 + SUM_FEAS_TOL:
        gap = 0.0 if p < 1 else None
        return ProjectionResult(y.copy(), 0.0, 0.0, 0, gap)

    if p == 1:
        mags, tau = _project_l1_unit(t)
        x = np.sign(y) * mags * r
        lam = tau * r
        resid = _kkt_pieces(y, x, lam, p, r)
        return ProjectionResult(x, lam, resid, 0)

    if p > 1:
        lam_unit, psi, iters = _find_lambda_star(p, t, tol)
        x = np.sign(y) * psi * r
        lam = lam_unit * r ** (2.0 - p)
        resid = _kkt_pieces(y, x, lam, p, r)
        return ProjectionResult(x, lam, resid, iters)

    mags, lam_unit, gap_unit, evals = _project_quasinorm_unit(p, t, DEFAULT_TOL)
    x = np.sign(y) * mags * r
    lam = lam_unit * r ** (2.0 - p)
    resid = _kkt_pieces(y, x, lam, p, r)
    return ProjectionResult(x, lam, resid, evals, gap_unit * r * r)
