"""Least-absolute-deviation and least-squares estimators.

``lad_estimate`` runs a primal simplex specialized to the LAD geometry: every
iterate is a vertex interpolating m observations (the basis rows), and a move
swaps one basis row along the steepest descent edge, passing through multiple
residual sign changes per step.  Nonbasic subgradient signs are carried
explicitly so rows whose residual is exactly zero keep a valid sign, and
Bland's smallest-index rule takes over while steps are degenerate.  Because
the noiseless outlier-correction problems this package targets are massively
degenerate at the optimum (every clean row has zero residual there), plain
pivoting can stall walking equivalent bases; at degenerate vertices the
solver therefore checks the exact subgradient optimality certificate -- a
small box-constrained feasibility LP -- and exits as soon as the vertex is
provably optimal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, SingularSystemError
from .lp import LpProblem, solve_lp
from .matgen import RegressorMatrix

__all__ = ["Estimate", "lad_estimate", "ls_estimate"]

#: feasibility tolerance (absolute, scaled by data magnitude)
ZERO_TOL = 1e-9
#: optimality tolerance on the dual values (relative; duals live in [-1, 1])
OPT_TOL = 1e-8


@dataclass
class Estimate:
    """Estimator output: parameters, residuals and solve diagnostics."""

    x_hat: np.ndarray
    objective: float
    residuals: np.ndarray
    status: str          # optimal | iteration_limit | degenerate_fallback
    method: str          # lad | ls
    iterations: int = 0


def _as_matrix(H) -> np.ndarray:
    if isinstance(H, RegressorMatrix):
        return np.asarray(H.entries, dtype=float)
    A = np.asarray(H, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    return A


def _initial_basis(A: np.ndarray) -> np.ndarray:
    """m linearly independent rows found by pivoted QR of the transpose."""
    n, m = A.shape
    _, rdiag, piv = scipy.linalg.qr(A.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(rdiag))
    if diag.size < m or diag[m - 1] <= max(n, m) * np.finfo(float).eps * max(diag[0], 1e-300):
        raise SingularSystemError(
            f"regressor matrix is rank deficient (rank < m = {m})")
    return np.sort(piv[:m]).astype(int)


def _certify_vertex(A: np.ndarray, zero_mask: np.ndarray, grad_nz: np.ndarray) -> bool:
    """Exact subgradient optimality test at a (possibly degenerate) vertex.

    The vertex is optimal iff -grad_nz lies in the zonotope spanned by the
    zero-residual rows with coefficients in [-1, 1]; the membership check is
    a phase-1 LP with m equality constraints.  The returned certificate is
    re-verified directly so the decision does not lean on the LP's internal
    tolerances.
    """
    At = A[zero_mask].T  # m x |T|
    target = -grad_nz
    res = solve_lp(LpProblem(
        c=np.zeros(At.shape[1]),
        a_eq=At,
        b_eq=target,
        bounds=[(-1.0, 1.0)] * At.shape[1],
    ))
    if res.status != "optimal":
        return False
    w = res.x
    scale = max(1.0, float(np.abs(target).max()))
    return (np.abs(w).max(initial=0.0) <= 1.0 + 1e-9
            and float(np.abs(At @ w - target).max()) <= 1e-8 * scale)


def lad_estimate(H, y, max_iter: int | None = None) -> Estimate:
    """Minimize the sum of absolute residuals ||y - Hx||_1.

    Returns a vertex solution: at least m residuals vanish when H has full
    column rank.  When the minimizer set is a face rather than a point, the
    returned vertex is one deterministic element of it.
    """
    A = _as_matrix(H)
    y = np.asarray(y, dtype=float)
    n, m = A.shape
    if y.shape != (n,):
        raise DimensionError(f"y has shape {y.shape}, expected ({n},)")
    if n < m or m < 1:
        raise DimensionError(f"need n >= m >= 1, got n={n}, m={m}")
    if max_iter is None:
        max_iter = 200 * (n + m) + 1000

    basis = _initial_basis(A)
    scale = max(1.0, float(np.abs(y).max()))
    ztol = ZERO_TOL * scale

    x = np.linalg.solve(A[basis], y[basis])
    r = y - A @ x
    sigma = np.where(r >= 0, 1.0, -1.0)

    bland = False
    checked_degenerate = -10**9
    status = "iteration_limit"
    it = 0

    while it < max_iter:
        it += 1
        AB = A[basis]
        sig_nb = sigma.copy()
        sig_nb[basis] = 0.0
        zero_off = (np.abs(r) <= ztol)
        zero_off[basis] = False

        g = A.T @ sig_nb
        lam = np.linalg.solve(AB.T, g)
        viol = np.abs(lam) - 1.0

        if bland:
            cand = np.nonzero(viol > OPT_TOL)[0]
            optimal = cand.size == 0
        else:
            p = int(np.argmax(viol))
            optimal = viol[p] <= OPT_TOL
        if optimal:
            status = "optimal"
            break

        if zero_off.any() and (it - checked_degenerate) >= 25:
            checked_degenerate = it
            zero_mask = zero_off.copy()
            zero_mask[basis] = True
            nz = ~zero_mask
            grad_nz = A[nz].T @ np.sign(r[nz])
            if _certify_vertex(A, zero_mask, grad_nz):
                status = "optimal"
                break

        if bland:
            p = int(cand[0])  # basis kept sorted: first violation = smallest row
        s = 1.0 if lam[p] > 0 else -1.0

        e_p = np.zeros(m)
        e_p[p] = s
        d = np.linalg.solve(AB, e_p)
        hd = A @ d
        hd[basis] = 0.0

        abs_hd = np.abs(hd)
        movable = abs_hd > 1e-11 * max(1.0, float(abs_hd.max()))
        movable[basis] = False

        zeroish = np.abs(r) <= ztol
        t_i = np.full(n, np.inf)
        crossing = movable & ~zeroish & (np.sign(r) == np.sign(hd))
        t_i[crossing] = r[crossing] / hd[crossing]
        blocking_zero = movable & zeroish & (sigma * hd > 0)
        t_i[blocking_zero] = 0.0
        cand_rows = np.nonzero(np.isfinite(t_i))[0]
        if cand_rows.size == 0:
            # cannot happen for full-rank LAD (objective grows along any ray)
            status = "degenerate_fallback"
            break

        if bland:
            t_min = float(t_i[cand_rows].min())
            ties = cand_rows[t_i[cand_rows] <= t_min + ztol]
            leave = int(ties.min())
        else:
            order = np.argsort(t_i[cand_rows], kind="stable")
            rows_sorted = cand_rows[order]
            slope = 1.0 - abs(lam[p])
            leave = int(rows_sorted[-1])
            for i in rows_sorted:
                slope += 2.0 * abs_hd[i]
                if slope >= -1e-12:
                    leave = int(i)
                    break
        t_star = float(t_i[leave])

        degenerate_step = t_star * abs_hd[leave] <= ztol
        bland = degenerate_step

        b_row = basis[p]
        basis[p] = leave
        basis = np.sort(basis)
        sigma[b_row] = -s
        x = np.linalg.solve(A[basis], y[basis])
        r = y - A @ x
        moved = np.abs(r) > ztol
        sigma[moved] = np.sign(r[moved])

    residuals = y - A @ x
    return Estimate(
        x_hat=x,
        objective=float(np.abs(residuals).sum()),
        residuals=residuals,
        status=status,
        method="lad",
        iterations=it,
    )


def ls_estimate(H, y) -> Estimate:
    """Ordinary least squares via SVD (numpy lstsq), unique for full-rank H."""
    A = _as_matrix(H)
    y = np.asarray(y, dtype=float)
    n, m = A.shape
    if y.shape != (n,):
        raise DimensionError(f"y has shape {y.shape}, expected ({n},)")
    if n < m or m < 1:
        raise DimensionError(f"need n >= m >= 1, got n={n}, m={m}")
    x, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    if rank < m:
        raise SingularSystemError(
            f"regressor matrix is rank deficient (rank {rank} < m = {m})")
    residuals = y - A @ x
    return Estimate(
        x_hat=x,
        objective=float(np.linalg.norm(residuals)),
        residuals=residuals,
        status="optimal",
        method="ls",
    )
