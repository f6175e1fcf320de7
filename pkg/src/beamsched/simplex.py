"""Dense two-phase primal simplex returning basic (vertex) optima.

Problem form: maximize c.x subject to A x <= b, x >= 0.  The solver is
deliberately self-contained and deterministic: Bland's smallest-index rule
picks entering and leaving variables, which both prevents cycling and makes
repeated solves bit-reproducible.  Returned optima are vertices of the
feasible polytope, so the number of strictly positive variables never
exceeds the number of constraint rows; several downstream structural checks
lean on that property.

Rows are equilibrated (divided by their max-abs coefficient) before
solving because capacities in generated networks span orders of magnitude.

The ``solver`` keyword accepted by the rate-optimization entry points is
the seam for plugging in an external solver with the same contract; this
module is the default and the only solver the test suite relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_PIVOT_TOL = 1e-9
_RATIO_TIE_TOL = 1e-12
_FEAS_TOL = 1e-7
_MAX_ITER = 50_000

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """maximize objective.x subject to rows.x <= rhs, x >= 0."""

    objective: tuple[float, ...]
    rows: tuple[tuple[float, ...], ...]
    rhs: tuple[float, ...]

    def __post_init__(self) -> None:
        n = len(self.objective)
        if n == 0:
            raise ValueError("need at least one variable")
        if len(self.rows) != len(self.rhs):
            raise ValueError("rows and rhs lengths differ")
        for i, row in enumerate(self.rows):
            if len(row) != n:
                raise ValueError(f"row {i} has {len(row)} coefficients, expected {n}")
        values = list(self.objective) + [v for row in self.rows for v in row] + list(self.rhs)
        if not all(math.isfinite(v) for v in values):
            raise ValueError("all coefficients must be finite")

    @property
    def n_vars(self) -> int:
        return len(self.objective)


@dataclass(frozen=True)
class LpSolution:
    status: str
    x: tuple[float, ...]
    objective: float
    basis: tuple[int, ...]


def _pivot(T: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    piv = T[row] / T[row, col]
    coeffs = T[:, col].copy()
    T -= np.outer(coeffs, piv)
    T[row] = piv
    basis[row] = col


def _iterate(T: np.ndarray, basis: np.ndarray, cost: np.ndarray) -> str:
    """Run simplex pivots until optimal or unbounded (Bland's rule)."""
    m = T.shape[0]
    for _ in range(_MAX_ITER):
        reduced = cost - cost[basis] @ T[:, :-1]
        entering = np.nonzero(reduced > _PIVOT_TOL)[0]
        if entering.size == 0:
            return OPTIMAL
        col = int(entering[0])
        column = T[:, col]
        positive = column > _PIVOT_TOL
        if not positive.any():
            return UNBOUNDED
        ratios = np.full(m, np.inf)
        ratios[positive] = T[positive, -1] / column[positive]
        best = ratios.min()
        ties = np.nonzero(ratios <= best + _RATIO_TIE_TOL)[0]
        row = int(ties[np.argmin(basis[ties])])
        _pivot(T, basis, row, col)
    raise ArithmeticError("simplex did not terminate (iteration cap hit)")


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Solve the LP, reporting infeasible/unbounded via status, never a fault."""
    n = lp.n_vars
    A = np.array(lp.rows, dtype=float).reshape(len(lp.rows), n)
    b = np.array(lp.rhs, dtype=float)
    c = np.array(lp.objective, dtype=float)

    # drop all-zero rows up front: 0 <= b is vacuous or plainly infeasible
    keep = []
    for i in range(A.shape[0]):
        scale = np.abs(A[i]).max() if n else 0.0
        if scale <= 0.0:
            if b[i] < -_FEAS_TOL:
                return LpSolution(INFEASIBLE, (0.0,) * n, 0.0, ())
            continue
        A[i] /= scale
        b[i] /= scale
        keep.append(i)
    A = A[keep]
    b = b[keep]
    m = A.shape[0]

    if m == 0:
        if (c > _PIVOT_TOL).any():
            return LpSolution(UNBOUNDED, (0.0,) * n, 0.0, ())
        return LpSolution(OPTIMAL, (0.0,) * n, 0.0, ())

    n_slack = m
    negative = b < 0.0
    art_rows = np.nonzero(negative)[0]
    n_art = art_rows.size
    width = n + n_slack + n_art

    T = np.zeros((m, width + 1))
    T[:, :n] = A
    T[:, n : n + n_slack] = np.eye(m)
    T[:, -1] = b
    basis = np.arange(n, n + n_slack)

    if n_art:
        T[art_rows] *= -1.0
        for k, i in enumerate(art_rows):
            T[i, n + n_slack + k] = 1.0
            basis[i] = n + n_slack + k
        phase1 = np.zeros(width)
        phase1[n + n_slack :] = -1.0
        status = _iterate(T, basis, phase1)
        if status != OPTIMAL:
            raise ArithmeticError("phase 1 cannot be unbounded")
        artificial_mass = T[basis >= n + n_slack, -1].sum()
        if artificial_mass > _FEAS_TOL:
            return LpSolution(INFEASIBLE, (0.0,) * n, 0.0, ())
        # drive leftover degenerate artificials out of the basis
        drop = []
        for i in range(m):
            if basis[i] < n + n_slack:
                continue
            candidates = np.nonzero(np.abs(T[i, : n + n_slack]) > _PIVOT_TOL)[0]
            if candidates.size:
                _pivot(T, basis, i, int(candidates[0]))
            else:
                drop.append(i)  # redundant row
        if drop:
            keep_rows = [i for i in range(m) if i not in drop]
            T = T[keep_rows]
            basis = basis[keep_rows]
            m = T.shape[0]
        T = np.hstack([T[:, : n + n_slack], T[:, -1:]])
        width = n + n_slack

    cost = np.zeros(width)
    cost[:n] = c
    status = _iterate(T, basis, cost)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, (0.0,) * n, 0.0, ())

    x_full = np.zeros(width)
    x_full[basis] = T[:, -1]
    x = x_full[:n]
    return LpSolution(OPTIMAL, tuple(float(v) for v in x), float(c @ x), tuple(int(v) for v in basis))


def format_lp(lp: LinearProgram) -> str:
    """Plain-text fixed-layout dump of an LP for eyeball debugging."""

    def term(coef: float, j: int) -> str:
        return f"{coef:>12.6g}*x{j}"

    lines = ["maximize"]
    lines.append("  " + " + ".join(term(cj, j) for j, cj in enumerate(lp.objective)))
    lines.append("subject to")
    for i, (row, rhs) in enumerate(zip(lp.rows, lp.rhs)):
        body = " + ".join(term(a, j) for j, a in enumerate(row))
        lines.append(f"  r{i:<3d} {body} <= {rhs:.6g}")
    lines.append("  x >= 0")
    return "\n".join(lines)
