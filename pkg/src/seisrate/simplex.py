"""Dense two-phase tableau simplex for the small LPs used in this package.

Solves   min (or max)  c @ x   subject to   A @ x <= b,  x >= 0.

Rows with negative b get an artificial variable and a phase-1 solve.
Entering variable: most negative reduced cost, switching to Bland's rule
after a fixed number of pivots to rule out cycling.
"""

from __future__ import annotations

import numpy as np

from .errors import SeisrateError

_TOL = 1e-9


class LpInfeasible(SeisrateError):
    """The LP constraint set is empty."""


class LpUnbounded(SeisrateError):
    """The LP objective is unbounded over the feasible set."""


def _run_simplex(tableau, basis, num_cols, tol):
    """Pivot until optimal. tableau rows: m constraints + 1 objective row.

    The objective row holds reduced costs of a minimization; optimality is
    all reduced costs >= -tol.
    """
    m = len(basis)
    max_dantzig = 50 * (m + num_cols)
    max_total = 200 * (m + num_cols) + 10_000
    for it in range(max_total):
        cost = tableau[-1, :num_cols]
        if it < max_dantzig:
            enter = int(np.argmin(cost))
            if cost[enter] >= -tol:
                return
        else:  # Bland: first negative reduced cost
            neg = np.nonzero(cost < -tol)[0]
            if neg.size == 0:
                return
            enter = int(neg[0])
        col = tableau[:m, enter]
        pos = col > tol
        if not np.any(pos):
            raise LpUnbounded("unbounded pivot column")
        ratios = np.full(m, np.inf)
        ratios[pos] = tableau[:m, -1][pos] / col[pos]
        leave = int(np.argmin(ratios))
        if it >= max_dantzig:
            # Bland tie-break: smallest basis index among minimal ratios
            best = ratios[leave]
            ties = np.nonzero(ratios <= best + tol * (1 + abs(best)))[0]
            leave = int(min(ties, key=lambda r: basis[r]))
        piv = tableau[leave, enter]
        tableau[leave] /= piv
        for r in range(m + 1):
            if r != leave and tableau[r, enter] != 0.0:
                tableau[r] -= tableau[r, enter] * tableau[leave]
        basis[leave] = enter
    raise SeisrateError("simplex failed to converge (pivot limit reached)")


def solve_lp(c, a_ub, b_ub, maximize=False, tol=_TOL):
    """Solve the LP; returns (x, objective_value).

    Raises LpInfeasible / LpUnbounded accordingly.
    """
    c = np.asarray(c, dtype=float)
    a = np.atleast_2d(np.asarray(a_ub, dtype=float))
    b = np.asarray(b_ub, dtype=float).copy()
    m, n = a.shape
    if c.shape != (n,) or b.shape != (m,):
        raise ValueError("inconsistent LP dimensions")
    obj = -c if maximize else c.copy()

    a = a.copy()
    flip = b < 0
    a[flip] *= -1.0
    b[flip] *= -1.0
    slack_sign = np.where(flip, -1.0, 1.0)

    art_rows = np.nonzero(flip)[0]
    n_art = art_rows.size
    width = n + m + n_art + 1
    tableau = np.zeros((m + 1, width))
    tableau[:m, :n] = a
    tableau[:m, n:n + m] = np.diag(slack_sign)
    for k, r in enumerate(art_rows):
        tableau[r, n + m + k] = 1.0
    tableau[:m, -1] = b

    basis = [0] * m
    for r in range(m):
        basis[r] = n + r
    for k, r in enumerate(art_rows):
        basis[r] = n + m + k

    if n_art:
        # phase 1: minimize the sum of artificials
        tableau[-1, n + m:n + m + n_art] = 1.0
        for r in art_rows:
            tableau[-1] -= tableau[r]
        _run_simplex(tableau, basis, n + m + n_art, tol)
        if tableau[-1, -1] < -tol * (1 + np.abs(b).max(initial=1.0)):
            raise LpInfeasible("phase-1 optimum is positive")
        # drive any artificial still in the basis out of it
        for r in range(m):
            if basis[r] >= n + m:
                row = tableau[r, :n + m]
                cand = np.nonzero(np.abs(row) > tol)[0]
                if cand.size:
                    enter = int(cand[0])
                    piv = tableau[r, enter]
                    tableau[r] /= piv
                    for rr in range(m + 1):
                        if rr != r and tableau[rr, enter] != 0.0:
                            tableau[rr] -= tableau[rr, enter] * tableau[r]
                    basis[r] = enter
        tableau[:, n + m:n + m + n_art] = 0.0

    # phase 2 objective row
    tableau[-1, :] = 0.0
    tableau[-1, :n] = obj
    for r in range(m):
        if basis[r] < n and obj[basis[r]] != 0.0:
            tableau[-1] -= obj[basis[r]] * tableau[r]
    _run_simplex(tableau, basis, n + m, tol)

    x = np.zeros(n)
    for r in range(m):
        if basis[r] < n:
            x[basis[r]] = tableau[r, -1]
    value = float(c @ x)
    return x, value
