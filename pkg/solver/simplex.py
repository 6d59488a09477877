import logging

import numpy as np

from .errors import NumericalFailure

logger = logging.getLogger("solver.simplex")

PIVOT_TOL = 1e-12


class Tableau:
    """
    Dense simplex tableau for max c'x subject to Ax <= b, x >= 0 with b >= 0.

    The slack columns form the starting basis, so no first phase is needed.
    Row 0 holds the reduced costs (negated for maximization) and the current
    objective value; column 0 holds the right-hand side. Pivoting follows
    Bland's rule, which guarantees termination at a vertex.
    """

    def __init__(self, c: np.ndarray, A: np.ndarray, b: np.ndarray):
        self.m, self.n = A.shape
        if np.any(b < 0):
            raise NumericalFailure("right-hand side must be nonnegative for the slack basis")

        self.tableau = np.zeros((self.m + 1, self.n + self.m + 1))
        self.tableau[1:, 0] = b
        self.tableau[1:, 1:self.n + 1] = A
        self.tableau[1:, self.n + 1:] = np.eye(self.m)
        self.tableau[0, 1:self.n + 1] = -c
        self.basis = np.arange(self.n, self.n + self.m)
        self.pivots = 0

    def pivot(self, pivot_row: int, pivot_col: int):
        self.basis[pivot_row - 1] = pivot_col - 1
        self.tableau[pivot_row, :] /= self.tableau[pivot_row, pivot_col]
        for i in range(self.tableau.shape[0]):
            if i == pivot_row:
                continue
            self.tableau[i, :] -= self.tableau[i, pivot_col] * self.tableau[pivot_row, :]
        self.pivots += 1

    def entering_column(self):
        # Bland: lowest-index improving column
        candidates = np.nonzero(self.tableau[0, 1:] < -PIVOT_TOL)[0]
        if len(candidates) == 0:
            return None
        return candidates[0] + 1

    def leaving_row(self, col):
        column = self.tableau[1:, col]
        rows = np.nonzero(column > PIVOT_TOL)[0]
        if len(rows) == 0:
            raise NumericalFailure(f"LP is unbounded along column {col - 1}")

        ratios = self.tableau[1:, 0][rows] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + PIVOT_TOL]
        # Bland: among tied rows leave with the lowest basic variable index
        return ties[np.argmin(self.basis[ties])] + 1

    def solve(self, max_pivots=None):
        if max_pivots is None:
            max_pivots = 50 * (self.n + self.m) + 1000

        while True:
            col = self.entering_column()
            if col is None:
                break
            if self.pivots >= max_pivots:
                raise NumericalFailure(f"simplex did not terminate within {max_pivots} pivots")
            self.pivot(self.leaving_row(col), col)

        if not np.all(np.isfinite(self.tableau)):
            raise NumericalFailure("simplex tableau contains non-finite values")
        logger.debug(f"simplex finished after {self.pivots} pivots")
        return self

    @property
    def objective(self) -> float:
        return float(self.tableau[0, 0])

    def solution(self) -> np.ndarray:
        x = np.zeros(self.n + self.m)
        x[self.basis] = self.tableau[1:, 0]
        if np.any(x < -1e-9):
            raise NumericalFailure("simplex produced an infeasible basic solution")
        return np.maximum(x[:self.n], 0.0)


def maximize(c, A, b, max_pivots=None) -> Tableau:
    c = np.asarray(c, dtype=float)
    b = np.asarray(b, dtype=float)
    A = np.asarray(A, dtype=float).reshape(len(b), len(c))
    return Tableau(c, A, b).solve(max_pivots)
