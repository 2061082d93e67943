# Copyright 2022 OpenMined.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Small dense linear programs.

All programs have the form

    minimize    c^T x
    subject to  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.

The default solver is a two-phase tableau simplex method. It prices with
Dantzig's rule and switches to Bland's rule, which can't cycle, while it is
stuck on a degenerate vertex (the minimax center problems are highly
degenerate). HiGHS from scipy is available for larger instances.
"""

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize


class SolverError(RuntimeError):
    """Base class for failures of the numerical solvers."""


class InfeasibleProblemError(SolverError):
    pass


class UnboundedProblemError(SolverError):
    pass


class IterationLimitError(SolverError):
    pass


class LpMethod(enum.Enum):
    DENSE_SIMPLEX = "dense_simplex"
    HIGHS = "highs"


@dataclass(frozen=True)
class LinearProgramResult:
    x: np.ndarray
    objective: float
    iterations: int


def _as_matrix(a: Optional[np.ndarray], num_vars: int) -> np.ndarray:
    if a is None:
        return np.zeros((0, num_vars))
    return np.atleast_2d(np.asarray(a, dtype=float)).reshape(-1, num_vars)


def _as_vector(b: Optional[np.ndarray]) -> np.ndarray:
    if b is None:
        return np.zeros(0)
    return np.asarray(b, dtype=float).reshape(-1)


class DenseSimplexSolver:
    """Two-phase simplex method on a dense tableau.

    The tableau holds the constraint rows followed by the reduced cost row;
    its last column is the right hand side (for the cost row, minus the
    objective value).
    """

    def __init__(self,
                 eps: float = 1e-10,
                 max_iterations: int = 100_000,
                 degenerate_pivots: int = 50):
        self.eps = eps
        self.max_iterations = max_iterations
        self.degenerate_pivots = degenerate_pivots
        self._iterations = 0

    def solve(self, c, a_ub, b_ub, a_eq, b_eq) -> LinearProgramResult:
        num_vars = c.size
        num_ub, num_eq = b_ub.size, b_eq.size
        num_rows = num_ub + num_eq
        self._iterations = 0
        if num_rows == 0:
            if np.any(c < -self.eps):
                raise UnboundedProblemError("The objective is unbounded.")
            return LinearProgramResult(np.zeros(num_vars), 0.0, 0)

        # Standard form: one slack per inequality, then b >= 0.
        a = np.zeros((num_rows, num_vars + num_ub))
        a[:num_ub, :num_vars] = a_ub
        a[:num_ub, num_vars:] = np.eye(num_ub)
        a[num_ub:, :num_vars] = a_eq
        b = np.concatenate([b_ub, b_eq])
        flipped = b < 0
        a[flipped] *= -1
        b[flipped] *= -1

        # Slacks of unflipped inequalities start in the basis, all other rows
        # get an artificial variable.
        num_structural = num_vars + num_ub
        basis = np.empty(num_rows, dtype=int)
        needs_artificial = np.ones(num_rows, dtype=bool)
        for row in range(num_ub):
            if not flipped[row]:
                basis[row] = num_vars + row
                needs_artificial[row] = False
        artificial_rows = np.flatnonzero(needs_artificial)
        num_artificial = artificial_rows.size
        basis[artificial_rows] = num_structural + np.arange(num_artificial)

        tableau = np.zeros((num_rows + 1, num_structural + num_artificial + 1))
        tableau[:num_rows, :num_structural] = a
        tableau[artificial_rows, num_structural + np.arange(num_artificial)] = 1
        tableau[:num_rows, -1] = b

        if num_artificial:
            # Phase 1: minimize the sum of the artificial variables.
            tableau[-1, num_structural:-1] = 1
            tableau[-1] -= tableau[artificial_rows].sum(axis=0)
            self._run(tableau, basis, num_structural + num_artificial)
            infeasibility = -tableau[-1, -1]
            if infeasibility > 1e-8 * max(1.0, np.abs(b).max()):
                raise InfeasibleProblemError(
                    f"The constraints are infeasible (phase 1 objective "
                    f"{infeasibility:.3g}).")
            tableau, basis = self._drive_out_artificials(
                tableau, basis, num_structural)
            tableau = np.delete(
                tableau, np.s_[num_structural:num_structural + num_artificial],
                axis=1)

        # Phase 2.
        costs = np.zeros(num_structural)
        costs[:num_vars] = c
        tableau[-1] = 0
        tableau[-1, :num_structural] = costs
        tableau[-1] -= costs[basis] @ tableau[:-1]
        self._run(tableau, basis, num_structural)

        solution = np.zeros(num_structural)
        solution[basis] = tableau[:-1, -1]
        x = solution[:num_vars]
        return LinearProgramResult(x, float(c @ x), self._iterations)

    def _run(self, tableau: np.ndarray, basis: np.ndarray, num_columns: int):
        """Pivots until no column among the first num_columns improves.

        Dantzig's rule picks the most negative reduced cost. After
        degenerate_pivots pivots in a row without progress, Bland's rule takes
        over until the objective moves again.
        """
        stalled = 0
        while True:
            reduced_costs = tableau[-1, :num_columns]
            entering_candidates = np.flatnonzero(reduced_costs < -self.eps)
            if entering_candidates.size == 0:
                return
            if self._iterations >= self.max_iterations:
                raise IterationLimitError(
                    f"Simplex stopped after {self.max_iterations} pivots.")
            bland = stalled >= self.degenerate_pivots
            if bland:
                col = entering_candidates[0]
            else:
                col = entering_candidates[np.argmin(
                    reduced_costs[entering_candidates])]
            column = tableau[:-1, col]
            positive = column > self.eps
            if not np.any(positive):
                raise UnboundedProblemError("The objective is unbounded.")
            ratios = np.full(column.size, np.inf)
            ratios[positive] = tableau[:-1, -1][positive] / column[positive]
            min_ratio = ratios.min()
            ties = np.flatnonzero(ratios <= min_ratio + self.eps)
            if bland:
                row = ties[np.argmin(basis[ties])]
            else:
                row = ties[np.argmax(column[ties])]
            stalled = stalled + 1 if min_ratio <= self.eps else 0
            self._pivot(tableau, row, col)
            basis[row] = col
            self._iterations += 1
            rhs = tableau[:-1, -1]
            rhs[(rhs < 0) & (rhs > -self.eps)] = 0

    def _drive_out_artificials(self, tableau, basis, num_structural):
        """Removes artificial variables which stay basic at zero level."""
        redundant_rows = []
        for row in range(basis.size):
            if basis[row] < num_structural:
                continue
            candidates = np.flatnonzero(
                np.abs(tableau[row, :num_structural]) > self.eps)
            if candidates.size == 0:
                redundant_rows.append(row)
                continue
            self._pivot(tableau, row, candidates[0])
            basis[row] = candidates[0]
        if redundant_rows:
            tableau = np.delete(tableau, redundant_rows, axis=0)
            basis = np.delete(basis, redundant_rows)
        return tableau, basis

    @staticmethod
    def _pivot(tableau: np.ndarray, row: int, col: int):
        tableau[row] /= tableau[row, col]
        factors = tableau[:, col].copy()
        factors[row] = 0
        tableau -= np.outer(factors, tableau[row])


def _solve_with_highs(c, a_ub, b_ub, a_eq, b_eq) -> LinearProgramResult:
    result = optimize.linprog(c,
                              A_ub=a_ub if b_ub.size else None,
                              b_ub=b_ub if b_ub.size else None,
                              A_eq=a_eq if b_eq.size else None,
                              b_eq=b_eq if b_eq.size else None,
                              bounds=(0, None),
                              method="highs")
    if result.status == 2:
        raise InfeasibleProblemError(result.message)
    if result.status == 3:
        raise UnboundedProblemError(result.message)
    if result.status == 1:
        raise IterationLimitError(result.message)
    if result.status != 0:
        raise SolverError(result.message)
    return LinearProgramResult(np.asarray(result.x), float(result.fun),
                               int(result.nit))


def solve_linear_program(
        c: np.ndarray,
        a_ub: Optional[np.ndarray] = None,
        b_ub: Optional[np.ndarray] = None,
        a_eq: Optional[np.ndarray] = None,
        b_eq: Optional[np.ndarray] = None,
        method: LpMethod = LpMethod.DENSE_SIMPLEX) -> LinearProgramResult:
    """Solves min c^T x s.t. a_ub x <= b_ub, a_eq x = b_eq, x >= 0.

    Raises:
        InfeasibleProblemError, UnboundedProblemError, IterationLimitError.
    """
    c = _as_vector(c)
    a_ub, b_ub = _as_matrix(a_ub, c.size), _as_vector(b_ub)
    a_eq, b_eq = _as_matrix(a_eq, c.size), _as_vector(b_eq)
    if a_ub.shape[0] != b_ub.size or a_eq.shape[0] != b_eq.size:
        raise ValueError("solve_linear_program: constraint matrices and right "
                         "hand sides have inconsistent sizes.")
    if method == LpMethod.HIGHS:
        return _solve_with_highs(c, a_ub, b_ub, a_eq, b_eq)
    return DenseSimplexSolver().solve(c, a_ub, b_ub, a_eq, b_eq)
