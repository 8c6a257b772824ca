"""Solver-agnostic linear programs with a reference simplex implementation.

The problem container is deliberately tiny: nonnegative (boxed) variables, a
sparse minimization objective, and sparse ``=`` / ``<=`` constraints.  Two
backends ship with the package:

  * ``reference``: a revised simplex written here (two phases, dense numpy
    basis handling, Bland's anti-cycling rule once degeneracy is detected),
    suitable for desk-scale instances and used to cross-check the other
    backend;
  * ``scipy``: scipy.optimize.linprog with the HiGHS engine, the default for
    larger instances.  ``external`` is accepted as an alias so callers can
    swap in an industrial solver via register_backend without code changes.

Problems can be dumped to the fixed LP text format for external debugging.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
import scipy.optimize
import scipy.sparse


class LpError(ValueError):
    """Raised for malformed problems or misused solver APIs."""


@dataclass
class LpOptions:
    tolerance: float = 1e-9  # primal feasibility
    optimality_tolerance: float = 1e-7
    max_iterations: int = 100_000
    backend: str = "scipy"


#: relative slack applied to the primary optimum in lexicographic solves
DEFAULT_LEXICO_SLACK = 1e-9


@dataclass
class LpProblem:
    """Minimization LP with sparse rows; variables default to [0, +inf)."""

    name: str = "lp"
    var_names: list[str] = field(default_factory=list)
    lower: list[float] = field(default_factory=list)
    upper: list[float] = field(default_factory=list)
    objective: dict[int, float] = field(default_factory=dict)
    # each constraint: (coeffs, sense, rhs, name) with sense in {"=", "<="}
    constraints: list[tuple[dict[int, float], str, float, str]] = field(default_factory=list)

    @property
    def n_variables(self) -> int:
        return len(self.var_names)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    def add_variable(self, name: str, lower: float = 0.0, upper: float = math.inf) -> int:
        if lower < 0:
            raise LpError(f"variable {name!r}: lower bound must be >= 0")
        if upper < lower:
            raise LpError(f"variable {name!r}: empty bound interval")
        self.var_names.append(name)
        self.lower.append(lower)
        self.upper.append(upper)
        return len(self.var_names) - 1

    def set_objective(self, coeffs: Mapping[int, float]) -> None:
        self.objective = {int(i): float(c) for i, c in coeffs.items() if c != 0.0}

    def add_constraint(
        self, coeffs: Mapping[int, float], sense: str, rhs: float, name: str = ""
    ) -> int:
        if sense not in ("=", "<="):
            raise LpError(f"unsupported sense {sense!r}")
        row = {int(i): float(c) for i, c in coeffs.items() if c != 0.0}
        self.constraints.append((row, sense, float(rhs), name or f"c{len(self.constraints)}"))
        return len(self.constraints) - 1

    def validate(self) -> None:
        n = self.n_variables
        for i, c in self.objective.items():
            if not (0 <= i < n):
                raise LpError(f"objective references unknown variable index {i}")
            if not math.isfinite(c):
                raise LpError("objective has non-finite coefficient")
        for row, _sense, rhs, cname in self.constraints:
            if not math.isfinite(rhs):
                raise LpError(f"constraint {cname}: non-finite rhs")
            for i, c in row.items():
                if not (0 <= i < n):
                    raise LpError(f"constraint {cname}: unknown variable index {i}")
                if not math.isfinite(c):
                    raise LpError(f"constraint {cname}: non-finite coefficient")

    def copy(self) -> "LpProblem":
        return LpProblem(
            name=self.name,
            var_names=list(self.var_names),
            lower=list(self.lower),
            upper=list(self.upper),
            objective=dict(self.objective),
            constraints=[(dict(r), s, rhs, nm) for r, s, rhs, nm in self.constraints],
        )

    def objective_value(self, x: np.ndarray) -> float:
        return float(sum(c * x[i] for i, c in self.objective.items()))

    def max_residual(self, x: np.ndarray) -> float:
        """Largest constraint/bound violation at x."""
        worst = 0.0
        for i in range(self.n_variables):
            worst = max(worst, self.lower[i] - x[i], x[i] - self.upper[i])
        for row, sense, rhs, _ in self.constraints:
            lhs = sum(c * x[i] for i, c in row.items())
            if sense == "=":
                worst = max(worst, abs(lhs - rhs))
            else:
                worst = max(worst, lhs - rhs)
        return float(worst)

    def to_lp_format(self) -> str:
        """Render in the fixed LP text format (CPLEX dialect)."""

        def term(c: float, name: str) -> str:
            sign = "-" if c < 0 else "+"
            return f"{sign} {abs(c):.17g} {name}"

        lines = [f"\\ Problem: {self.name}", "Minimize", " obj:"]
        if self.objective:
            body = " ".join(term(c, self.var_names[i]) for i, c in sorted(self.objective.items()))
            lines[-1] += " " + body.lstrip("+ ")
        else:
            lines[-1] += " 0 " + (self.var_names[0] if self.var_names else "x0")
        lines.append("Subject To")
        for row, sense, rhs, cname in self.constraints:
            body = " ".join(term(c, self.var_names[i]) for i, c in sorted(row.items()))
            op = "=" if sense == "=" else "<="
            lines.append(f" {cname}: {body.lstrip('+ ')} {op} {rhs:.17g}")
        lines.append("Bounds")
        for i, name in enumerate(self.var_names):
            lo, hi = self.lower[i], self.upper[i]
            if math.isinf(hi):
                if lo != 0.0:
                    lines.append(f" {name} >= {lo:.17g}")
                else:
                    lines.append(f" 0 <= {name}")
            else:
                lines.append(f" {lo:.17g} <= {name} <= {hi:.17g}")
        lines.append("End")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LpSolution:
    status: str  # optimal | infeasible | unbounded | iteration_limit | error
    objective: float | None
    x: np.ndarray | None
    max_primal_residual: float | None
    duals: np.ndarray | None = None  # row multipliers (reference backend)
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def value(self, index: int) -> float:
        if self.x is None:
            raise LpError("no solution values available")
        return float(self.x[index])


# ---------------------------------------------------------------------------
# Reference backend: two-phase revised simplex
# ---------------------------------------------------------------------------


class _Simplex:
    """Dense two-phase simplex on the standard form min c'x, Ax = b, x >= 0.

    The basis inverse is kept explicitly and updated with rank-1 pivots,
    refactorized periodically for stability.  Dantzig pricing by default;
    Bland's rule takes over after a run of degenerate pivots to rule out
    cycling.
    """

    DEGENERATE_STREAK = 40
    REFACTOR_EVERY = 60

    def __init__(self, A: np.ndarray, b: np.ndarray, c: np.ndarray, options: LpOptions):
        self.A = A
        self.b = b
        self.c = c
        self.m, self.n = A.shape
        self.opt = options
        self.iterations = 0

    def solve(self) -> tuple[str, np.ndarray | None, np.ndarray | None]:
        """Returns (status, x over original columns, duals per original row)."""
        m, n = self.m, self.n
        # Phase 1: artificial variables form the initial identity basis.
        A1 = np.hstack([self.A, np.eye(m)])
        c1 = np.concatenate([np.zeros(n), np.ones(m)])
        basis = list(range(n, n + m))
        status, basis = self._iterate(A1, self.b, c1, basis)
        if status != "optimal":
            return status, None, None
        xB = np.linalg.solve(A1[:, basis], self.b) if m else np.zeros(0)
        phase1_obj = float(c1[basis] @ xB)
        scale = 1.0 + (float(np.abs(self.b).max()) if m else 0.0)
        if phase1_obj > max(self.opt.tolerance, 1e-7) * scale:
            return "infeasible", None, None
        A2, b2, basis, keep_rows = self._drop_artificials(A1, basis, n)
        status, basis = self._iterate(A2, b2, self.c, basis)
        if status != "optimal":
            return status, None, None
        x = np.zeros(n)
        if basis:
            x[basis] = np.linalg.solve(A2[:, basis], b2)
            y_kept = np.linalg.solve(A2[:, basis].T, self.c[basis])
        else:
            y_kept = np.zeros(0)
        duals = np.zeros(m)
        duals[keep_rows] = y_kept
        return "optimal", x, duals

    def _drop_artificials(
        self, A1: np.ndarray, basis: list[int], n: int
    ) -> tuple[np.ndarray, np.ndarray, list[int], list[int]]:
        """Pivot zero-level artificials out; rows where none of the original
        columns can replace them are redundant and dropped."""
        m = self.m
        if all(idx < n for idx in basis):
            return self.A, self.b, basis, list(range(m))
        Binv = np.linalg.inv(A1[:, basis])
        in_basis = set(basis)
        for pos in range(m):
            if basis[pos] < n:
                continue
            row = Binv[pos] @ A1[:, :n]
            candidates = [int(p) for p in np.nonzero(np.abs(row) > 1e-9)[0] if p not in in_basis]
            if not candidates:
                continue  # redundant row, removed below
            enter = candidates[0]
            d = Binv @ A1[:, enter]
            pivot = d[pos]
            Binv[pos] /= pivot
            for r in range(m):
                if r != pos and d[r] != 0.0:
                    Binv[r] -= d[r] * Binv[pos]
            in_basis.discard(basis[pos])
            in_basis.add(enter)
            basis[pos] = enter
        keep_rows = [p for p in range(m) if basis[p] < n]
        new_basis = [basis[p] for p in keep_rows]
        return self.A[keep_rows, :], self.b[keep_rows], new_basis, keep_rows

    def _iterate(
        self, A: np.ndarray, b: np.ndarray, c: np.ndarray, basis: list[int]
    ) -> tuple[str, list[int]]:
        m = A.shape[0]
        if m == 0:
            # no rows: optimal iff no improving ray exists
            if any(c[i] < -self.opt.optimality_tolerance for i in range(A.shape[1])):
                return "unbounded", basis
            return "optimal", basis
        Binv = np.linalg.inv(A[:, basis])
        bland = False
        degenerate_streak = 0
        since_refactor = 0
        opt_tol = self.opt.optimality_tolerance
        while True:
            if self.iterations >= self.opt.max_iterations:
                return "iteration_limit", basis
            self.iterations += 1
            since_refactor += 1
            if since_refactor >= self.REFACTOR_EVERY:
                Binv = np.linalg.inv(A[:, basis])
                since_refactor = 0
            xB = Binv @ b
            y = c[basis] @ Binv
            reduced = c - y @ A
            reduced[basis] = 0.0
            if bland:
                entering_candidates = np.nonzero(reduced < -opt_tol)[0]
                if entering_candidates.size == 0:
                    return "optimal", basis
                enter = int(entering_candidates[0])
            else:
                enter = int(np.argmin(reduced))
                if reduced[enter] >= -opt_tol:
                    return "optimal", basis
            d = Binv @ A[:, enter]
            positive = d > 1e-11
            if not positive.any():
                return "unbounded", basis
            ratios = np.full(m, np.inf)
            ratios[positive] = xB[positive] / d[positive]
            theta = ratios.min()
            if bland:
                # smallest basic variable index among the ties
                tie_rows = np.nonzero(ratios <= theta + 1e-12)[0]
                leave_row = min(tie_rows, key=lambda r: basis[r])
            else:
                leave_row = int(np.argmin(ratios))
            if theta <= 1e-11:
                degenerate_streak += 1
                if degenerate_streak >= self.DEGENERATE_STREAK:
                    bland = True
            else:
                degenerate_streak = 0
                bland = False
            # rank-1 update of the basis inverse
            pivot = d[leave_row]
            Binv[leave_row] /= pivot
            for r in range(m):
                if r != leave_row and d[r] != 0.0:
                    Binv[r] -= d[r] * Binv[leave_row]
            basis[leave_row] = enter


def _to_standard_form(
    problem: LpProblem,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[int], int]:
    """Shift lower bounds out, add rows for finite upper bounds and slacks.

    Returns (A, b, c, row_signs, n_original); row_signs[i] is +-1 recording
    rhs sign flips so duals can be mapped back.
    """
    n = problem.n_variables
    lower = np.array(problem.lower)
    c_orig = np.zeros(n)
    for i, coef in problem.objective.items():
        c_orig[i] = coef

    rows: list[dict[int, float]] = []
    senses: list[str] = []
    rhs: list[float] = []
    for row, sense, r, _ in problem.constraints:
        shifted = r - sum(coef * lower[i] for i, coef in row.items())
        rows.append(dict(row))
        senses.append(sense)
        rhs.append(shifted)
    for i in range(n):
        if math.isfinite(problem.upper[i]):
            rows.append({i: 1.0})
            senses.append("<=")
            rhs.append(problem.upper[i] - lower[i])

    m = len(rows)
    n_slack = sum(1 for s in senses if s == "<=")
    A = np.zeros((m, n + n_slack))
    b = np.zeros(m)
    c = np.concatenate([c_orig, np.zeros(n_slack)])
    slack_at = n
    row_signs = [1] * m
    for r_idx, (row, sense, rv) in enumerate(zip(rows, senses, rhs)):
        for i, coef in row.items():
            A[r_idx, i] = coef
        if sense == "<=":
            A[r_idx, slack_at] = 1.0
            slack_at += 1
        b[r_idx] = rv
        if b[r_idx] < 0:
            A[r_idx] *= -1.0
            b[r_idx] *= -1.0
            row_signs[r_idx] = -1
    return A, b, c, row_signs, n


def _solve_reference(problem: LpProblem, options: LpOptions) -> LpSolution:
    problem.validate()
    A, b, c, row_signs, n = _to_standard_form(problem)
    simplex = _Simplex(A, b, c, options)
    status, x_std, duals = simplex.solve()
    if status != "optimal":
        return LpSolution(status, None, None, None, iterations=simplex.iterations)
    x = x_std[:n] + np.array(problem.lower)
    # undo rhs sign flips; drop rows added for upper bounds
    y = None
    if duals is not None:
        y = np.array([duals[i] * row_signs[i] for i in range(len(row_signs))])
        y = y[: problem.n_constraints]
    return LpSolution(
        status="optimal",
        objective=problem.objective_value(x),
        x=x,
        max_primal_residual=problem.max_residual(x),
        duals=y,
        iterations=simplex.iterations,
    )


def dual_certificate_gap(problem: LpProblem, solution: LpSolution) -> float:
    """Weak-duality certificate from the reference solver's row multipliers.

    Checks that the multipliers are dual feasible (nonpositive on <= rows,
    reduced costs >= 0 taking bounds into account) and returns the absolute
    gap |c'x - dual objective|.  Raises LpError if the certificate fails.
    """
    if solution.duals is None or solution.x is None:
        raise LpError("solution carries no dual multipliers")
    y = solution.duals
    n = problem.n_variables
    tol = 1e-6 * (1.0 + abs(solution.objective or 0.0))
    dual_obj = 0.0
    col_dual = np.zeros(n)
    for r_idx, (row, sense, rhs, _) in enumerate(problem.constraints):
        if sense == "<=" and y[r_idx] > 1e-7:
            raise LpError(f"dual multiplier of <= row {r_idx} is positive: {y[r_idx]}")
        dual_obj += y[r_idx] * rhs
        for i, coef in row.items():
            col_dual[i] += y[r_idx] * coef
    for i in range(n):
        c_i = problem.objective.get(i, 0.0)
        reduced = c_i - col_dual[i]
        if math.isinf(problem.upper[i]):
            if reduced < -1e-6:
                raise LpError(f"reduced cost of variable {i} negative: {reduced}")
            dual_obj += max(reduced, 0.0) * problem.lower[i]
        else:
            # boxed variable: the binding bound absorbs either sign
            dual_obj += reduced * (problem.lower[i] if reduced >= 0 else problem.upper[i])
    gap = abs((solution.objective or 0.0) - dual_obj)
    if gap > tol:
        raise LpError(f"duality gap {gap} exceeds tolerance {tol}")
    return gap


# ---------------------------------------------------------------------------
# scipy backend
# ---------------------------------------------------------------------------


def _solve_scipy(problem: LpProblem, options: LpOptions) -> LpSolution:
    problem.validate()
    n = problem.n_variables
    c = np.zeros(n)
    for i, coef in problem.objective.items():
        c[i] = coef
    eq_rows, eq_rhs, ub_rows, ub_rhs = [], [], [], []
    for row, sense, rhs, _ in problem.constraints:
        if sense == "=":
            eq_rows.append(row)
            eq_rhs.append(rhs)
        else:
            ub_rows.append(row)
            ub_rhs.append(rhs)

    def sparse(rows: list[dict[int, float]]):
        data, ri, ci = [], [], []
        for k, row in enumerate(rows):
            for i, coef in row.items():
                ri.append(k)
                ci.append(i)
                data.append(coef)
        return scipy.sparse.csr_matrix((data, (ri, ci)), shape=(len(rows), n))

    res = scipy.optimize.linprog(
        c,
        A_ub=sparse(ub_rows) if ub_rows else None,
        b_ub=np.array(ub_rhs) if ub_rhs else None,
        A_eq=sparse(eq_rows) if eq_rows else None,
        b_eq=np.array(eq_rhs) if eq_rhs else None,
        bounds=list(zip(problem.lower, [None if math.isinf(u) else u for u in problem.upper])),
        method="highs",
        options={
            "primal_feasibility_tolerance": min(options.tolerance, 1e-9),
            "dual_feasibility_tolerance": min(options.optimality_tolerance, 1e-9),
        },
    )
    status = {0: "optimal", 1: "iteration_limit", 2: "infeasible", 3: "unbounded"}.get(
        res.status, "error"
    )
    if status != "optimal":
        return LpSolution(status, None, None, None, iterations=int(getattr(res, "nit", 0)))
    x = np.asarray(res.x)
    return LpSolution(
        status="optimal",
        objective=problem.objective_value(x),
        x=x,
        max_primal_residual=problem.max_residual(x),
        iterations=int(getattr(res, "nit", 0)),
    )


# ---------------------------------------------------------------------------
# Backend registry and entry points
# ---------------------------------------------------------------------------

Backend = Callable[[LpProblem, LpOptions], LpSolution]

_BACKENDS: dict[str, Backend] = {
    "reference": _solve_reference,
    "scipy": _solve_scipy,
    "external": _solve_scipy,  # shipped implementation of the external-solver interface
}


def register_backend(name: str, backend: Backend) -> None:
    _BACKENDS[name] = backend


def solve(problem: LpProblem, options: LpOptions | None = None) -> LpSolution:
    options = options or LpOptions()
    try:
        backend = _BACKENDS[options.backend]
    except KeyError:
        raise LpError(f"unknown backend {options.backend!r}") from None
    return backend(problem, options)


def solve_lexicographic(
    problem_primary: LpProblem,
    objective_secondary: Mapping[int, float],
    slack: float = DEFAULT_LEXICO_SLACK,
    options: LpOptions | None = None,
) -> tuple[LpSolution, LpSolution]:
    """Minimize the primary objective, then the secondary one subject to the
    primary staying within ``slack`` (relative) of its optimum.

    Returns (primary_solution, secondary_solution).
    """
    options = options or LpOptions()
    primary = solve(problem_primary, options)
    if not primary.optimal:
        return primary, primary
    second = problem_primary.copy()
    second.name = problem_primary.name + "+secondary"
    cap = primary.objective + slack * max(1.0, abs(primary.objective))
    second.add_constraint(dict(problem_primary.objective), "<=", cap, "primary_cap")
    second.set_objective(objective_secondary)
    secondary = solve(second, options)
    return primary, secondary
