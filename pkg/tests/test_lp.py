from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from contextua.lp import LinearProgram, LpSolution


def build(objective, rows, ops, rhs, sense="max"):
    lp = LinearProgram(sense)
    names = [f"x{i}" for i in range(len(objective))]
    for name, c in zip(names, objective):
        lp.add_variable(name, c)
    for row, op, b in zip(rows, ops, rhs):
        lp.add_constraint(dict(zip(names, row)), op, b)
    return lp, names


def scipy_solve(objective, rows, ops, rhs, sense):
    c = np.array([float(x) for x in objective])
    if sense == "max":
        c = -c
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for row, op, b in zip(rows, ops, rhs):
        fr = [float(x) for x in row]
        if op == "<=":
            a_ub.append(fr)
            b_ub.append(float(b))
        elif op == ">=":
            a_ub.append([-x for x in fr])
            b_ub.append(-float(b))
        else:
            a_eq.append(fr)
            b_eq.append(float(b))
    return linprog(
        c,
        A_ub=a_ub or None,
        b_ub=b_ub or None,
        A_eq=a_eq or None,
        b_eq=b_eq or None,
        bounds=(0, None),
        method="highs",
    )


small_lps = st.integers(min_value=1, max_value=3).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(-3, 3), min_size=n, max_size=n),
        st.lists(
            st.tuples(
                st.lists(st.integers(-4, 4), min_size=n, max_size=n),
                st.sampled_from(["<=", "=", ">="]),
                st.integers(-4, 6),
            ),
            min_size=0,
            max_size=4,
        ),
        st.sampled_from(["max", "min"]),
    )
)


@settings(max_examples=50)
@given(small_lps)
def test_agrees_with_scipy(case):
    objective, constraints, sense = case
    rows = [c[0] for c in constraints]
    ops = [c[1] for c in constraints]
    rhs = [c[2] for c in constraints]
    lp, names = build(objective, rows, ops, rhs, sense)
    ours = lp.solve()
    ref = scipy_solve(objective, rows, ops, rhs, sense)
    if ours.status == "optimal":
        assert ref.status == 0, f"scipy disagrees: {ref.status} vs optimal"
        want = -ref.fun if sense == "max" else ref.fun
        assert abs(float(ours.objective) - want) < 1e-7, (
            f"objective {ours.objective} vs scipy {want}"
        )
    elif ours.status == "infeasible":
        assert ref.status == 2
    else:
        assert ref.status == 3


@settings(max_examples=50)
@given(small_lps)
def test_optimal_assignments_satisfy_constraints_exactly(case):
    objective, constraints, sense = case
    rows = [c[0] for c in constraints]
    ops = [c[1] for c in constraints]
    rhs = [c[2] for c in constraints]
    lp, names = build(objective, rows, ops, rhs, sense)
    sol = lp.solve()
    if sol.status != "optimal":
        return
    x = [sol.assignment[n] for n in names]
    assert all(v >= 0 for v in x)
    recomputed = sum(F(c) * v for c, v in zip(objective, x))
    assert recomputed == sol.objective
    for row, op, b in zip(rows, ops, rhs):
        lhs = sum(F(a) * v for a, v in zip(row, x))
        if op == "<=":
            assert lhs <= b
        elif op == ">=":
            assert lhs >= b
        else:
            assert lhs == b


@settings(max_examples=50)
@given(small_lps)
def test_infeasibility_certificates_reverify(case):
    objective, constraints, sense = case
    rows = [c[0] for c in constraints]
    ops = [c[1] for c in constraints]
    rhs = [c[2] for c in constraints]
    lp, _ = build(objective, rows, ops, rhs, sense)
    sol = lp.solve()
    if sol.status != "infeasible":
        return
    assert sol.certificate is not None
    assert sol.certificate_checks()
    # independent recomputation of the two conditions
    cols = len(sol.eq_matrix[0])
    for j in range(cols):
        against = sum(y * row[j] for y, row in zip(sol.certificate, sol.eq_matrix))
        assert against >= 0, f"column {j} pairs to {against}"
    assert sum(y * b for y, b in zip(sol.certificate, sol.eq_rhs)) < 0


def test_hand_worked_vertex_optimum():
    # max x + y on x + 2y <= 4, 3x + y <= 6: corner at (8/5, 6/5)
    lp, _ = build([1, 1], [[1, 2], [3, 1]], ["<=", "<="], [4, 6])
    sol = lp.solve()
    assert sol.status == "optimal"
    assert sol.objective == F(14, 5)
    assert sol.assignment == {"x0": F(8, 5), "x1": F(6, 5)}


def test_equality_and_geq_mix():
    # min x + y on x + y >= 2, x - y = 1 touches (3/2, 1/2)
    lp, _ = build([1, 1], [[1, 1], [1, -1]], [">=", "="], [2, 1], sense="min")
    sol = lp.solve()
    assert sol.status == "optimal"
    assert sol.objective == 2
    assert sol.assignment["x0"] - sol.assignment["x1"] == 1


def test_unbounded_detected():
    lp, _ = build([1], [], [], [])
    assert lp.solve().status == "unbounded"
    lp2, _ = build([1, 0], [[-1, 1]], ["<="], [1])
    assert lp2.solve().status == "unbounded"


def test_empty_program_optimum_zero():
    lp, _ = build([-1, -2], [], [], [])
    sol = lp.solve()
    assert sol.status == "optimal"
    assert sol.objective == 0
    assert sol.assignment == {"x0": 0, "x1": 0}


def test_infeasible_simple():
    lp, _ = build([1], [[1], [1]], ["<=", ">="], [1, 2])
    sol = lp.solve()
    assert sol.status == "infeasible"
    assert sol.certificate_checks()


def test_redundant_rows_are_harmless():
    lp, _ = build(
        [1, 1],
        [[1, 1], [2, 2], [1, 0]],
        ["=", "=", "<="],
        [1, 2, 1],
    )
    sol = lp.solve()
    assert sol.status == "optimal"
    assert sol.objective == 1


def test_degenerate_cycling_instance_terminates():
    # the classic cycling instance for naive pivoting; Bland's rule must
    # terminate at value -1/20 with x = (1/25, 0, 1, 0)
    lp, _ = build(
        [F(-3, 4), 150, F(-1, 50), 6],
        [
            [F(1, 4), -60, F(-1, 25), 9],
            [F(1, 2), -90, F(-1, 50), 3],
            [0, 0, 1, 0],
        ],
        ["<=", "<=", "<="],
        [0, 0, 1],
        sense="min",
    )
    sol = lp.solve()
    assert sol.status == "optimal"
    assert sol.objective == F(-1, 20)
    assert sol.assignment["x2"] == 1


def test_exact_rational_data_stays_exact():
    lp = LinearProgram("max")
    lp.add_variable("a", F(1, 3))
    lp.add_variable("b", F(1, 7))
    lp.add_constraint({"a": F(2, 5), "b": 1}, "<=", F(3, 11))
    sol = lp.solve()
    assert sol.status == "optimal"
    # optimum puts everything on the better ratio: a = (3/11)/(2/5) = 15/22
    assert sol.assignment["a"] == F(15, 22)
    assert sol.objective == F(1, 3) * F(15, 22)


def test_builder_validation():
    lp = LinearProgram("max")
    lp.add_variable("x")
    with pytest.raises(ValueError):
        lp.add_variable("x")
    with pytest.raises(ValueError):
        lp.add_constraint({"y": 1}, "<=", 1)
    with pytest.raises(ValueError):
        lp.add_constraint({"x": 1}, "<", 1)
    with pytest.raises(ValueError):
        LinearProgram("maximize")


def test_solution_bookkeeping_fields():
    lp, _ = build([1], [[1]], ["<="], [1])
    sol = lp.solve()
    assert isinstance(sol, LpSolution)
    assert sol.eq_matrix is not None and sol.eq_rhs is not None
    # one declared variable plus one slack column
    assert len(sol.eq_matrix[0]) == 2
