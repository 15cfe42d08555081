"""Problem model: encodings, costs, feasibility, generation, oracle, sorting."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpsopt.errors import EncodingError, OracleBudgetError
from mpsopt.knapsack import (KnapsackInstance, PenaltyConfig, brute_force_solve,
                             cost_binary, cost_integer, cost_integer_batch,
                             default_penalty, generate_instance, is_feasible,
                             sort_heuristic, to_binary, to_integer, total_value,
                             unsort_assignment)

PEN = PenaltyConfig(1000.0)


def table_instance():
    """Two objects, two knapsacks, costs c(x) = -3x11 - x12 - x21 - 5x22 with
    capacities so large the penalty never fires."""
    return KnapsackInstance(
        n_objects=2, n_knapsacks=2,
        values=np.array([[3, 1], [1, 5]]),
        weights=np.array([1, 1]),
        capacities=np.array([100, 100]),
    )


def scalar_cost_reference(inst, x, pen):
    """Straight-line scalar re-implementation of the binary cost."""
    total = 0.0
    for j in range(inst.n_knapsacks):
        load = sum(int(inst.weights[i]) * int(x[i][j])
                   for i in range(inst.n_objects))
        total += pen.coefficient * max(0, load - int(inst.capacities[j]))
    for i in range(inst.n_objects):
        for j in range(inst.n_knapsacks):
            total -= int(inst.values[i][j]) * int(x[i][j])
    return total


class TestCosts:
    def test_all_zeros_binary(self):
        assert cost_binary(table_instance(), np.zeros((2, 2)), PEN) == 0.0

    def test_selection_table_rows(self):
        inst = table_instance()
        assert cost_binary(inst, [[1, 0], [0, 1]], PEN) == -8.0
        assert cost_binary(inst, [[1, 1], [1, 1]], PEN) == -10.0

    def test_matches_scalar_reference(self):
        rng = np.random.default_rng(0)
        inst = generate_instance(4, 3, seed=1)
        pen = default_penalty(inst)
        for _ in range(20):
            x = rng.integers(0, 2, size=(4, 3))
            assert cost_binary(inst, x, pen) == pytest.approx(
                scalar_cost_reference(inst, x, pen))

    def test_single_object_integer(self):
        inst = KnapsackInstance(1, 1, values=[[7]], weights=[1], capacities=[1])
        assert cost_integer(inst, [1], PEN) == -7.0

    def test_worked_integer_example(self):
        inst = generate_instance(2, 3, seed=2)
        pen = default_penalty(inst)
        y = np.array([2, 3])
        x = [[0, 1, 0], [0, 0, 1]]
        assert cost_integer(inst, y, pen) == cost_binary(inst, x, pen)

    def test_encoding_equivalence_exhaustive(self):
        for n, m, seed in [(4, 3, 3), (3, 2, 4)]:
            inst = generate_instance(n, m, seed=seed)
            pen = default_penalty(inst)
            for idx in range(m ** n):
                y = np.array([(idx // m**i) % m + 1 for i in range(n)])
                assert cost_integer(inst, y, pen) == pytest.approx(
                    cost_binary(inst, to_binary(y, m), pen))

    def test_batch_matches_scalar(self):
        inst = generate_instance(5, 3, seed=5)
        pen = default_penalty(inst)
        ys = np.random.default_rng(6).integers(1, 4, size=(20, 5))
        batch = cost_integer_batch(inst, ys, pen)
        for y, c in zip(ys, batch):
            assert c == pytest.approx(cost_integer(inst, y, pen))

    def test_penalty_dominance(self):
        inst = generate_instance(3, 2, seed=7)
        pen = default_penalty(inst)
        feasible, infeasible = [], []
        for idx in range(2 ** 3):
            y = np.array([(idx >> i) % 2 + 1 for i in range(3)])
            c = cost_integer(inst, y, pen)
            (feasible if is_feasible(inst, y)[1] else infeasible).append(c)
        if feasible and infeasible:
            assert min(infeasible) > max(feasible)


class TestEncodings:
    def test_to_binary_worked(self):
        assert np.array_equal(to_binary([2, 3], 3), [[0, 1, 0], [0, 0, 1]])

    def test_round_trip(self):
        rng = np.random.default_rng(8)
        y = rng.integers(1, 5, size=10)
        assert np.array_equal(to_integer(to_binary(y, 4)), y)

    def test_zero_row_rejected(self):
        with pytest.raises(EncodingError):
            to_integer([[1, 0], [0, 0]])

    def test_two_hot_row_rejected(self):
        with pytest.raises(EncodingError):
            to_integer([[1, 1]])


class TestFeasibility:
    def test_witness_is_feasible(self):
        inst = generate_instance(5, 3, seed=9)
        assert is_feasible(inst, inst.witness) == (True, True)

    def test_overloaded_single(self):
        inst = KnapsackInstance(1, 1, values=[[1]], weights=[2], capacities=[1])
        assert is_feasible(inst, [1]) == (True, False)

    def test_binary_equality_violation(self):
        inst = table_instance()
        eq, _ = is_feasible(inst, [[1, 1], [0, 0]])
        assert eq is False


class TestGeneration:
    def test_seed_determinism_bytes(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        generate_instance(4, 2, seed=10).save_json(a)
        generate_instance(4, 2, seed=10).save_json(b)
        assert a.read_bytes() == b.read_bytes()

    def test_oracle_not_worse_than_witness(self):
        inst = generate_instance(7, 2, seed=11)
        pen = default_penalty(inst)
        assert inst.known_optimal_cost <= cost_integer(inst, inst.witness, pen)

    def test_json_round_trip(self, tmp_path):
        inst = generate_instance(3, 3, seed=12)
        path = tmp_path / "inst.json"
        inst.save_json(path)
        back = KnapsackInstance.load_json(path)
        assert back.to_json_dict() == inst.to_json_dict()


class TestOracle:
    def test_single_object_argmax(self):
        inst = KnapsackInstance(1, 3, values=[[2, 9, 4]], weights=[1],
                                capacities=[1, 1, 1])
        y, c = brute_force_solve(inst, PEN)
        assert list(y) == [2] and c == -9.0

    def test_hand_instance(self):
        inst = KnapsackInstance(2, 2, values=[[3, 1], [1, 5]], weights=[1, 1],
                                capacities=[1, 1])
        y, c = brute_force_solve(inst, PEN)
        assert list(y) == [1, 2] and c == -8.0

    def test_beats_random_sampling(self):
        inst = generate_instance(6, 3, seed=13)
        pen = default_penalty(inst)
        _, best = brute_force_solve(inst, pen)
        ys = np.random.default_rng(14).integers(1, 4, size=(1000, 6))
        assert best <= cost_integer_batch(inst, ys, pen).min()

    def test_budget_enforced(self):
        inst = generate_instance(4, 3, seed=15)
        with pytest.raises(OracleBudgetError):
            brute_force_solve(inst, PEN, budget=10)

    def test_matches_independent_enumeration(self):
        for seed in range(5):
            inst = generate_instance(4, 2, seed=seed)
            pen = default_penalty(inst)
            _, best = brute_force_solve(inst, pen)
            ref = min(cost_integer(inst,
                                   [(idx >> i) % 2 + 1 for i in range(4)], pen)
                      for idx in range(16))
            assert best == pytest.approx(ref)

    def test_lexicographic_tie_break(self):
        inst = KnapsackInstance(2, 2, values=[[1, 1], [1, 1]], weights=[1, 1],
                                capacities=[10, 10])
        y, _ = brute_force_solve(inst, PEN)
        assert list(y) == [1, 1]


class TestSortHeuristic:
    def test_already_sorted_identity(self):
        inst = KnapsackInstance(2, 2, values=[[1, 2], [3, 4]], weights=[5, 3],
                                capacities=[9, 7])
        s, op, kp = sort_heuristic(inst)
        assert np.array_equal(op, [0, 1]) and np.array_equal(kp, [0, 1])
        assert np.array_equal(s.weights, inst.weights)

    def test_weights_non_increasing(self):
        inst = generate_instance(6, 3, seed=16)
        s, _, _ = sort_heuristic(inst)
        assert np.all(np.diff(s.weights) <= 0)
        assert np.all(np.diff(s.capacities) <= 0)

    def test_optimum_invariant(self):
        inst = generate_instance(5, 3, seed=17)
        pen = default_penalty(inst)
        _, best = brute_force_solve(inst, pen)
        s, op, kp = sort_heuristic(inst)
        y_sorted, best_sorted = brute_force_solve(s, pen)
        assert best_sorted == pytest.approx(best)
        y_back = unsort_assignment(y_sorted, op, kp)
        assert cost_integer(inst, y_back, pen) == pytest.approx(best)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(1, 4), st.integers(0, 2**31 - 1))
def test_generated_instances_have_feasible_witness(n, m, seed):
    inst = generate_instance(n, m, seed=seed, oracle_budget=0)
    assert is_feasible(inst, inst.witness) == (True, True)
    assert total_value(inst, inst.witness) > 0
