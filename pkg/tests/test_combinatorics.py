"""Tests for binomials, revolving-door listings and window sequences."""

import unittest
from importlib import import_module
from itertools import pairwise

combinatorics = import_module("src.combinatorics")
toolkit_config = import_module("src.toolkit_config")
BudgetExhausted = toolkit_config.BudgetExhausted
Infeasible = combinatorics.Infeasible
KSubset = combinatorics.KSubset
Overflow = combinatorics.Overflow
WindowSequence = combinatorics.WindowSequence
binomial = combinatorics.binomial
cyclic_obstruction = combinatorics.cyclic_obstruction
k_subsets = combinatorics.k_subsets
revolving_door = combinatorics.revolving_door
verify_window_property = combinatorics.verify_window_property
window_sequence = combinatorics.window_sequence


def _pascal(n: int, k: int) -> int:
    row = [1]
    for _ in range(n):
        row = [a + b for a, b in zip([0] + row, row + [0], strict=True)]
    return row[k]


class BinomialTests(unittest.TestCase):
    def test_small_values(self) -> None:
        self.assertEqual(binomial(5, 2), 10)
        self.assertEqual(binomial(9, 0), 1)
        self.assertEqual(binomial(30, 15), 155117520)

    def test_matches_pascal_triangle(self) -> None:
        for n in range(0, 25):
            for k in range(0, n + 1):
                self.assertEqual(binomial(n, k), _pascal(n, k))

    def test_out_of_range_arguments(self) -> None:
        with self.assertRaises(ValueError):
            binomial(3, 4)
        with self.assertRaises(ValueError):
            binomial(3, -1)

    def test_overflow_beyond_checked_range(self) -> None:
        with self.assertRaises(Overflow):
            binomial(100, 50)
        self.assertLess(binomial(66, 33), 2**63)


class RevolvingDoorTests(unittest.TestCase):
    def _assert_gray_code(self, n: int, k: int) -> None:
        listing = revolving_door(n, k)
        self.assertEqual(
            sorted(s.elements for s in listing),
            [s.elements for s in k_subsets(n, k)],
        )
        for a, b in pairwise(listing):
            self.assertEqual(len(set(a) & set(b)), k - 1, f"{a} -> {b}")

    def test_three_choose_two(self) -> None:
        self._assert_gray_code(3, 2)
        self.assertEqual(len(revolving_door(3, 2)), 3)

    def test_four_choose_two(self) -> None:
        self._assert_gray_code(4, 2)
        self.assertEqual(len(revolving_door(4, 2)), 6)

    def test_full_set(self) -> None:
        self.assertEqual(revolving_door(5, 5), [KSubset((1, 2, 3, 4, 5))])

    def test_adjacent_swaps_for_all_small_shapes(self) -> None:
        for n in range(1, 9):
            for k in range(1, n + 1):
                self._assert_gray_code(n, k)

    def test_rejects_empty_subsets(self) -> None:
        with self.assertRaises(ValueError):
            revolving_door(4, 0)


class WindowPropertyTests(unittest.TestCase):
    def test_distinct_windows_pass(self) -> None:
        self.assertEqual(
            verify_window_property(WindowSequence((1, 2, 3), 2, False)), (True, None)
        )

    def test_duplicate_window_fails(self) -> None:
        ok, violation = verify_window_property(WindowSequence((1, 2, 1), 2, False))
        self.assertFalse(ok)
        self.assertIn("equals window 0", violation)

    def test_repeated_symbol_fails(self) -> None:
        ok, violation = verify_window_property(WindowSequence((1, 1, 2), 2, False))
        self.assertFalse(ok)
        self.assertIn("repeats a symbol", violation)

    def test_eulerian_circuit_of_k5(self) -> None:
        sequence = WindowSequence((1, 2, 3, 4, 5, 1, 3, 5, 2, 4), 2, True)
        self.assertEqual(verify_window_property(sequence), (True, None))
        self.assertEqual(
            set(sequence.windows()),
            {frozenset(s.elements) for s in k_subsets(5, 2)},
        )

    def test_wrap_around_windows_are_checked(self) -> None:
        ok, _ = verify_window_property(WindowSequence((1, 2, 3, 1), 2, True))
        self.assertFalse(ok)


class WindowSequenceTests(unittest.TestCase):
    def test_cyclic_sequence_over_all_pairs_of_five(self) -> None:
        sequence = window_sequence(5, 2, 10, cyclic=True)
        self.assertEqual(len(sequence.symbols), 10)
        self.assertEqual(verify_window_property(sequence), (True, None))
        self.assertEqual(
            set(sequence.windows()),
            {frozenset(s.elements) for s in k_subsets(5, 2)},
        )

    def test_cyclic_pairs_of_four_are_infeasible_by_divisibility(self) -> None:
        with self.assertRaises(Infeasible) as ctx:
            window_sequence(4, 2, 6, cyclic=True)
        self.assertIn("does not divide", ctx.exception.certificate)
        self.assertIsNotNone(cyclic_obstruction(4, 2))
        self.assertIsNone(cyclic_obstruction(5, 2))

    def test_cyclic_pairs_of_four_are_infeasible_by_search(self) -> None:
        with self.assertRaises(Infeasible) as ctx:
            window_sequence(4, 2, 6, cyclic=True, precheck=False)
        self.assertIn("exhaustive search", ctx.exception.certificate)

    def test_acyclic_prefix_of_four_choose_two(self) -> None:
        sequence = window_sequence(4, 2, 5, cyclic=False)
        self.assertEqual(len(sequence.symbols), 6)
        self.assertEqual(sequence.window_count, 5)
        self.assertEqual(verify_window_property(sequence), (True, None))

    def test_acyclic_sequences_for_growing_m(self) -> None:
        for n, k, top in ((4, 2, 5), (5, 2, 10), (6, 3, 8)):
            for m in range(1, top + 1):
                sequence = window_sequence(n, k, m, cyclic=False)
                self.assertEqual(len(sequence.symbols), m + k - 1)
                self.assertEqual(verify_window_property(sequence), (True, None))

    def test_single_window_degenerate_cases(self) -> None:
        sequence = window_sequence(3, 1, 1, cyclic=False)
        self.assertEqual(len(sequence.symbols), 1)
        cyclic = window_sequence(3, 1, 3, cyclic=True)
        self.assertEqual(sorted(cyclic.symbols), [1, 2, 3])

    def test_cyclic_requires_every_subset(self) -> None:
        with self.assertRaises(ValueError):
            window_sequence(5, 2, 9, cyclic=True)
        with self.assertRaises(ValueError):
            window_sequence(4, 2, 7, cyclic=False)

    def test_budget_exhaustion_is_reported(self) -> None:
        with self.assertRaises(BudgetExhausted) as ctx:
            window_sequence(4, 2, 6, cyclic=True, budget=1, precheck=False)
        self.assertEqual(ctx.exception.budget, 1)


class CyclicFeasibilitySweepTests(unittest.TestCase):
    def _sweep_outcome(self, n: int, k: int, precheck: bool) -> bool:
        try:
            seq = window_sequence(n, k, binomial(n, k), cyclic=True, precheck=precheck)
        except Infeasible:
            return False
        ok, violation = verify_window_property(seq)
        self.assertTrue(ok, violation)
        return True

    def test_divisibility_precheck_agrees_with_exhaustive_search(self) -> None:
        feasible = set()
        for n in range(1, 7):
            for k in range(1, n + 1):
                with self.subTest(n=n, k=k):
                    quick = self._sweep_outcome(n, k, precheck=True)
                    self.assertEqual(quick, self._sweep_outcome(n, k, precheck=False))
                    if quick:
                        feasible.add((n, k))
        self.assertIn((5, 2), feasible)
        for shape in ((4, 2), (5, 3), (6, 2), (6, 3)):
            self.assertNotIn(shape, feasible)


if __name__ == "__main__":
    unittest.main()
