"""Tests for the nearly storage-optimal iterative protocol."""

import unittest
from fractions import Fraction
from importlib import import_module

access_design = import_module("src.access_design")
audit_metrics = import_module("src.audit_metrics")
field_core = import_module("src.field_core")
protocol_nearly_optimal = import_module("src.protocol_nearly_optimal")
protocol_sdssp = import_module("src.protocol_sdssp")
InfeasibleUserCount = access_design.InfeasibleUserCount
FieldTooSmall = field_core.FieldTooSmall
OpCounter = field_core.OpCounter
PrimeField = field_core.PrimeField
build_nearly = protocol_nearly_optimal.build_nearly
iterative_encode = protocol_nearly_optimal.iterative_encode
iterative_row = protocol_nearly_optimal.iterative_row
minimal_window = protocol_nearly_optimal.minimal_window
nearly_decode = protocol_nearly_optimal.nearly_decode
nearly_encode = protocol_nearly_optimal.nearly_encode
nearly_seed = protocol_nearly_optimal.nearly_seed
WrongKind = protocol_sdssp.WrongKind
build_sdssp = protocol_sdssp.build_sdssp
reads_for_user = protocol_sdssp.reads_for_user
store_shares = protocol_sdssp.store_shares


class ShapeTests(unittest.TestCase):
    def test_four_nodes_five_users(self) -> None:
        desc = build_nearly(4, 5, 7)
        self.assertEqual(desc.k, 2)
        self.assertEqual(desc.h, 6)
        self.assertEqual(desc.storage_overhead, Fraction(6, 5))
        report = audit_metrics.metrics(desc)
        self.assertEqual(report.downloads, (2, 2, 2, 2, 2))
        self.assertEqual(report.comm, 10)
        self.assertIsNone(desc.coverage_violation())

    def test_five_nodes_ten_users(self) -> None:
        desc = build_nearly(5, 10, 13)
        self.assertEqual(desc.k, 2)
        self.assertEqual(desc.h, 11)
        self.assertEqual(desc.storage_overhead, Fraction(11, 10))

    def test_minimal_window(self) -> None:
        self.assertEqual(minimal_window(4, 4), 1)
        self.assertEqual(minimal_window(4, 5), 2)
        self.assertEqual(minimal_window(6, 20), 3)
        with self.assertRaises(InfeasibleUserCount):
            minimal_window(4, 7)

    def test_single_user(self) -> None:
        desc = build_nearly(3, 1, 5)
        self.assertEqual((desc.k, desc.h), (1, 1))
        y = nearly_encode(desc, [4], nearly_seed(desc, 0))
        self.assertEqual(y, [4])
        self.assertEqual(nearly_decode(desc, 0, {0: y[0]}), 4)

    def test_window_of_one_copies_secrets(self) -> None:
        desc = build_nearly(4, 3, 5)
        self.assertEqual(desc.k, 1)
        self.assertEqual(nearly_seed(desc, 123), [])
        self.assertEqual(nearly_encode(desc, [1, 2, 3], []), [1, 2, 3])

    def test_invalid_parameters(self) -> None:
        with self.assertRaises(ValueError):
            build_nearly(4, 5, 7, k_override=1)
        with self.assertRaises(FieldTooSmall):
            build_nearly(4, 5, 2)
        with self.assertRaises(InfeasibleUserCount):
            build_nearly(4, 7, 7)

    def test_kind_is_enforced(self) -> None:
        sdssp = build_sdssp(
            3, access_design.AccessStructure.from_lists([[1], [2], [3]]), 5
        )
        with self.assertRaises(WrongKind):
            nearly_encode(sdssp, [1, 2, 3], [])


class EncoderTests(unittest.TestCase):
    def test_iterative_row_for_two_points(self) -> None:
        self.assertEqual(iterative_row(PrimeField(7), (1, 2)), (2,))
        self.assertEqual(iterative_row(PrimeField(7), (1,)), ())

    def test_fixed_seed_is_deterministic(self) -> None:
        desc = build_nearly(5, 10, 13)
        seed = nearly_seed(desc, 99)
        self.assertEqual(seed, nearly_seed(desc, 99))
        s = list(range(10))
        self.assertEqual(nearly_encode(desc, s, seed), nearly_encode(desc, s, seed))

    def test_every_user_decodes(self) -> None:
        for n, m, q in ((4, 5, 7), (5, 10, 13), (6, 12, 11), (7, 22, 11)):
            desc = build_nearly(n, m, q)
            for rng_seed in range(20):
                s = [(rng_seed * 7 + 3 * j) % q for j in range(m)]
                y = nearly_encode(desc, s, nearly_seed(desc, rng_seed))
                store = store_shares(desc, y)
                for j in range(m):
                    reads = reads_for_user(desc, store, j)
                    self.assertEqual(nearly_decode(desc, j, reads), s[j])

    def test_seed_length_is_checked(self) -> None:
        desc = build_nearly(4, 5, 7)
        with self.assertRaises(ValueError):
            nearly_encode(desc, [0] * 5, [1, 2])

    def test_bijection_at_eighty_one_states(self) -> None:
        desc = build_nearly(4, 3, 3, k_override=2)
        self.assertEqual(audit_metrics.input_space_size(desc), 81)
        verdict = audit_metrics.audit_uniformity(desc)
        self.assertTrue(verdict.passed, verdict.detail)

    def test_operation_count_grows_linearly(self) -> None:
        field = PrimeField(101)
        points = (1, 2, 3)
        w = iterative_row(field, points)
        per_user = []
        for m in (1000, 2000, 10000):
            counter = OpCounter()
            s = [(7 * i) % 101 for i in range(m)]
            y = iterative_encode(field, points, w, s, [5, 6], counter)
            self.assertEqual(len(y), m + 2)
            per_user.append(counter.total / m)
        self.assertLess(max(per_user) / min(per_user), 1.2)


if __name__ == "__main__":
    unittest.main()
