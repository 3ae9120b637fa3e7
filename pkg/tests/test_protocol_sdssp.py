"""Tests for descriptors, share storage and the Shamir-per-user protocol."""

import unittest
from fractions import Fraction
from importlib import import_module

import numpy as np

access_design = import_module("src.access_design")
audit_metrics = import_module("src.audit_metrics")
field_core = import_module("src.field_core")
protocol_sdssp = import_module("src.protocol_sdssp")
AccessStructure = access_design.AccessStructure
NotSperner = access_design.NotSperner
design_access_structure = access_design.design_access_structure
FieldTooSmall = field_core.FieldTooSmall
FormatError = protocol_sdssp.FormatError
MissingSlot = protocol_sdssp.MissingSlot
StoringMatrix = protocol_sdssp.StoringMatrix
WrongKind = protocol_sdssp.WrongKind
build_max_users_sdssp = protocol_sdssp.build_max_users_sdssp
build_sdssp = protocol_sdssp.build_sdssp
descriptor_from_document = protocol_sdssp.descriptor_from_document
descriptor_to_document = protocol_sdssp.descriptor_to_document
random_symbols = protocol_sdssp.random_symbols
reads_for_user = protocol_sdssp.reads_for_user
sdssp_encode = protocol_sdssp.sdssp_encode
sdssp_encode_explicit = protocol_sdssp.sdssp_encode_explicit
store_shares = protocol_sdssp.store_shares
user_decode = protocol_sdssp.user_decode

TRIANGLE = AccessStructure.from_lists([[1, 2], [2, 3], [1, 3]])


class DescriptorTests(unittest.TestCase):
    def test_triangle_layout(self) -> None:
        desc = build_sdssp(3, TRIANGLE, 5)
        self.assertEqual(desc.h, 6)
        self.assertEqual(desc.storage_overhead, Fraction(2))
        self.assertEqual(desc.k, 2)
        self.assertEqual(desc.storing.placements, (1, 2, 2, 3, 1, 3))
        self.assertEqual(desc.user_slots, ((0, 1), (2, 3), (4, 5)))
        self.assertIsNone(desc.coverage_violation())

    def test_dense_storing_matrix_has_one_entry_per_column(self) -> None:
        dense = build_sdssp(3, TRIANGLE, 5).storing.to_dense()
        self.assertEqual(len(dense), 3)
        for column in zip(*dense, strict=True):
            self.assertEqual(sum(column), 1)

    def test_readable_slots_cover_every_share_on_the_nodes(self) -> None:
        desc = build_sdssp(3, TRIANGLE, 5)
        self.assertEqual(desc.readable_slots(0), [0, 1, 2, 4])

    def test_nested_access_sets_are_rejected(self) -> None:
        with self.assertRaises(NotSperner) as ctx:
            build_sdssp(2, AccessStructure.from_lists([[1], [1, 2]]), 5)
        self.assertEqual(ctx.exception.witness, (0, 1))

    def test_field_must_exceed_widest_access_set(self) -> None:
        with self.assertRaises(FieldTooSmall):
            build_sdssp(3, TRIANGLE, 2)

    def test_access_sets_must_fit_the_nodes(self) -> None:
        with self.assertRaises(ValueError):
            build_sdssp(2, TRIANGLE, 5)
        with self.assertRaises(ValueError):
            StoringMatrix(2, (1, 3))

    def test_maximum_user_build(self) -> None:
        desc = build_max_users_sdssp(4, 7)
        self.assertEqual(desc.m, 6)
        self.assertEqual(desc.h, 12)
        self.assertIsNone(desc.access.sperner_violation())

    def test_mixed_sizes_leave_k_unset(self) -> None:
        access = AccessStructure.from_lists([[1], [2, 3], [2, 4], [3, 4]])
        desc = build_sdssp(4, access, 5)
        self.assertIsNone(desc.k)
        self.assertEqual(desc.points, (1, 2))
        self.assertEqual(desc.user_slots[0], (0,))

    def test_document_round_trip(self) -> None:
        desc = build_sdssp(3, TRIANGLE, 5, seed=11)
        self.assertEqual(descriptor_from_document(descriptor_to_document(desc)), desc)

    def test_foreign_document_is_rejected(self) -> None:
        with self.assertRaises(FormatError):
            descriptor_from_document({"format": "something-else"})
        document = descriptor_to_document(build_sdssp(3, TRIANGLE, 5))
        del document["placements"]
        with self.assertRaises(FormatError):
            descriptor_from_document(document)


class EncodingTests(unittest.TestCase):
    def test_singleton_users_store_their_secret(self) -> None:
        access = AccessStructure.from_lists([[1], [2], [3]])
        desc = build_sdssp(3, access, 5)
        self.assertEqual(sdssp_encode(desc, [4, 0, 2], rng_seed=9), [4, 0, 2])

    def test_fixed_seed_is_deterministic(self) -> None:
        desc = build_sdssp(3, TRIANGLE, 13)
        first = sdssp_encode(desc, [1, 2, 3], rng_seed=2024)
        self.assertEqual(first, sdssp_encode(desc, [1, 2, 3], rng_seed=2024))
        self.assertEqual(
            random_symbols(13, 4, 2024, 1), random_symbols(13, 4, 2024, 1)
        )
        self.assertEqual(random_symbols(13, 0, 2024, 1), [])

    def test_random_round_trips(self) -> None:
        desc = build_max_users_sdssp(5, 13)
        rng = np.random.default_rng(7)
        for rng_seed in range(100):
            s = [int(v) for v in rng.integers(0, 13, size=desc.m)]
            store = store_shares(desc, sdssp_encode(desc, s, rng_seed))
            for j in range(desc.m):
                reads = reads_for_user(desc, store, j)
                self.assertEqual(user_decode(desc, j, reads), s[j])

    def test_missing_slot(self) -> None:
        desc = build_sdssp(3, TRIANGLE, 5)
        y = sdssp_encode_explicit(desc, [1, 2, 3], [0, 0, 0])
        with self.assertRaises(MissingSlot) as ctx:
            user_decode(desc, 1, {2: y[2]})
        self.assertEqual((ctx.exception.user, ctx.exception.slot), (1, 3))

    def test_explicit_randomness_length_is_checked(self) -> None:
        desc = build_sdssp(3, TRIANGLE, 5)
        with self.assertRaises(ValueError):
            sdssp_encode_explicit(desc, [1, 2, 3], [0, 0])
        with self.assertRaises(ValueError):
            sdssp_encode_explicit(desc, [1, 2], [0, 0, 0])

    def test_exhaustive_correctness_at_q3(self) -> None:
        desc = build_sdssp(3, TRIANGLE, 3)
        verdict = audit_metrics.audit_correctness(desc, exhaustive_budget=10**6)
        self.assertTrue(verdict.passed, verdict.detail)
        self.assertTrue(verdict.detail.startswith("exhaustive: 729 inputs"))

    def test_designed_access_reaches_the_communication_optimum(self) -> None:
        design = design_access_structure(5, 10)
        desc = build_sdssp(5, design.structure, 13)
        report = audit_metrics.metrics(desc)
        self.assertEqual(report.comm, 20)
        self.assertEqual(report.comm, report.c_star)

    def test_kind_is_enforced(self) -> None:
        desc = build_sdssp(3, TRIANGLE, 5)
        other = descriptor_from_document(
            {**descriptor_to_document(desc), "kind": "nearly_optimal"}
        )
        with self.assertRaises(WrongKind):
            sdssp_encode(other, [1, 2, 3], 0)


if __name__ == "__main__":
    unittest.main()
