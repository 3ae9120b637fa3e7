"""End-to-end tests for the command-line surface."""

import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stdout
from importlib import import_module
from unittest.mock import patch

dssp_cli = import_module("src.dssp_cli")
protocol_sdssp = import_module("src.protocol_sdssp")
node_path = dssp_cli.node_path


class CliTestCase(unittest.TestCase):
    def setUp(self) -> None:
        self._tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self._tmp.cleanup)
        self.dir = self._tmp.name
        patcher = patch.object(dssp_cli, "configure_logging", return_value="test.log")
        patcher.start()
        self.addCleanup(patcher.stop)

    def path(self, name: str) -> str:
        return os.path.join(self.dir, name)

    def run_cli(self, command: str) -> tuple[int, str]:
        out = io.StringIO()
        with redirect_stdout(out):
            status = dssp_cli.main(command.split())
        return status, out.getvalue()

    def write_secrets(self, q: int, secrets: list[int]) -> str:
        path = self.path("secrets.json")
        document = {
            "format": dssp_cli.SECRETS_FORMAT,
            "q": q,
            "secrets": [str(s) for s in secrets],
        }
        with open(path, "w", encoding="utf-8") as f:
            json.dump(document, f)
        return path


class DesignCommandTests(CliTestCase):
    def test_unrealizable_optimum_reports_achievable(self) -> None:
        out_path = self.path("design.json")
        status, out = self.run_cli(f"design --n 4 --m 5 --out {out_path}")
        self.assertEqual(status, 0)
        self.assertIn("i=1 alpha*=(2, 3) psi*=8 C*=8", out)
        self.assertIn("realizable=false achievable=10", out)
        with open(out_path, encoding="utf-8") as f:
            document = json.load(f)
        self.assertEqual(document["format"], dssp_cli.DESIGN_FORMAT)
        self.assertEqual(document["profile"], {"1": 2, "2": 3})
        self.assertFalse(document["realizable"])
        self.assertEqual(sum(len(s) for s in document["access"]), 10)

    def test_realizable_boundary(self) -> None:
        status, out = self.run_cli("design --n 5 --m 10")
        self.assertEqual(status, 0)
        self.assertIn("C*=20 realizable=true achievable=20", out)

    def test_too_many_users_exits_with_usage_error(self) -> None:
        status, out = self.run_cli("design --n 4 --m 7")
        self.assertEqual(status, 2)
        self.assertIn("[ERROR] InfeasibleUserCount", out)


class ProtocolCommandTests(CliTestCase):
    def build_optimal(self) -> str:
        descriptor = self.path("descriptor.json")
        status, out = self.run_cli(
            f"build --protocol optimal --n 5 --k 2 --q 13 --out {descriptor}"
        )
        self.assertEqual(status, 0)
        self.assertIn("SO=1 C=20 C*=20", out)
        return descriptor

    def encode(self, descriptor: str, secrets: list[int]) -> str:
        shares = self.path("shares")
        status, _ = self.run_cli(
            f"encode --descriptor {descriptor} "
            f"--secrets {self.write_secrets(13, secrets)} --shares {shares} --seed 7"
        )
        self.assertEqual(status, 0)
        return shares

    def access_sets(self, descriptor: str) -> list[list[int]]:
        with open(descriptor, encoding="utf-8") as f:
            return json.load(f)["access"]

    def test_encode_then_decode_every_user(self) -> None:
        descriptor = self.build_optimal()
        secrets = [3, 1, 4, 1, 5, 9, 2, 6, 5, 3]
        shares = self.encode(descriptor, secrets)
        self.assertTrue(os.path.exists(os.path.join(shares, dssp_cli.MANIFEST_NAME)))
        for user, expected in enumerate(secrets, start=1):
            status, out = self.run_cli(
                f"decode --descriptor {descriptor} --shares {shares} --user {user}"
            )
            self.assertEqual(status, 0)
            self.assertEqual(out.strip(), str(expected))

    def test_decode_opens_only_the_users_nodes(self) -> None:
        descriptor = self.build_optimal()
        shares = self.encode(descriptor, list(range(10)))
        with patch.object(
            dssp_cli, "_read_node_file", wraps=dssp_cli._read_node_file
        ) as recorder:
            status, out = self.run_cli(
                f"decode --descriptor {descriptor} --shares {shares} --user 4"
            )
        self.assertEqual(status, 0)
        self.assertEqual(out.strip(), "3")
        opened = {call.args[0] for call in recorder.call_args_list}
        expected = {node_path(shares, node) for node in self.access_sets(descriptor)[3]}
        self.assertEqual(opened, expected)

    def test_missing_node_file_fails_decoding(self) -> None:
        descriptor = self.build_optimal()
        shares = self.encode(descriptor, [1] * 10)
        os.remove(node_path(shares, self.access_sets(descriptor)[0][0]))
        status, out = self.run_cli(
            f"decode --descriptor {descriptor} --shares {shares} --user 1"
        )
        self.assertEqual(status, 2)
        self.assertIn("MissingSlot", out)

    def test_audit_passes_for_built_descriptor(self) -> None:
        descriptor = self.build_optimal()
        report_path = self.path("audit.json")
        status, out = self.run_cli(
            f"audit --descriptor {descriptor} --trials 50 --out {report_path}"
        )
        self.assertEqual(status, 0)
        self.assertIn("secrecy=True (rank)", out)
        with open(report_path, encoding="utf-8") as f:
            self.assertTrue(json.load(f)["passed"])

    def test_singular_field_exits_with_usage_error(self) -> None:
        status, out = self.run_cli(
            "build --protocol optimal --n 5 --k 2 --q 11 "
            f"--out {self.path('descriptor.json')}"
        )
        self.assertEqual(status, 2)
        self.assertIn("SingularSystem", out)

    def test_sdssp_and_nearly_builds(self) -> None:
        sdssp = self.path("sdssp.json")
        status, out = self.run_cli(
            "build --protocol sdssp --n 3 --q 5 "
            f"--access [[1,2],[2,3],[1,3]] --out {sdssp}"
        )
        self.assertEqual(status, 0)
        self.assertIn("h=6 SO=2", out)

        nearly = self.path("nearly.json")
        status, out = self.run_cli(
            f"build --protocol nearly --n 4 --m 5 --q 7 --out {nearly}"
        )
        self.assertEqual(status, 0)
        self.assertIn("SO=6/5 C=10 C*=8", out)
        with open(nearly, encoding="utf-8") as f:
            desc = protocol_sdssp.descriptor_from_document(json.load(f))
        self.assertEqual(desc.kind, protocol_sdssp.KIND_NEARLY)

    def build_sdssp(self, q: int) -> str:
        descriptor = self.path("sdssp.json")
        status, _ = self.run_cli(
            f"build --protocol sdssp --n 3 --q {q} "
            f"--access [[1,2],[2,3],[1,3]] --out {descriptor}"
        )
        self.assertEqual(status, 0)
        return descriptor

    def test_drawn_seed_is_recorded_in_descriptor(self) -> None:
        descriptor = self.build_sdssp(13)
        secrets = self.write_secrets(13, [4, 7, 11])
        first = self.path("first")
        status, _ = self.run_cli(
            f"encode --descriptor {descriptor} --secrets {secrets} --shares {first}"
        )
        self.assertEqual(status, 0)
        with open(os.path.join(first, dssp_cli.MANIFEST_NAME), encoding="utf-8") as f:
            drawn = json.load(f)["seed"]
        with open(descriptor, encoding="utf-8") as f:
            recorded = protocol_sdssp.descriptor_from_document(json.load(f)).seed
        self.assertEqual(recorded, drawn)

        second = self.path("second")
        status, _ = self.run_cli(
            f"encode --descriptor {descriptor} --secrets {secrets} --shares {second}"
        )
        self.assertEqual(status, 0)
        for node in range(1, 4):
            with open(node_path(first, node), encoding="utf-8") as a:
                with open(node_path(second, node), encoding="utf-8") as b:
                    self.assertEqual(json.load(a), json.load(b))

    def test_encode_removes_stale_node_files(self) -> None:
        descriptor = self.build_optimal()
        shares = self.path("shares")
        os.makedirs(shares)
        stale = node_path(shares, 99)
        with open(stale, "w", encoding="utf-8") as f:
            json.dump({"format": dssp_cli.NODE_FORMAT, "node": 99}, f)
        self.encode(descriptor, list(range(10)))
        self.assertFalse(os.path.exists(stale))
        self.assertEqual(
            sorted(os.listdir(shares)),
            sorted([dssp_cli.MANIFEST_NAME] + [f"node_{i}.json" for i in range(1, 6)]),
        )

    def test_skipped_secrecy_fails_the_audit(self) -> None:
        descriptor = self.build_sdssp(3)
        status, out = self.run_cli(f"--budget 100 audit --descriptor {descriptor}")
        self.assertEqual(status, 1)
        self.assertIn("[WARN] secrecy not established", out)
        self.assertIn("secrecy=False (skipped)", out)
        self.assertIn("[ERROR] audit failed", out)

    def test_missing_required_protocol_argument(self) -> None:
        status, out = self.run_cli(
            f"build --protocol nearly --n 4 --q 7 --out {self.path('x.json')}"
        )
        self.assertEqual(status, 2)
        self.assertIn("--m is required", out)

    def test_secrets_outside_the_field_are_rejected(self) -> None:
        descriptor = self.build_optimal()
        secrets = self.write_secrets(13, [13] + [0] * 9)
        status, out = self.run_cli(
            f"encode --descriptor {descriptor} --secrets {secrets} "
            f"--shares {self.path('shares')}"
        )
        self.assertEqual(status, 2)
        self.assertIn("FormatError", out)


class BenchCommandTests(CliTestCase):
    def test_nearly_bench_reports_linear_growth(self) -> None:
        status, out = self.run_cli("bench --protocol nearly --k 3 --m 1000 2000")
        self.assertEqual(status, 0)
        lines = out.strip().splitlines()
        self.assertEqual(len(lines), 2)
        self.assertIn("ops=6006", lines[0])
        self.assertIn("ops=12006", lines[1])
        self.assertIn("for 2x m", lines[1])

    def test_optimal_bench_counts_the_built_encoder(self) -> None:
        status, out = self.run_cli("bench --protocol optimal --k 2 --n 5 --q 13")
        self.assertEqual(status, 0)
        self.assertIn("[INFO] optimal k=2 m=10 ops=190", out)

    def test_optimal_bench_rejects_user_counts(self) -> None:
        status, out = self.run_cli("bench --protocol optimal --m 5")
        self.assertEqual(status, 2)
        self.assertIn("[ERROR] ValueError", out)

    def test_unbuildable_optimal_shape_is_skipped(self) -> None:
        status, out = self.run_cli("bench --protocol optimal --k 2 --n 5 --q 11")
        self.assertEqual(status, 0)
        self.assertIn("[WARN] optimal n=5 k=2 q=11 skipped", out)
        self.assertNotIn("ops=", out)


if __name__ == "__main__":
    unittest.main()
