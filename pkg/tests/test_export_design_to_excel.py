"""Tests for the design sweep Excel export."""

import os
import tempfile
import unittest
from importlib import import_module

from openpyxl import load_workbook

export_design = import_module("src.export_design_to_excel")
HEADERS = export_design.HEADERS
design_row = export_design.design_row
export_design_to_excel = export_design.export_design_to_excel


class DesignExportTests(unittest.TestCase):
    def setUp(self) -> None:
        self._tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self._tmp.cleanup)
        self.path = os.path.join(self._tmp.name, "out", "designs.xlsx")

    def test_sweep_writes_one_row_per_user_count(self) -> None:
        rows = export_design_to_excel(n_max=4, excel_path=self.path, budget=10**5)
        self.assertEqual(rows, 1 + 2 + 3 + 6)

        ws = load_workbook(self.path)["designs"]
        self.assertEqual([cell.value for cell in ws[1]], HEADERS)
        self.assertEqual(ws.max_row, 13)
        by_key = {
            (row[0], row[1]): row for row in ws.iter_rows(min_row=2, values_only=True)
        }
        n4m5 = by_key[(4, 5)]
        self.assertEqual(n4m5[HEADERS.index("c_star")], 8)
        self.assertIs(n4m5[HEADERS.index("realizable")], False)
        self.assertEqual(n4m5[HEADERS.index("achievable")], 10)

    def test_realizable_row(self) -> None:
        row = design_row(5, 10, 10**5)
        self.assertEqual(row[HEADERS.index("c_star")], 20)
        self.assertIs(row[HEADERS.index("realizable")], True)
        self.assertEqual(row[HEADERS.index("achievable")], 20)

    def test_rejects_empty_sweep(self) -> None:
        with self.assertRaises(ValueError):
            export_design_to_excel(n_max=0, excel_path=self.path)


if __name__ == "__main__":
    unittest.main()
