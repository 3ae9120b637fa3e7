"""Export a sweep of optimal access-structure designs to an Excel sheet.

Usage:
    python -m src.export_design_to_excel --n-max 8 --excel designs.xlsx

Columns in the generated sheet:
- n, m
- i (split size), alpha_i, alpha_i1 (exact rationals as text)
- psi_star (text), c_star
- realizable (TRUE/FALSE, blank when the search budget ran out)
- achievable (smallest realizable total size, blank when unknown)

Requires: openpyxl, pyyaml
"""

from __future__ import annotations

import argparse
import os

from openpyxl import Workbook

from src.access_design import (
    Unrealizable,
    achievable_min_C,
    max_users,
    realize_sperner,
    solve_design,
)
from src.toolkit_config import LOGGER, BudgetExhausted, load_budget_config

HEADERS = [
    "n",
    "m",
    "i",
    "alpha_i",
    "alpha_i1",
    "psi_star",
    "c_star",
    "realizable",
    "achievable",
]


def design_row(n: int, m: int, budget: int) -> list[object]:
    """One sheet row; realizability cells stay blank past the budget."""
    solution = solve_design(n, m)
    realizable: bool | None = None
    achievable: int | None = None
    try:
        realize_sperner(n, solution.a, budget)
        realizable = True
        achievable = solution.c_star
    except Unrealizable:
        realizable = False
        try:
            achievable, _ = achievable_min_C(n, m, budget)
        except BudgetExhausted:
            LOGGER.info("event=export_achievable_unknown n=%s m=%s", n, m)
    except BudgetExhausted:
        LOGGER.info("event=export_realizable_unknown n=%s m=%s", n, m)
    return [
        n,
        m,
        solution.i,
        str(solution.alpha_i),
        str(solution.alpha_i1),
        str(solution.psi_star),
        solution.c_star,
        realizable,
        achievable,
    ]


def export_design_to_excel(
    n_max: int = 8,
    excel_path: str = "designs.xlsx",
    sheet_name: str = "designs",
    budget: int | None = None,
) -> int:
    """Write one row per (n, m) with 1 <= n <= n_max; returns the row count."""
    if n_max < 1:
        raise ValueError(f"--n-max must be at least 1; got {n_max}")
    search_budget = budget or load_budget_config().search_budget

    wb = Workbook()
    ws = wb.active
    ws.title = sheet_name
    ws.append(HEADERS)

    rows = 0
    for n in range(1, n_max + 1):
        for m in range(1, max_users(n) + 1):
            ws.append(design_row(n, m, search_budget))
            rows += 1

    os.makedirs(os.path.dirname(excel_path) or ".", exist_ok=True)
    wb.save(excel_path)
    LOGGER.info("event=design_export_finished rows=%s path=%s", rows, excel_path)
    return rows


def main():
    parser = argparse.ArgumentParser(
        description="Export a sweep of access-structure designs to Excel.",
        epilog=(
            "Examples:\n"
            "  python -m src.export_design_to_excel --n-max 8 --excel designs.xlsx\n"
            "  python -m src.export_design_to_excel --n-max 6 --budget 100000"
        ),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--n-max",
        type=int,
        default=8,
        help="Largest number of storage nodes to sweep (default: 8).",
    )
    parser.add_argument(
        "--excel",
        default="designs.xlsx",
        help="Path to Excel file to write (default: designs.xlsx).",
    )
    parser.add_argument(
        "--sheet",
        default="designs",
        help="Worksheet name to write (default: designs).",
    )
    parser.add_argument(
        "--budget",
        type=int,
        help="Search budget per realization (default: config/budgets.yaml).",
    )
    args = parser.parse_args()

    try:
        rows = export_design_to_excel(
            n_max=args.n_max,
            excel_path=args.excel,
            sheet_name=args.sheet,
            budget=args.budget,
        )
    except ValueError as exc:
        print(f"[ERROR] {exc}")
        raise SystemExit(2)

    print(f"[INFO] Exported {rows} designs -> {args.excel} ({args.sheet})")


if __name__ == "__main__":
    main()
