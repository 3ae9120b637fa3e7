"""Command-line surface: design, build, encode, decode, audit and bench.

Storage nodes are plain files: `encode` writes one node_<i>.json per node into
a shares directory and `decode` reads back only the node files in the user's
access set.

Usage:
    python -m src.dssp_cli design --n 4 --m 5
    python -m src.dssp_cli build --protocol optimal --n 5 --k 2 --q 13 \
        --out descriptor.json
    python -m src.dssp_cli encode --descriptor descriptor.json \
        --secrets secrets.json --shares shares --seed 7
    python -m src.dssp_cli decode --descriptor descriptor.json --shares shares \
        --user 1
    python -m src.dssp_cli audit --descriptor descriptor.json
    python -m src.dssp_cli bench --protocol nearly --k 3 --m 1000 2000 4000
    python -m src.dssp_cli bench --protocol optimal --k 2 --n 5 7

Exit codes: 0 success, 1 audit verdict failure, 2 usage or parameter error.
"""

from __future__ import annotations

import argparse
import glob
import json
import os
import sys
from collections.abc import Iterator, Sequence
from dataclasses import replace
from typing import Any

import numpy as np

from src.access_design import (
    AccessStructure,
    Unrealizable,
    achievable_min_C,
    design_access_structure,
    realize_sperner,
    solve_design,
)
from src.audit_metrics import audit, decode_user, encode_secrets, metrics
from src.field_core import OpCounter, PrimeField
from src.protocol_nearly_optimal import build_nearly, iterative_encode, iterative_row
from src.protocol_optimal_so import build_optimal, optimal_encode
from src.protocol_sdssp import (
    FormatError,
    ProtocolDescriptor,
    build_max_users_sdssp,
    build_sdssp,
    descriptor_from_document,
    descriptor_to_document,
    fresh_seed,
    store_shares,
)
from src.toolkit_config import (
    LOG_PATH,
    LOGGER,
    BudgetConfig,
    BudgetExhausted,
    DsspError,
    configure_logging,
    load_budget_config,
    log_list,
)

SECRETS_FORMAT = "dssp-secrets/1"
NODE_FORMAT = "dssp-node/1"
MANIFEST_FORMAT = "dssp-manifest/1"
DESIGN_FORMAT = "dssp-design/1"
MANIFEST_NAME = "manifest.json"
PROTOCOL_CHOICES = ("sdssp", "optimal", "nearly")
BENCH_NEARLY_K = 3
BENCH_NEARLY_SIZES = [1000, 2000, 4000, 8000]
BENCH_OPTIMAL_K = 2
BENCH_OPTIMAL_NODES = [5, 7]


# =========================
# FILES
# =========================


def _write_json(path: str, document: dict[str, Any]) -> None:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2, sort_keys=True)
        f.write("\n")


def _read_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path} is not valid JSON: {exc}") from exc


def node_path(shares_dir: str, node: int) -> str:
    return os.path.join(shares_dir, f"node_{node}.json")


def _read_node_file(path: str) -> dict[str, Any] | None:
    """Load one storage node document; None when the node file is absent."""
    if not os.path.exists(path):
        return None
    return _read_json(path)


def load_descriptor(path: str) -> ProtocolDescriptor:
    return descriptor_from_document(_read_json(path))


def load_secrets(path: str, desc: ProtocolDescriptor) -> list[int]:
    doc = _read_json(path)
    if not isinstance(doc, dict) or doc.get("format") != SECRETS_FORMAT:
        raise FormatError(f"{path} is not a {SECRETS_FORMAT} document")
    raw = doc.get("secrets")
    if not isinstance(raw, list) or len(raw) != desc.m:
        raise FormatError(f"{path} must list exactly {desc.m} secrets")
    if int(doc.get("q", desc.q)) != desc.q:
        raise FormatError(f"{path} is not over the descriptor field F_{desc.q}")
    secrets = [int(str(value)) for value in raw]
    if any(not 0 <= value < desc.q for value in secrets):
        raise FormatError(f"secrets must be field elements in [0, {desc.q})")
    return secrets


def write_shares(
    shares_dir: str, desc: ProtocolDescriptor, y: Sequence[int], seed: int
) -> list[str]:
    """Write one file per storage node plus the manifest.

    Node files left in shares_dir by an earlier encoding are removed first so
    the directory only ever holds the current shares.
    """
    for stale in glob.glob(os.path.join(shares_dir, "node_*.json")):
        os.remove(stale)
        LOGGER.info("event=stale_node_removed path=%s", stale)
    written: list[str] = []
    for node, shares in store_shares(desc, y).items():
        path = node_path(shares_dir, node)
        _write_json(
            path,
            {
                "format": NODE_FORMAT,
                "node": node,
                "q": desc.q,
                "shares": [
                    {"slot": slot, "value": str(value)} for slot, value in shares
                ],
            },
        )
        written.append(path)
    _write_json(
        os.path.join(shares_dir, MANIFEST_NAME),
        {
            "format": MANIFEST_FORMAT,
            "kind": desc.kind,
            "n": desc.n,
            "h": desc.h,
            "seed": seed,
            "nodes": [os.path.basename(path) for path in written],
        },
    )
    return written


def read_user_shares(
    shares_dir: str, desc: ProtocolDescriptor, j: int
) -> dict[int, int]:
    """Slots readable by user j, opening only the node files in its access set."""
    reads: dict[int, int] = {}
    for node in desc.access.sets[j].elements:
        path = node_path(shares_dir, node)
        doc = _read_node_file(path)
        if doc is None:
            LOGGER.warning("event=node_file_missing node=%s path=%s", node, path)
            continue
        if (
            not isinstance(doc, dict)
            or doc.get("format") != NODE_FORMAT
            or doc.get("node") != node
            or doc.get("q") != desc.q
        ):
            raise FormatError(f"{path} is not the {NODE_FORMAT} file of node {node}")
        try:
            for entry in doc["shares"]:
                reads[int(entry["slot"])] = int(str(entry["value"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path} has a malformed share entry: {exc!r}") from exc
    return reads


# =========================
# COMMANDS
# =========================


def cmd_design(args: argparse.Namespace, budgets: BudgetConfig) -> int:
    solution = solve_design(args.n, args.m)
    document: dict[str, Any] = {
        "format": DESIGN_FORMAT,
        "n": solution.n,
        "m": solution.m,
        "i": solution.i,
        "alpha_i": str(solution.alpha_i),
        "alpha_i1": str(solution.alpha_i1),
        "profile": {str(k): count for k, count in solution.a.items()},
        "psi_star": str(solution.psi_star),
        "c_star": solution.c_star,
        "realizable": None,
        "certificate": None,
        "achievable": None,
        "access": None,
    }
    try:
        structure = realize_sperner(args.n, solution.a, budgets.search_budget)
        document.update(
            realizable=True,
            achievable=solution.c_star,
            access=[list(s.elements) for s in structure.sets],
        )
    except Unrealizable as exc:
        document.update(realizable=False, certificate=exc.certificate)
        try:
            achieved, structure = achievable_min_C(
                args.n, args.m, budgets.search_budget
            )
            document.update(
                achievable=achieved,
                access=[list(s.elements) for s in structure.sets],
            )
        except BudgetExhausted as budget_exc:
            LOGGER.warning(
                "event=design_achievable_skipped reason=%r", str(budget_exc)
            )
    except BudgetExhausted as exc:
        LOGGER.warning("event=design_realization_skipped reason=%r", str(exc))

    if args.out:
        _write_json(args.out, document)
    print(
        f"[INFO] n={args.n} m={args.m} i={solution.i} "
        f"alpha*=({solution.alpha_i}, {solution.alpha_i1}) "
        f"psi*={solution.psi_star} C*={solution.c_star} "
        f"realizable={str(document['realizable']).lower()} "
        f"achievable={document['achievable']}"
    )
    LOGGER.info(
        "event=design_finished n=%s m=%s c_star=%s realizable=%s achievable=%s",
        args.n,
        args.m,
        solution.c_star,
        document["realizable"],
        document["achievable"],
    )
    return 0


def _parse_access(raw: str) -> AccessStructure:
    try:
        sets = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValueError(f"--access must be a JSON list of node lists: {exc}") from exc
    if not isinstance(sets, list) or not all(isinstance(s, list) for s in sets):
        raise ValueError("--access must be a JSON list of node lists")
    return AccessStructure.from_lists(sets)


def _build(args: argparse.Namespace, budgets: BudgetConfig) -> ProtocolDescriptor:
    if args.protocol == "optimal":
        if args.k is None:
            raise ValueError("--k is required for the optimal protocol")
        return build_optimal(args.n, args.k, args.q, budgets.search_budget, args.seed)
    if args.protocol == "nearly":
        if args.m is None:
            raise ValueError("--m is required for the nearly protocol")
        return build_nearly(
            args.n, args.m, args.q, args.k, budgets.search_budget, args.seed
        )
    if args.access:
        return build_sdssp(args.n, _parse_access(args.access), args.q, args.seed)
    if args.m is not None:
        design = design_access_structure(args.n, args.m, budgets.search_budget)
        return build_sdssp(args.n, design.structure, args.q, args.seed)
    return build_max_users_sdssp(args.n, args.q, args.seed)


def cmd_build(args: argparse.Namespace, budgets: BudgetConfig) -> int:
    desc = _build(args, budgets)
    _write_json(args.out, descriptor_to_document(desc))
    report = metrics(desc)
    print(
        f"[INFO] built {desc.kind} n={desc.n} m={desc.m} q={desc.q} h={desc.h} "
        f"SO={report.so} C={report.comm} C*={report.c_star} -> {args.out}"
    )
    return 0


def cmd_encode(args: argparse.Namespace, budgets: BudgetConfig) -> int:
    desc = load_descriptor(args.descriptor)
    secrets = load_secrets(args.secrets, desc)
    if args.seed is not None:
        seed = args.seed
    elif desc.seed is not None:
        seed = desc.seed
    else:
        seed = fresh_seed()
        desc = replace(desc, seed=seed)
        _write_json(args.descriptor, descriptor_to_document(desc))
        LOGGER.info("event=descriptor_seed_recorded path=%s", args.descriptor)
    y = encode_secrets(desc, secrets, seed)
    written = write_shares(args.shares, desc, y, seed)
    LOGGER.info(
        "event=encode_finished kind=%s h=%s nodes=%s seed=%s",
        desc.kind,
        desc.h,
        len(written),
        seed,
    )
    print(
        f"[INFO] wrote {desc.h} symbols to {len(written)} node files "
        f"in {args.shares}"
    )
    return 0


def cmd_decode(args: argparse.Namespace, budgets: BudgetConfig) -> int:
    desc = load_descriptor(args.descriptor)
    if not 1 <= args.user <= desc.m:
        raise ValueError(f"--user must be in 1..{desc.m}; got {args.user}")
    j = args.user - 1
    reads = read_user_shares(args.shares, desc, j)
    secret = decode_user(desc, j, reads)
    LOGGER.info(
        "event=decode_finished user=%s nodes=%s",
        args.user,
        log_list(list(desc.access.sets[j].elements)),
    )
    print(secret)
    return 0


def cmd_audit(args: argparse.Namespace, budgets: BudgetConfig) -> int:
    desc = load_descriptor(args.descriptor)
    trials = args.trials or budgets.correctness_trials
    report = audit(desc, trials, budgets.enumeration_budget, args.seed or 0)
    if args.out:
        _write_json(args.out, report.to_document())
    summary = report.metrics
    if report.secrecy.inconclusive:
        print(f"[WARN] secrecy not established: {report.secrecy.detail}")
    print(
        f"[INFO] {desc.kind}: correctness={report.correctness.passed} "
        f"sperner={report.sperner.passed} secrecy={report.secrecy.passed} "
        f"({report.secrecy.method}) SO={summary.so} C={summary.comm} "
        f"C*={summary.c_star}"
    )
    if not report.passed:
        print("[ERROR] audit failed")
        return 1
    return 0


def _bench_nearly(
    field: PrimeField, k: int, sizes: Sequence[int], rng: np.random.Generator
) -> Iterator[tuple[int, OpCounter]]:
    points = tuple(range(1, k + 1))
    w = iterative_row(field, points)
    for m in sizes:
        counter = OpCounter()
        s = [int(v) for v in rng.integers(0, field.q, size=m)]
        seed = [int(v) for v in rng.integers(0, field.q, size=k - 1)]
        iterative_encode(field, points, w, s, seed, counter)
        yield m, counter


def _bench_optimal(
    nodes: Sequence[int], k: int, q: int, budget: int, rng: np.random.Generator
) -> Iterator[tuple[int, OpCounter]]:
    """Encode with the E of real builds; shapes that cannot be built are skipped."""
    for n in nodes:
        try:
            desc = build_optimal(n, k, q, budget)
        except DsspError as exc:
            LOGGER.warning("event=bench_build_skipped n=%s k=%s q=%s", n, k, q)
            print(f"[WARN] optimal n={n} k={k} q={q} skipped: {exc}")
            continue
        counter = OpCounter()
        s = [int(v) for v in rng.integers(0, q, size=desc.m)]
        optimal_encode(desc, s, counter)
        yield desc.m, counter


def cmd_bench(args: argparse.Namespace, budgets: BudgetConfig) -> int:
    field = PrimeField(args.q)
    rng = np.random.default_rng(args.seed or 0)
    if args.protocol == "nearly":
        if args.n:
            raise ValueError("--n only applies to the optimal bench; use --m")
        k = args.k or BENCH_NEARLY_K
        points = _bench_nearly(field, k, args.m or BENCH_NEARLY_SIZES, rng)
    else:
        if args.m:
            raise ValueError("the optimal bench sizes come from --n (m = C(n, k))")
        k = args.k or BENCH_OPTIMAL_K
        nodes = args.n or BENCH_OPTIMAL_NODES
        points = _bench_optimal(nodes, k, args.q, budgets.search_budget, rng)

    previous: tuple[int, int] | None = None
    for m, counter in points:
        growth = ""
        if previous is not None:
            ratio = counter.total / previous[1]
            growth = f" growth={ratio:.3f}x for {m / previous[0]:g}x m"
        print(f"[INFO] {args.protocol} k={k} m={m} ops={counter.total}{growth}")
        LOGGER.info(
            "event=bench_point protocol=%s k=%s m=%s muls=%s adds=%s",
            args.protocol,
            k,
            m,
            counter.muls,
            counter.adds,
        )
        previous = (m, counter.total)
    return 0


# =========================
# ENTRY POINT
# =========================


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Design, build, run and audit distributed secret sharing.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--log-file",
        default=LOG_PATH,
        help=f"Path to the run log file (default: {LOG_PATH}).",
    )
    parser.add_argument(
        "--budget",
        type=int,
        help="Search and enumeration budget (overrides config and DSSP_BUDGET).",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    design = commands.add_parser("design", help="Optimal access-structure profile.")
    design.add_argument("--n", type=int, required=True, help="Number of nodes.")
    design.add_argument("--m", type=int, required=True, help="Number of users.")
    design.add_argument("--out", help="Optional path for the design document.")

    build = commands.add_parser("build", help="Build a protocol descriptor.")
    build.add_argument("--protocol", choices=PROTOCOL_CHOICES, required=True)
    build.add_argument("--n", type=int, required=True, help="Number of nodes.")
    build.add_argument("--m", type=int, help="Number of users (sdssp, nearly).")
    build.add_argument("--k", type=int, help="Access-set size (optimal, nearly).")
    build.add_argument("--q", type=int, required=True, help="Prime field modulus.")
    build.add_argument(
        "--access",
        help='Explicit sdssp access sets as JSON, e.g. "[[1,2],[2,3],[1,3]]".',
    )
    build.add_argument("--seed", type=int, help="Default encoding seed to record.")
    build.add_argument(
        "--out",
        default="descriptor.json",
        help="Descriptor path to write (default: descriptor.json).",
    )

    encode = commands.add_parser("encode", help="Encode secrets into node files.")
    encode.add_argument("--descriptor", required=True)
    encode.add_argument("--secrets", required=True, help="dssp-secrets/1 document.")
    encode.add_argument("--shares", required=True, help="Shares directory to write.")
    encode.add_argument("--seed", type=int, help="Seed for the encoder randomness.")

    decode = commands.add_parser("decode", help="Decode one user's secret.")
    decode.add_argument("--descriptor", required=True)
    decode.add_argument("--shares", required=True, help="Shares directory to read.")
    decode.add_argument("--user", type=int, required=True, help="User (1-based).")

    audit_cmd = commands.add_parser("audit", help="Verify a descriptor.")
    audit_cmd.add_argument("--descriptor", required=True)
    audit_cmd.add_argument("--trials", type=int, help="Random correctness trials.")
    audit_cmd.add_argument("--seed", type=int, help="Seed for random trials.")
    audit_cmd.add_argument("--out", help="Optional path for the audit document.")

    bench = commands.add_parser("bench", help="Count encoder field operations.")
    bench.add_argument("--protocol", choices=("nearly", "optimal"), required=True)
    bench.add_argument(
        "--k", type=int, help="Access-set size (default: 3 nearly, 2 optimal)."
    )
    bench.add_argument("--q", type=int, default=101, help="Prime modulus.")
    bench.add_argument(
        "--m",
        type=int,
        nargs="+",
        help="User counts for the nearly bench (default: 1000..8000).",
    )
    bench.add_argument(
        "--n",
        type=int,
        nargs="+",
        help="Node counts for optimal builds, m = C(n, k) (default: 5 7).",
    )
    bench.add_argument("--seed", type=int, help="Seed for the random inputs.")
    return parser


COMMANDS = {
    "design": cmd_design,
    "build": cmd_build,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "audit": cmd_audit,
    "bench": cmd_bench,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    log_path = configure_logging(args.log_file)
    LOGGER.info(
        "event=process_started command=%r log_file=%s",
        " ".join(sys.argv if argv is None else ["dssp_cli", *argv]),
        log_path,
    )

    try:
        budgets = load_budget_config()
        if args.budget is not None:
            if args.budget <= 0:
                raise ValueError(f"--budget must be positive; got {args.budget}")
            budgets = BudgetConfig(args.budget, args.budget, budgets.correctness_trials)
        status = COMMANDS[args.command](args, budgets)
    except (DsspError, ValueError, FileNotFoundError) as exc:
        LOGGER.exception("event=process_failed error=%s", type(exc).__name__)
        print(f"[ERROR] {type(exc).__name__}: {exc}")
        return 2
    except Exception:
        LOGGER.exception("event=process_failed")
        raise
    LOGGER.info("event=process_finished status=%s", status)
    return status


if __name__ == "__main__":
    sys.exit(main())
