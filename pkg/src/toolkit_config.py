"""Shared runtime plumbing for the DSSP toolkit.

- Configures the rotating file logger used by every module
- Loads search/enumeration budgets from config/budgets.yaml and DSSP_BUDGET
- Defines the error base class the CLI maps onto exit codes
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from logging.handlers import RotatingFileHandler

import yaml

# =========================
# CONFIG
# =========================

LOG_PATH = os.path.join("logs", "dssp_toolkit.log")
LOG_MAX_BYTES = 1_000_000
LOG_BACKUP_COUNT = 5
LOGGER = logging.getLogger("dssp")
ACTIVE_LOG_PATH: str | None = None

BUDGET_CONFIG_PATH = os.path.join("config", "budgets.yaml")
BUDGET_ENV_VAR = "DSSP_BUDGET"
DEFAULT_SEARCH_BUDGET = 10_000_000
DEFAULT_ENUMERATION_BUDGET = 1_000_000
DEFAULT_CORRECTNESS_TRIALS = 100


class DsspError(Exception):
    """Base class for every error raised by the toolkit."""


class BudgetExhausted(DsspError):
    """Raised when a search or enumeration runs out of its node budget."""

    def __init__(self, what: str, budget: int):
        super().__init__(f"{what}: budget of {budget} exhausted before a verdict")
        self.what = what
        self.budget = budget


def configure_logging(log_path: str = LOG_PATH) -> str:
    """Configure the file logger once and return the absolute log path."""
    global ACTIVE_LOG_PATH

    if LOGGER.handlers:
        return ACTIVE_LOG_PATH or os.path.abspath(log_path)

    resolved_path = os.path.abspath(log_path)
    log_dir = os.path.dirname(resolved_path)
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)

    LOGGER.setLevel(logging.INFO)
    LOGGER.propagate = False

    handler = RotatingFileHandler(
        resolved_path,
        maxBytes=LOG_MAX_BYTES,
        backupCount=LOG_BACKUP_COUNT,
        encoding="utf-8",
    )
    handler.setFormatter(
        logging.Formatter(
            "%(asctime)s %(levelname)s %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S%z",
        )
    )
    LOGGER.addHandler(handler)
    ACTIVE_LOG_PATH = resolved_path
    return resolved_path


def log_list(values: list[object]) -> str:
    """Format a short list for structured-ish log messages."""
    return ",".join(str(value) for value in values) if values else "none"


# =========================
# BUDGETS
# =========================


@dataclass(frozen=True)
class BudgetConfig:
    search_budget: int = DEFAULT_SEARCH_BUDGET
    enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET
    correctness_trials: int = DEFAULT_CORRECTNESS_TRIALS


def _coerce_budget_value(value: object) -> int | None:
    """Best-effort positive int conversion; returns None on invalid input."""
    try:
        number = int(value) if value is not None else None
    except (TypeError, ValueError):
        return None
    if number is None or number <= 0:
        return None
    return number


def _budget_from_env() -> int | None:
    """Return the DSSP_BUDGET override, raising on a malformed value."""
    raw = os.environ.get(BUDGET_ENV_VAR, "").strip()
    if not raw:
        return None
    number = _coerce_budget_value(raw)
    if number is None:
        raise ValueError(f"{BUDGET_ENV_VAR} must be a positive integer; got {raw!r}")
    return number


def load_budget_config(path: str = BUDGET_CONFIG_PATH) -> BudgetConfig:
    """Load budgets from budgets.yaml, then apply the DSSP_BUDGET override."""
    values = {
        "search_budget": DEFAULT_SEARCH_BUDGET,
        "enumeration_budget": DEFAULT_ENUMERATION_BUDGET,
        "correctness_trials": DEFAULT_CORRECTNESS_TRIALS,
    }

    if os.path.exists(path):
        with open(path, encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}
        budgets_raw = raw.get("budgets") if isinstance(raw, dict) else None
        if isinstance(budgets_raw, dict):
            for key in values:
                coerced = _coerce_budget_value(budgets_raw.get(key))
                if coerced is not None:
                    values[key] = coerced

    env_budget = _budget_from_env()
    if env_budget is not None:
        values["search_budget"] = env_budget
        values["enumeration_budget"] = env_budget

    return BudgetConfig(**values)
