"""Shared budgets, errors and the worker-pool helper."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

DEFAULT_MAX_EVALUATIONS = 200_000_000


class CircleKitError(Exception):
    """Base class for user-facing errors."""


class BudgetExceeded(CircleKitError):
    """An exponential-cost operation would exceed ``Budget.max_evaluations``."""

    def __init__(self, operation: str, needed: int, allowed: int):
        self.operation = operation
        self.needed = needed
        self.allowed = allowed
        super().__init__(f"{operation}: needs {needed} evaluations, budget is {allowed}")


@dataclass(frozen=True)
class Budget:
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS
    workers: int = 1

    def require(self, operation: str, needed: int) -> None:
        if needed > self.max_evaluations:
            raise BudgetExceeded(operation, int(needed), self.max_evaluations)


DEFAULT_BUDGET = Budget()


def resolve(budget: Budget | None) -> Budget:
    return DEFAULT_BUDGET if budget is None else budget


def map_ordered(fn: Callable[[T], R], tasks: Sequence[T], workers: int = 1) -> list[R]:
    """Apply ``fn`` to every task, returning results in task order.

    With ``workers > 1`` the tasks run in a process pool; ``fn`` and the tasks
    must then be picklable. Result order never depends on scheduling.
    """
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def chunked(n: int, size: int) -> Iterable[tuple[int, int]]:
    for start in range(0, n, size):
        yield start, min(n, start + size)
