"""Shared retry policy for remote provider calls.

Transport failures and retryable HTTP statuses (5xx, 429) get up to three
attempts with exponential backoff starting at 250 ms.  The sleep function
is injectable so tests can observe delays without waiting.
"""

from __future__ import annotations

import time
from typing import Callable, TypeVar

from .errors import ProviderUnreachable

MAX_ATTEMPTS = 3
BASE_DELAY_SECONDS = 0.25

T = TypeVar("T")


class TransientFailure(Exception):
    """Raised inside a retried callable to signal a retryable failure."""


def with_retries(
    fn: Callable[[], T],
    *,
    attempts: int = MAX_ATTEMPTS,
    sleep: Callable[[float], None] = time.sleep,
) -> T:
    """Call fn, retrying on TransientFailure; other exceptions propagate.

    Delays between attempts double from BASE_DELAY_SECONDS.  When all
    attempts fail, raises ProviderUnreachable carrying the last failure.
    """
    last: TransientFailure | None = None
    for attempt in range(attempts):
        if attempt > 0:
            sleep(BASE_DELAY_SECONDS * (2 ** (attempt - 1)))
        try:
            return fn()
        except TransientFailure as exc:
            last = exc
    raise ProviderUnreachable(f"provider unreachable after {attempts} attempts: {last}")
