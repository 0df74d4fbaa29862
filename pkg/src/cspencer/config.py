"""Global numerical conventions shared by every module."""
import os

#: Margin used whenever a strict inequality from the theory is checked
#: numerically: ``v > c`` is reported only if ``v > c + EPS``.
EPS = 1e-9

#: Margin above 3 required before a grid subset is declared coverable.
COVER_MARGIN = 1e-6

#: Initial number of cells per angle for the certified grid searches.
INITIAL_CELLS = 64

#: Initial number of cells along a linear (modulus) coordinate.
INITIAL_LINEAR_CELLS = 16

#: Hard cap on live cells per branch-and-bound level.
MAX_CELLS = 4_000_000

THREADS_ENV = "CSPENCER_THREADS"


def default_threads():
    """Thread count from ``CSPENCER_THREADS`` (defaults to 1)."""
    raw = os.environ.get(THREADS_ENV, "")
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)
