"""Repo-wide guard on quadratic-memory code paths.

Every function that allocates a C x C buffer calls :func:`check_dense` first.
:func:`dense_forbidden` drops the cap to zero for the duration of a block, which
is how the scaling benchmark proves that it never touches a dense path.
"""
from contextlib import contextmanager
from contextvars import ContextVar

from .errors import SizeError

DEFAULT_DENSE_CAP = 4096

_cap: ContextVar[int] = ContextVar("lapcov_dense_cap", default=DEFAULT_DENSE_CAP)


def dense_cap() -> int:
    return _cap.get()


def check_dense(c: int, what: str = "dense path") -> None:
    cap = _cap.get()
    if c > cap:
        raise SizeError(f"{what}: dimension {c} exceeds dense cap {cap}")


@contextmanager
def dense_cap_set(cap: int):
    """Temporarily change the dense cap in the current context."""
    token = _cap.set(int(cap))
    try:
        yield
    finally:
        _cap.reset(token)


def dense_forbidden():
    """Context in which any dense allocation raises :class:`SizeError`."""
    return dense_cap_set(0)
