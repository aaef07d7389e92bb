"""Exception types shared across the package.

Domain errors (bad indices, shape mismatches, invalid states) raise plain
``ValueError``; the classes below mark conditions that callers are expected
to branch on.
"""

from __future__ import annotations

from typing import Sequence


class ResourceCapError(RuntimeError):
    """Raised when a computation would exceed the configured mode cap."""


class SingularSpectrumError(ValueError):
    """Raised when the closed-form circulant spectrum hits a vanishing
    denominator; carries the offending eigenvalue indices."""

    def __init__(self, singular_ks: Sequence[int]):
        self.singular_ks = tuple(singular_ks)
        super().__init__(
            "closed-form eigenvalue denominator vanishes at k = "
            + ", ".join(str(k) for k in self.singular_ks))
