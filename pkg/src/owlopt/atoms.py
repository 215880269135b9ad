"""Atoms of the OWL ball and the linear oracle over it.

The unit ball of an OWL norm is the convex hull of finitely many atoms:
for each level i there is a canonical atom with i leading entries equal to
1 / (w_1 + ... + w_i), and the full set is its orbit under signed
permutations.  Maximizing a linear objective over the ball therefore needs
only the best level, found from one sorted cumulative sum.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .norms import _as_float_vector, as_weights, decompose, recompose
from .proximal import OwlBall

__all__ = [
    "Atom",
    "SignedAtom",
    "base_atoms",
    "enumerate_atoms",
    "linear_oracle",
]

# 3**n - 1 signed atoms; past this the enumeration is refused.
_ENUMERATE_MAX_N = 12


@dataclass(frozen=True)
class Atom:
    """Canonical extreme point: level leading entries equal to tau, rest zero."""

    level: int
    tau: float
    n: int

    def __post_init__(self):
        if not (1 <= self.level <= self.n):
            raise ValueError(f"level must be in 1..{self.n}, got {self.level}")
        if not (np.isfinite(self.tau) and self.tau > 0):
            raise ValueError("tau must be positive and finite")

    def materialize(self) -> np.ndarray:
        vec = np.zeros(self.n)
        vec[: self.level] = self.tau
        return vec


@dataclass(frozen=True)
class SignedAtom:
    """A canonical atom scattered onto chosen indices with chosen signs."""

    base: Atom
    support: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        k = self.base.level
        if len(self.support) != k or len(self.signs) != k:
            raise ValueError("support and signs must both have length = level")
        if len(set(self.support)) != k:
            raise ValueError("support indices must be distinct")
        if any(not (0 <= j < self.base.n) for j in self.support):
            raise ValueError("support indices out of range")
        if any(s not in (-1, 1) for s in self.signs):
            raise ValueError("signs must be -1 or +1")

    def materialize(self) -> np.ndarray:
        vec = np.zeros(self.base.n)
        vec[list(self.support)] = np.asarray(self.signs, dtype=np.float64) * self.base.tau
        return vec


def base_atoms(w) -> list[Atom]:
    """The canonical atom of every level: tau_i = 1 / (w_1 + ... + w_i)."""
    w = as_weights(w)
    n = len(w)
    return [Atom(level=i + 1, tau=float(1.0 / w.prefix_sums[i]), n=n)
            for i in range(n)]


def enumerate_atoms(w) -> np.ndarray:
    """Materialize every signed atom as the rows of an array.

    The row count is exactly 3**n - 1.  Exponential in n; refused above
    n = 12.  Rows are deduplicated on their canonical (level, support,
    signs) encoding, which the generation order never repeats.
    """
    w = as_weights(w)
    n = len(w)
    if n > _ENUMERATE_MAX_N:
        raise ValueError(f"atom enumeration is limited to n <= {_ENUMERATE_MAX_N}, "
                         f"got n = {n}")
    rows = np.zeros((3 ** n - 1, n))
    seen: set[tuple] = set()
    r = 0
    for atom in base_atoms(w):
        for support in itertools.combinations(range(n), atom.level):
            idx = list(support)
            for signs in itertools.product((1, -1), repeat=atom.level):
                key = (atom.level, support, signs)
                if key in seen:
                    continue
                seen.add(key)
                rows[r, idx] = np.multiply(signs, atom.tau)
                r += 1
    return rows[:r]


def linear_oracle(g, ball: OwlBall) -> np.ndarray:
    """Maximize the inner product with g over an OWL ball of radius epsilon.

    The maximizer is a scaled signed atom: the level with the largest ratio
    of leading magnitude sum to weight prefix sum, placed on the largest
    magnitudes of g and carrying g's signs.  Ties pick the smallest level
    (the sparsest atom).  A zero g returns the level-1 atom at index 0 with
    positive sign.

    Parameters
    ----------
    g : array_like
        Linear objective (for solvers, the negative gradient).
    ball : OwlBall

    Returns
    -------
    ndarray
        The maximizing point; its inner product with g equals
        ball.radius * dual_norm(g, ball.weights).
    """
    w = ball.weights
    g = _as_float_vector(g, "g")
    if g.size != len(w):
        raise ValueError(f"g has length {g.size}, ball has dimension {ball.dim}")
    if not np.any(g):
        out = np.zeros(g.size)
        out[0] = ball.radius / float(w.prefix_sums[0])
        return out
    dec = decompose(g)
    scores = np.cumsum(dec.sorted_abs) / w.prefix_sums
    level = int(np.argmax(scores)) + 1  # first maximum, so the smallest level
    t = np.zeros(g.size)
    t[:level] = ball.radius / float(w.prefix_sums[level - 1])
    return recompose(dec, t)
