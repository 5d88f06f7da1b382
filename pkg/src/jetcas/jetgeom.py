"""Jet-space combinatorics: coordinate enumeration and dimension counts."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from math import comb

from .expr import Symbol, jet


@dataclass(frozen=True)
class BundleSpec:
    """A fibered manifold in adapted coordinates: base variables and fiber variables."""

    base: tuple
    fiber: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(self.base))
        object.__setattr__(self, "fiber", tuple(self.fiber))
        names = self.base + self.fiber
        if not self.base or not self.fiber:
            raise ValueError("a bundle needs at least one base and one fiber variable")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in bundle {self.name!r}")

    @property
    def m(self) -> int:
        return len(self.base)

    @property
    def e(self) -> int:
        return len(self.fiber)

    def jet_key(self, s: Symbol) -> tuple:
        """Position of a jet coordinate in the canonical column order."""
        pos = {b: i for i, b in enumerate(self.base)}
        return (s.order, self.fiber.index(s.name), tuple(sorted(pos[v] for v in s.idx)))


def dim_jet(m: int, e: int, k: int) -> int:
    """Dimension of J^k(E) for dim M = m and fiber dimension e."""
    return m + e * comb(m + k, k)


def fiber_increment(m: int, e: int, k: int) -> int:
    """Number of new coordinates going from J^(k-1) to J^k."""
    return e * comb(m - 1 + k, k)


def dim_sym(m: int, k: int) -> int:
    """Dimension of the symmetric power S^k T^*."""
    return comb(m - 1 + k, k)


def dim_sym_restricted(m: int, k: int, j: int) -> int:
    """Dimension of S^{k,j} T^*, indices confined to j+1..m."""
    if not 0 <= j <= m - 1:
        raise ValueError(f"restriction j={j} outside 0..{m - 1}")
    return comb(m - j - 1 + k, k)


def multi_indices(base, k: int, j: int = 0) -> list:
    """Sorted multi-indices of length k over base[j:], ascending in base order."""
    return list(combinations_with_replacement(tuple(base)[j:], k))


def enumerate_jet_coords(bundle: BundleSpec, k: int, j: int | None = None) -> list:
    """All u^a_sigma with |sigma| = k (optionally min(sigma) >= j+1), dependent-major."""
    if j is not None and not 0 <= j <= bundle.m - 1:
        raise ValueError(f"restriction j={j} outside 0..{bundle.m - 1}")
    sigmas = multi_indices(bundle.base, k, j or 0)
    return [jet(dep, *sigma) for dep in bundle.fiber for sigma in sigmas]


def jet_coords_upto(bundle: BundleSpec, k: int) -> list:
    """Fiber coordinates of J^k(E) in canonical order."""
    out = []
    for r in range(k + 1):
        out.extend(enumerate_jet_coords(bundle, r))
    return out
