"""Exact expected word traces for diagonal-plus-adjacency models.

For A = diag(g_1..g_N) with i.i.d. entries and B a 0/1 adjacency matrix,
the normalized expected trace of a two-letter word is a sum over closed
walks on the graph of B: each B factor hops along an edge, each A^e factor
deposits e powers of g at the walker's current site, and independence
factorizes the expectation into a product of pure entry moments, one per
distinct site visited.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ResourceLimitError
from .words import Word

DEFAULT_MAX_HOPS = 20


def gaussian_entry_moments(order: int):
    """Moments m_1..m_order of a standard Gaussian entry: 0, 1, 0, 3, 0, 15, ..."""
    if order < 1:
        raise ValueError(f"need order >= 1, got {order}")
    out = []
    for k in range(1, order + 1):
        if k % 2:
            out.append(0)
        else:
            value = 1
            for j in range(1, k, 2):
                value *= j
            out.append(value)
    return tuple(out)


@dataclass(frozen=True)
class LatticeModel:
    """Adjacency structure of B plus entry moments of the diagonal of A.

    ``entry_moments`` is indexed from order 1 (m_1, m_2, ...); order 0 is
    implicitly 1.  ``translation_invariant`` marks vertex-transitive graphs
    (set by the chain constructor for circulant chains) so walk sums can fix
    the start site instead of averaging over all of them.
    """

    adjacency: np.ndarray
    entry_moments: tuple
    translation_invariant: bool = False
    max_hops: int = DEFAULT_MAX_HOPS

    def __post_init__(self):
        adj = np.asarray(self.adjacency)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {adj.shape}")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diagonal(adj) != 0):
            raise ValueError("adjacency must have a zero diagonal")
        if not np.all((adj == 0) | (adj == 1)):
            raise ValueError("adjacency entries must be 0 or 1")
        object.__setattr__(self, "adjacency", adj.astype(np.int64))
        object.__setattr__(self, "entry_moments", tuple(self.entry_moments))

    @classmethod
    def chain(cls, n: int, entry_moments, circulant: bool = True,
              max_hops: int = DEFAULT_MAX_HOPS) -> "LatticeModel":
        if n < 2:
            raise ValueError(f"a chain needs at least 2 sites, got {n}")
        adj = np.zeros((n, n), dtype=np.int64)
        for i in range(n - 1):
            adj[i, i + 1] = adj[i + 1, i] = 1
        wrap = circulant and n > 2
        if wrap:
            adj[0, n - 1] = adj[n - 1, 0] = 1
        return cls(adj, tuple(entry_moments), translation_invariant=wrap,
                   max_hops=max_hops)

    @property
    def size(self) -> int:
        return self.adjacency.shape[0]

    def is_open_chain(self) -> bool:
        expected = LatticeModel.chain(self.size, self.entry_moments,
                                      circulant=False).adjacency
        return np.array_equal(self.adjacency, expected)

    def entry_moment(self, order: int):
        if order == 0:
            return 1
        if order > len(self.entry_moments):
            raise ValueError(
                f"word needs entry moment m_{order}, only {len(self.entry_moments)} given"
            )
        return self.entry_moments[order - 1]


def _word_ops(word: Word):
    """Flatten a word into deposit/hop operations; returns (ops, total hops)."""
    ops = []
    hops = 0
    for letter, exponent in word.blocks:
        if letter == 0:
            ops.append(("deposit", exponent))
        else:
            ops.append(("hop", exponent))
            hops += exponent
    return ops, hops


def _walk_sum(model: LatticeModel, ops, start: int):
    """Sum of expected weights over closed walks from ``start`` following ops."""
    neighbors = [np.flatnonzero(model.adjacency[i]) for i in range(model.size)]
    exact = all(isinstance(m, (int, Fraction)) for m in model.entry_moments)
    zero = Fraction(0) if exact else 0.0
    total = zero

    def visit(op_index, hop_index, site, deposits):
        nonlocal total
        if op_index == len(ops):
            if site == start:
                weight = 1
                for powered in deposits.values():
                    weight *= model.entry_moment(powered)
                total += weight
            return
        kind, amount = ops[op_index]
        if kind == "deposit":
            deposits[site] = deposits.get(site, 0) + amount
            visit(op_index + 1, hop_index, site, deposits)
            deposits[site] -= amount
            if deposits[site] == 0:
                del deposits[site]
        elif amount == hop_index + 1:
            # last hop of this block: advance to the next op
            for nxt in neighbors[site]:
                visit(op_index + 1, 0, int(nxt), deposits)
        else:
            for nxt in neighbors[site]:
                visit(op_index, hop_index + 1, int(nxt), deposits)

    visit(0, 0, start, {})
    return total


def exact_word_net(word: Word, model: LatticeModel):
    """Exact normalized expected trace of a two-letter word on the model.

    The letter A (index 0) is the i.i.d. diagonal matrix, B (index 1) the
    adjacency matrix.  Exact rational output when the entry moments are
    exact numbers.
    """
    word = word.canonical()
    if any(letter > 1 for letter, _ in word.blocks):
        raise ValueError("walk sums are defined for two-letter words")
    if word.length == 0:
        return 1
    ops, hops = _word_ops(word)
    if hops > model.max_hops:
        raise ResourceLimitError(
            f"word requires {hops} hops, above the configured bound {model.max_hops}"
        )
    if model.translation_invariant:
        return _walk_sum(model, ops, 0)
    total = sum(_walk_sum(model, ops, s) for s in range(model.size))
    n = model.size
    if isinstance(total, (int, Fraction)):
        return Fraction(total, n) if isinstance(total, int) else total / n
    return total / n


def boundary_corrected_word_net(word: Word, model: LatticeModel):
    """Walk sum on the open chain, where paths may not cross the endpoints.

    Requires the model's adjacency to be the open (non-circulant) chain;
    endpoint clipping is what produces the O(1/N) departure from the
    translation-invariant value.
    """
    if not model.is_open_chain():
        raise ValueError("boundary correction applies to the open chain only")
    return exact_word_net(word, model)
