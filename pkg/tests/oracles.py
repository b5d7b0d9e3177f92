"""Independent brute-force references shared by the test modules.

Everything here recomputes results by a different route than the library:
strings are grouped by literal rotation, free moments come from explicit
non-crossing partitions, series reversion from the Lagrange formula, and
word traces from index sums over matrix entries.  None of it calls the
code paths under test beyond basic data types.
"""

from fractions import Fraction
from itertools import product

import numpy as np


def rotation_classes(n, k):
    """Map canonical string -> class size, by grouping all k**n strings."""
    classes = {}
    for symbols in product(range(k), repeat=n):
        canon = min(symbols[i:] + symbols[:i] for i in range(n))
        classes[canon] = classes.get(canon, 0) + 1
    return classes


def rotation_classes_bytes(n, k):
    """Same as rotation_classes but tuned for large n (bytes arithmetic)."""
    classes = {}
    for symbols in product(range(k), repeat=n):
        s = bytes(symbols)
        canon = min(s[i:] + s[:i] for i in range(n))
        classes[canon] = classes.get(canon, 0) + 1
    return classes


def series_reciprocal(coeffs):
    out = [Fraction(1) / coeffs[0]]
    for j in range(1, len(coeffs)):
        out.append(-sum(coeffs[i] * out[j - i] for i in range(1, j + 1)) / coeffs[0])
    return out


def lagrange_revert(coeffs):
    """Compositional inverse via the Lagrange inversion formula.

    g_n = (1/n) [w^(n-1)] (w / f(w))^n for f with f(0) = 0, f'(0) != 0.
    """
    order = len(coeffs) - 1
    f_over_w = [Fraction(c) for c in coeffs[1:]]
    base = series_reciprocal(f_over_w)  # (w/f)^1
    out = [Fraction(0), base[0]]
    power = list(base)
    for n in range(2, order + 1):
        # power <- (w/f)^n, truncated
        power = [sum(power[i] * base[j - i] for i in range(j + 1)) for j in range(order)]
        out.append(power[n - 1] / n)
    return out


def noncrossing_partitions(n):
    """All non-crossing partitions of {0..n-1} as tuples of blocks."""
    if n == 0:
        return [()]
    result = []

    def helper(elements):
        if not elements:
            return [()]
        first, rest = elements[0], elements[1:]
        partitions = []
        # choose the block of `first`: any subset of rest that splits the
        # remainder into independent intervals (non-crossing condition)
        m = len(rest)
        for mask in range(1 << m):
            block = (first,) + tuple(rest[i] for i in range(m) if mask >> i & 1)
            # segments between consecutive block members must be partitioned
            # independently; collect them and recurse
            segments = []
            prev_positions = [i for i in range(m) if mask >> i & 1]
            start = 0
            ok = True
            for pos in prev_positions:
                segments.append(rest[start:pos])
                start = pos + 1
            segments.append(rest[start:])
            subresults = [()]
            for seg in segments:
                seg_parts = helper(seg)
                subresults = [a + b for a in subresults for b in seg_parts]
            partitions.extend((block,) + p for p in subresults)
        return partitions

    return helper(tuple(range(n)))


def moment_from_free_cumulants_nc(nu, n):
    """mu_n as a sum over non-crossing partitions of products of cumulants."""
    total = Fraction(0)
    for partition in noncrossing_partitions(n):
        term = Fraction(1)
        for block in partition:
            term *= Fraction(nu[len(block)])
        total += term
    return total


def classical_cumulants_recursive(mu):
    """kappa_n = mu_n - sum C(n-1, k-1) kappa_k mu_{n-k} (log-EGF recursion)."""
    from math import comb

    kappa = [Fraction(0)]
    for n in range(1, len(mu)):
        value = Fraction(mu[n])
        for k in range(1, n):
            value -= comb(n - 1, k - 1) * kappa[k] * Fraction(mu[n - k])
        kappa.append(value)
    return kappa


def site_sum_word_net(word, adjacency, entry_moments):
    """Expected normalized trace by exact index sums over matrix entries.

    Blocks of the diagonal letter pin indices and deposit entry powers;
    blocks of the adjacency letter contribute integer entries of matrix
    powers.  Expectation factorizes over distinct sites.  Exact rationals.
    """
    n = adjacency.shape[0]
    adj_powers = {1: adjacency.astype(object)}

    def apow(e):
        if e not in adj_powers:
            adj_powers[e] = adj_powers[1] @ apow(e - 1)
        return adj_powers[e]

    def m(order):
        if order == 0:
            return Fraction(1)
        return Fraction(entry_moments[order - 1])

    blocks = word.blocks
    if not blocks:
        return Fraction(1)
    if len(blocks) == 1:
        letter, e = blocks[0]
        if letter == 0:
            return m(e)
        return Fraction(int(np.trace(apow(e))), n)

    # segments: positions between consecutive adjacency blocks (cyclic);
    # each segment carries the diagonal power deposited before its hop
    hops = [e for letter, e in blocks if letter == 1]
    powers = []
    pending = 0
    for letter, e in blocks:
        if letter == 0:
            pending += e
        else:
            powers.append(pending)
            pending = 0
    if pending:  # word ends with the diagonal letter: wraps onto segment 0
        powers[0] += pending

    segments = len(hops)
    total = Fraction(0)
    for sites in product(range(n), repeat=segments):
        weight = Fraction(1)
        for j in range(segments):
            entry = apow(hops[j])[sites[j], sites[(j + 1) % segments]]
            if entry == 0:
                weight = Fraction(0)
                break
            weight *= int(entry)
        if weight == 0:
            continue
        collected = {}
        for j in range(segments):
            collected[sites[j]] = collected.get(sites[j], 0) + powers[j]
        for site, power in collected.items():
            weight *= m(power)
            if weight == 0:
                break
        total += weight
    return total / n
