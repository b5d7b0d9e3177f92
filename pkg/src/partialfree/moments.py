"""Moment/cumulant conversions and the two convolutions of spectral laws.

Moment sequences are plain sequences indexed by order with mu[0] = 1.
Free cumulant sequences nu have nu[0] = 1 by convention; classical
cumulant sequences kappa use kappa[0] = 0 as a placeholder so that
kappa[j] is the j-th cumulant throughout.

Free cumulants are read off the compositional inverse of the moment
generating series; classical cumulants come from the log of the
exponential moment generating series.  Both families add componentwise
under their respective convolutions of spectral measures.

The joint-moment rules at the bottom are the exact side of the freeness
test: a cyclic two-letter word has one value forced by classical
independence (letters commute) and another forced by free independence
(all centered alternating products vanish).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, isfinite, pi, sqrt, asin

from .series import PowerSeries, _is_exact, cauchy_series_from_moments, complete_bell
from .words import Word, word_expansion


def _check_moments(mu, name: str = "mu"):
    mu = tuple(mu)
    if not mu or mu[0] != 1:
        raise ValueError(f"{name} must satisfy {name}[0] = 1, got {mu[:1]!r}")
    return mu


# Series reversion in doubles stays comfortably below 1e-12 error through
# order 10 and degrades to ~1e-10 beyond; higher orders run on exact
# rationals internally (floats convert losslessly) and round once at the end.
_EXACT_INTERNAL_ORDER = 11


def free_cumulants_from_moments(mu) -> list:
    """Free cumulants nu_0..nu_K of a moment sequence mu_0..mu_K.

    The generating series G(u) = sum mu_k u^(k+1) is reverted; writing the
    inverse as F(w) = w * H(w)^(-1), the coefficients of H are the free
    cumulants (nu_0 = 1).
    """
    mu = _check_moments(mu)
    exact = _is_exact(mu)
    work = mu if exact or len(mu) <= _EXACT_INTERNAL_ORDER else tuple(_exactify(mu))
    g = cauchy_series_from_moments(work)        # order K+1, zero constant term
    f = g.revert()                              # F(w) = w + f_2 w^2 + ...
    f_over_w = PowerSeries(f.coeffs[1:])        # F(w)/w, constant term 1
    h = f_over_w.reciprocal()
    if not exact and work is not mu:
        return [float(c) for c in h.coeffs]
    return list(h.coeffs)


def moments_from_free_cumulants(nu) -> list:
    """Inverse of :func:`free_cumulants_from_moments`."""
    nu = tuple(nu)
    if not nu or nu[0] != 1:
        raise ValueError(f"free cumulants must satisfy nu[0] = 1, got {nu[:1]!r}")
    exact = _is_exact(nu)
    work = nu if exact or len(nu) <= _EXACT_INTERNAL_ORDER else tuple(_exactify(nu))
    h = PowerSeries(work)
    f = PowerSeries((0,) + h.reciprocal().coeffs)   # F(w) = w / H(w)
    g = f.revert()
    if not exact and work is not nu:
        return [float(c) for c in g.coeffs[1:]]
    return list(g.coeffs[1:])


def _log_series(order: int) -> PowerSeries:
    one = Fraction(1)
    return PowerSeries((0,) + tuple((-one if m % 2 == 0 else one) / m
                                    for m in range(1, order + 1)))


def _exactify(values):
    """Exact rational copy of a numeric sequence (floats convert losslessly)."""
    return [v if isinstance(v, (int, Fraction)) else Fraction(float(v)) for v in values]


def classical_cumulants_from_moments(mu) -> list:
    """Classical cumulants kappa_1..kappa_K (kappa[0] = 0 placeholder).

    kappa is the log of the exponential moment generating series:
    log(sum mu_n t^n / n!) = sum kappa_n t^n / n!.  The factorial weights
    amplify rounding badly at higher orders, so the composition always runs
    in exact rational arithmetic; float inputs come back as floats.
    """
    mu = _check_moments(mu)
    exact = _is_exact(mu)
    work = _exactify(mu)
    order = len(work) - 1
    fact = Fraction(1)
    egf = [Fraction(1)]
    for n in range(1, order + 1):
        fact = fact / n
        egf.append(work[n] * fact)
    shifted = PowerSeries((0,) + tuple(egf[1:]))
    log_egf = _log_series(order).compose(shifted)
    kappa = [Fraction(0)]
    fact = Fraction(1)
    for n in range(1, order + 1):
        fact = fact * n
        kappa.append(log_egf.coeffs[n] * fact)
    return kappa if exact else [float(v) for v in kappa]


def moments_from_classical_cumulants(kappa) -> list:
    """Moments from classical cumulants: mu_n = B_n(kappa_1..kappa_n)."""
    kappa = tuple(kappa)
    if not kappa:
        raise ValueError("empty cumulant sequence")
    exact = _is_exact(kappa)
    tail = _exactify(kappa[1:])
    out = [complete_bell(n, tail[:n]) for n in range(len(kappa))]
    return out if exact else [float(v) for v in out]


def _convolve(mu_a, mu_b, order, to_cumulants, from_cumulants):
    mu_a = _check_moments(mu_a, "mu_a")
    mu_b = _check_moments(mu_b, "mu_b")
    if order is None:
        order = min(len(mu_a), len(mu_b)) - 1
    if order >= min(len(mu_a), len(mu_b)):
        raise ValueError(
            f"order {order} exceeds the available moments "
            f"({len(mu_a) - 1} and {len(mu_b) - 1})"
        )
    ca = to_cumulants(mu_a[: order + 1])
    cb = to_cumulants(mu_b[: order + 1])
    summed = [ca[0]] + [ca[j] + cb[j] for j in range(1, order + 1)]
    return from_cumulants(summed)


def free_convolve(mu_a, mu_b, order: int | None = None) -> list:
    """Moments of the free additive convolution through ``order``.

    Free cumulants add for k >= 1; nu_0 stays 1, which keeps the result a
    normalized moment sequence.
    """
    return _convolve(mu_a, mu_b, order,
                     free_cumulants_from_moments, moments_from_free_cumulants)


def classical_convolve(mu_a, mu_b, order: int | None = None) -> list:
    """Moments of the classical additive convolution through ``order``."""
    return _convolve(mu_a, mu_b, order,
                     classical_cumulants_from_moments, moments_from_classical_cumulants)


@dataclass(frozen=True)
class AtomicMeasure:
    """A finite discrete measure: ((location, weight), ...), weights sum to 1."""

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        atoms = tuple((loc, w) for loc, w in self.atoms)
        if not atoms:
            raise ValueError("an atomic measure needs at least one atom")
        locations = [loc for loc, _ in atoms]
        if len(set(locations)) != len(locations):
            raise ValueError(f"atom locations must be distinct, got {locations}")
        if any(w <= 0 for _, w in atoms):
            raise ValueError("atom weights must be positive")
        total = sum(w for _, w in atoms)
        if _is_exact([w for _, w in atoms]):
            if total != 1:
                raise ValueError(f"weights must sum to 1, got {total}")
        elif not abs(total - 1) <= 1e-9:
            raise ValueError(f"weights must sum to 1, got {total}")
        object.__setattr__(self, "atoms", atoms)

    def moments(self, order: int) -> list:
        return [sum(w * loc**k for loc, w in self.atoms) for k in range(order + 1)]


def atomic_classical_convolve(a: AtomicMeasure, b: AtomicMeasure) -> AtomicMeasure:
    """All pairwise sums of atoms with product weights, merged on collision."""
    merged: dict = {}
    for loc_a, w_a in a.atoms:
        for loc_b, w_b in b.atoms:
            loc = loc_a + loc_b
            merged[loc] = merged.get(loc, 0) + w_a * w_b
    return AtomicMeasure(tuple(sorted(merged.items())))


def arcsine_density(x: float) -> float:
    """Density 1/(pi sqrt(4 - x^2)) on (-2, 2), zero outside."""
    if not isfinite(x):
        raise ValueError(f"need a finite point, got {x}")
    if abs(x) >= 2:
        return 0.0
    return 1.0 / (pi * sqrt(4.0 - x * x))


def arcsine_cdf(x: float) -> float:
    """Distribution function of the arcsine law on [-2, 2]."""
    if x <= -2:
        return 0.0
    if x >= 2:
        return 1.0
    return 0.5 + asin(x / 2.0) / pi


def _letter_moments(word: Word, mu_a, mu_b):
    if word.k > 2 or any(letter > 1 for letter, _ in word.blocks):
        raise ValueError("joint-moment rules are defined for two-letter words")
    return (_check_moments(mu_a, "mu_a"), _check_moments(mu_b, "mu_b"))


def _pure_moment(mus, letter: int, order: int):
    mu = mus[letter]
    if order >= len(mu):
        raise ValueError(
            f"word needs moment of order {order} for letter {letter}, "
            f"only {len(mu) - 1} available"
        )
    return mu[order]


def classical_joint_moment(word: Word, mu_a, mu_b):
    """Joint moment under classical independence: letters commute.

    The value is mu_{sum of A-exponents}(A) * mu_{sum of B-exponents}(B).
    """
    mus = _letter_moments(word, mu_a, mu_b)
    totals = [0, 0]
    for letter, exponent in word.blocks:
        totals[letter] += exponent
    return _pure_moment(mus, 0, totals[0]) * _pure_moment(mus, 1, totals[1])


def free_joint_moment(word: Word, mu_a, mu_b):
    """The unique joint-moment value forced by free independence.

    Expanding the product of centered blocks (X^e - <X^e>) and requiring it
    to vanish expresses the word as a signed sum over subsets of blocks
    replaced by their scalar means; deleting blocks shortens the word and
    cyclic merging re-normalizes it, so the recursion terminates.  Values
    are memoized per call on the canonical rotation.
    """
    mus = _letter_moments(word, mu_a, mu_b)
    memo: dict[Word, object] = {}

    def net(w: Word):
        blocks = w.blocks
        if not blocks:
            return 1
        if len(blocks) == 1:
            letter, exponent = blocks[0]
            return _pure_moment(mus, letter, exponent)
        cached = memo.get(w)
        if cached is not None:
            return cached
        total = 0
        nblocks = len(blocks)
        for mask in range(1, 1 << nblocks):
            scalar = 1
            rest = []
            for i, block in enumerate(blocks):
                if mask >> i & 1:
                    scalar *= _pure_moment(mus, block[0], block[1])
                else:
                    rest.append(block)
            if scalar == 0:
                continue
            sign = -1 if bin(mask).count("1") % 2 else 1
            sub = Word(tuple(rest), w.k).canonical()
            total += sign * scalar * net(sub)
        value = -total
        memo[w] = value
        return value

    return net(word.canonical())


def sum_moment_free(n: int, mu_a, mu_b):
    """Moment of order n of A + B predicted by freeness, via the word expansion.

    Sums multiplicity * free_joint_moment over all (n, 2)-necklaces.  Agrees
    with coefficient n of free_convolve; the two routes share no code and
    cross-validate each other.
    """
    if n < 0:
        raise ValueError(f"need n >= 0, got {n}")
    total = 0
    for necklace in word_expansion(n, 2):
        total += necklace.multiplicity * free_joint_moment(necklace.word, mu_a, mu_b)
    return total
