"""Random-matrix ensembles and Monte Carlo estimation of trace statistics.

Sampling is reproducible and splittable: every sample index gets its own
generator derived from (master seed, index, purpose), so identical seeds
reproduce bit-identical matrices regardless of evaluation order and
distinct indices give independent streams.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError
from .words import Word

_SYMMETRY_ATOL = 1e-12

_PAIR, _HAAR, _PERM = 0, 1, 2


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for a (seed, key...) address."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def _require_symmetric(m: np.ndarray, what: str, atol: float) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{what} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{what} contains non-finite entries")
    scale = max(1.0, float(np.abs(m).max())) if m.size else 1.0
    skew = float(np.abs(m - m.T).max()) if m.size else 0.0
    if skew > atol * scale:
        raise ValueError(f"{what} is not symmetric: max |M - M^T| = {skew:.3e}")
    return m


@dataclass(frozen=True)
class MatrixPairSample:
    """One realization (A, B) of a pair of real-symmetric matrices."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = _require_symmetric(self.a, "A", _SYMMETRY_ATOL)
        b = _require_symmetric(self.b, "B", _SYMMETRY_ATOL)
        if a.shape != b.shape:
            raise ValueError(f"A and B must have equal shape, got {a.shape} vs {b.shape}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def dimension(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class SpectrumSample:
    """Sorted eigenvalues of one matrix realization, tagged by its origin."""

    eigenvalues: np.ndarray
    source: str

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float)
        if vals.ndim != 1:
            raise ValueError("eigenvalues must be a flat sequence")
        if np.any(np.diff(vals) < 0):
            raise ValueError("eigenvalues must be sorted ascending")
        object.__setattr__(self, "eigenvalues", vals)


_VARIANTS = (
    "goe",
    "gaussian-diagonal",
    "tridiagonal-adjacency",
    "pauli-block-pair",
    "rotation-pair-2x2",
    "from-file",
)


@dataclass(frozen=True)
class EnsembleSpec:
    """Description of a matrix-pair distribution plus its master seed."""

    variant: str
    dimension: int
    seed: int
    circulant: bool = True
    path: str | None = None

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ConfigError(f"unknown ensemble variant {self.variant!r}")
        if self.dimension < 1:
            raise ConfigError(f"dimension must be >= 1, got {self.dimension}")
        if self.variant == "pauli-block-pair" and self.dimension % 2:
            raise ConfigError("pauli-block-pair needs an even dimension")
        if self.variant == "rotation-pair-2x2" and self.dimension != 2:
            raise ConfigError("rotation-pair-2x2 is fixed at dimension 2")
        if self.variant == "from-file" and not self.path:
            raise ConfigError("from-file needs a path")

    @classmethod
    def goe(cls, dimension: int, seed: int) -> "EnsembleSpec":
        return cls("goe", dimension, seed)

    @classmethod
    def gaussian_diagonal(cls, dimension: int, seed: int) -> "EnsembleSpec":
        return cls("gaussian-diagonal", dimension, seed)

    @classmethod
    def tridiagonal_adjacency(cls, dimension: int, seed: int,
                              circulant: bool = True) -> "EnsembleSpec":
        return cls("tridiagonal-adjacency", dimension, seed, circulant=circulant)

    @classmethod
    def pauli_block_pair(cls, dimension: int, seed: int = 0) -> "EnsembleSpec":
        return cls("pauli-block-pair", dimension, seed)

    @classmethod
    def rotation_pair(cls, seed: int) -> "EnsembleSpec":
        return cls("rotation-pair-2x2", 2, seed)

    @classmethod
    def from_file(cls, path: str, seed: int = 0) -> "EnsembleSpec":
        records = _load_pair_file(path)
        return cls("from-file", records[0].dimension, seed, path=path)

    def describe(self) -> dict:
        out = {"variant": self.variant, "dimension": self.dimension, "seed": self.seed}
        if self.variant == "tridiagonal-adjacency":
            out["circulant"] = self.circulant
        if self.variant == "from-file":
            out["path"] = self.path
        return out


def chain_adjacency(n: int, circulant: bool = True) -> np.ndarray:
    """0/1 adjacency matrix of the n-site chain, optionally with a wrap edge."""
    m = np.zeros((n, n))
    for i in range(n - 1):
        m[i, i + 1] = m[i + 1, i] = 1.0
    if circulant and n > 2:
        m[0, n - 1] = m[n - 1, 0] = 1.0
    return m


def pauli_block_matrices(dimension: int) -> tuple[np.ndarray, np.ndarray]:
    """Direct sums of [[0,1],[1,0]] blocks; B's blocks shifted by one site with wrap."""
    if dimension % 2 or dimension < 2:
        raise ValueError(f"dimension must be even and >= 2, got {dimension}")
    a = np.zeros((dimension, dimension))
    b = np.zeros((dimension, dimension))
    for i in range(0, dimension, 2):
        a[i, i + 1] = a[i + 1, i] = 1.0
    for i in range(1, dimension - 1, 2):
        b[i, i + 1] = b[i + 1, i] = 1.0
    b[0, dimension - 1] = b[dimension - 1, 0] = 1.0
    return a, b


def _rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]])

_file_cache: dict[str, list[MatrixPairSample]] = {}


def _load_pair_file(path: str) -> list[MatrixPairSample]:
    cached = _file_cache.get(path)
    if cached is not None:
        return cached
    if not os.path.exists(path):
        raise InputError(f"{path}: no such file")
    records: list[MatrixPairSample] = []
    dim = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path} line {lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict) or "A" not in obj or "B" not in obj:
                raise InputError(f'{path} line {lineno}: expected an object with "A" and "B"')
            try:
                pair = MatrixPairSample(np.asarray(obj["A"], dtype=float),
                                        np.asarray(obj["B"], dtype=float))
            except (ValueError, TypeError) as exc:
                raise InputError(f"{path} line {lineno}: {exc}") from None
            if dim is None:
                dim = pair.dimension
            elif pair.dimension != dim:
                raise InputError(
                    f"{path} line {lineno}: dimension {pair.dimension} differs "
                    f"from first record ({dim})"
                )
            records.append(pair)
    if not records:
        raise InputError(f"{path}: no records")
    _file_cache[path] = records
    return records


def load_pair_file(path: str) -> list[MatrixPairSample]:
    """Parse (and cache) a JSONL file of matrix pairs."""
    return _load_pair_file(path)


def sample_pair(spec: EnsembleSpec, index: int) -> MatrixPairSample:
    """Draw the ``index``-th pair of the ensemble; deterministic in (seed, index)."""
    n = spec.dimension
    if spec.variant == "from-file":
        records = _load_pair_file(spec.path)
        if index >= len(records):
            raise InputError(
                f"{spec.path}: requested sample {index} but only {len(records)} records"
            )
        return records[index]
    if spec.variant == "pauli-block-pair":
        a, b = pauli_block_matrices(n)
        return MatrixPairSample(a, b)

    rng = stream(spec.seed, index, _PAIR)
    if spec.variant == "goe":
        scale = math.sqrt(2.0 * n)
        ga = rng.standard_normal((n, n))
        gb = rng.standard_normal((n, n))
        return MatrixPairSample((ga + ga.T) / scale, (gb + gb.T) / scale)
    if spec.variant == "gaussian-diagonal":
        return MatrixPairSample(np.diag(rng.standard_normal(n)),
                                np.diag(rng.standard_normal(n)))
    if spec.variant == "tridiagonal-adjacency":
        a = np.diag(rng.standard_normal(n))
        return MatrixPairSample(a, chain_adjacency(n, spec.circulant))
    if spec.variant == "rotation-pair-2x2":
        theta = rng.uniform(0.0, math.pi)
        u, u_inv = _rotation(theta), _rotation(-theta)
        a = u @ _SIGMA_Z @ u_inv
        b = u_inv @ _SIGMA_Z @ u
        return MatrixPairSample(0.5 * (a + a.T), 0.5 * (b + b.T))
    raise AssertionError(f"unhandled variant {spec.variant}")


def haar_orthogonal(n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Orthogonal matrix (or a stack of them) distributed by Haar measure.

    QR of an i.i.d. standard Gaussian matrix, with columns re-signed so the
    triangular factor has a positive diagonal.  Without the sign correction
    the result is not Haar distributed.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    shape = (n, n) if size is None else (size, n, n)
    z = rng.standard_normal(shape)
    q, r = np.linalg.qr(z)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d = np.where(d == 0, 1.0, d)
    return q * d[..., None, :]


def random_permutation(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random n-by-n permutation matrix (Fisher-Yates shuffle)."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    perm = rng.permutation(n)
    m = np.zeros((n, n))
    m[np.arange(n), perm] = 1.0
    return m


def symmetric_eigenvalues(m: np.ndarray, atol: float = 1e-8) -> np.ndarray:
    """All eigenvalues of a symmetric matrix, ascending (LAPACK backed)."""
    m = _require_symmetric(m, "matrix", atol)
    return np.linalg.eigvalsh(m)


def sample_sum_spectrum(pair: MatrixPairSample) -> SpectrumSample:
    """Spectrum of the plain sum A + B."""
    return SpectrumSample(np.linalg.eigvalsh(pair.a + pair.b), "A+B")


def sample_free_sum_spectrum(pair: MatrixPairSample,
                             rng: np.random.Generator) -> SpectrumSample:
    """Spectrum of A + Q B Q^T with a fresh Haar-orthogonal Q."""
    q = haar_orthogonal(pair.dimension, rng)
    m = pair.a + q @ pair.b @ q.T
    return SpectrumSample(np.linalg.eigvalsh(m), "free-rotated")


def sample_classical_sum_spectrum(pair: MatrixPairSample,
                                  rng: np.random.Generator) -> SpectrumSample:
    """Spectrum of Lambda_A + Pi Lambda_B Pi^T with a uniform permutation Pi.

    The permutation shuffles eigenvalues of B against those of A, so the
    aggregated law is the classical convolution of the two spectral laws
    (one eigenvalue of each, paired at random).  Conjugating the raw B by a
    permutation matrix would not achieve this for noncommuting pairs.
    """
    ea = np.linalg.eigvalsh(pair.a)
    eb = np.linalg.eigvalsh(pair.b)
    perm = rng.permutation(pair.dimension)
    return SpectrumSample(np.sort(ea + eb[perm]), "permuted")


@dataclass(frozen=True)
class MomentEstimate:
    """Monte Carlo moment estimates with the standard-error estimate

    SE(mu_k) = sqrt((mu_{2k} - mu_k^2) / t),

    which needs sample moments through twice the requested order.
    """

    values: np.ndarray
    se: np.ndarray
    count: int

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "se", np.asarray(self.se, dtype=float))


def per_sample_moments(eigenvalues: np.ndarray, order: int) -> np.ndarray:
    """Row i holds (1/N) sum_j lambda_ij^k for k = 0..order."""
    eigenvalues = np.atleast_2d(np.asarray(eigenvalues, dtype=float))
    t, _ = eigenvalues.shape
    out = np.empty((t, order + 1))
    out[:, 0] = 1.0
    power = np.ones_like(eigenvalues)
    for k in range(1, order + 1):
        power = power * eigenvalues
        out[:, k] = power.mean(axis=1)
    return out


def estimate_moments(spectra, order: int) -> MomentEstimate:
    """Spectral moments mu_0..mu_order averaged over samples, with SEs."""
    if order < 1:
        raise ValueError(f"need order >= 1, got {order}")
    if len(spectra) == 0:
        raise ValueError("need at least one spectrum sample")
    eigs = np.stack([
        s.eigenvalues if isinstance(s, SpectrumSample) else np.asarray(s, dtype=float)
        for s in spectra
    ])
    table = per_sample_moments(eigs, 2 * order)
    mean = table.mean(axis=0)
    t = table.shape[0]
    variance = np.array([mean[2 * k] - mean[k] ** 2 for k in range(order + 1)])
    se = np.sqrt(np.maximum(0.0, variance) / t)
    return MomentEstimate(mean[: order + 1], se, t)


# ---------------------------------------------------------------------------
# word-trace estimation


def _as_diagonal(m: np.ndarray) -> np.ndarray | None:
    d = np.diagonal(m)
    if np.count_nonzero(m) == np.count_nonzero(d) and np.all(m == np.diag(d)):
        return d.copy()
    return None


class _Powers:
    """Cached integer powers of one matrix; diagonal matrices stay 1-D."""

    def __init__(self, m: np.ndarray):
        d = _as_diagonal(m)
        self.diagonal = d is not None
        self.cache: dict[int, np.ndarray] = {1: d if self.diagonal else m}

    def power(self, e: int) -> np.ndarray:
        p = self.cache.get(e)
        if p is None:
            if self.diagonal:
                p = self.cache[1] ** e
            else:
                p = self.cache[1] @ self.power(e - 1)
            self.cache[e] = p
        return p

    def shifted(self, e: int, c: float) -> np.ndarray:
        p = self.power(e)
        if self.diagonal:
            return p - c
        out = p.copy()
        out[np.diag_indices_from(out)] -= c
        return out


def _mul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if x.ndim == 1 and y.ndim == 1:
        return x * y
    if x.ndim == 1:
        return y * x[:, None]
    if y.ndim == 1:
        return x * y[None, :]
    return x @ y


def _trace(x: np.ndarray) -> float:
    return float(x.sum() if x.ndim == 1 else np.trace(x))


def _trace_square(x: np.ndarray) -> float:
    # tr(X @ X) without forming the product
    return float((x * x).sum() if x.ndim == 1 else (x * x.T).sum())


def _word_traces_for_pair(pair: MatrixPairSample, words, centers,
                          pa: _Powers, pb: _Powers) -> np.ndarray:
    n = pair.dimension
    out = np.empty((len(words), 4))
    for w, word in enumerate(words):
        if word.length == 0:
            out[w] = (1.0, 1.0, 0.0, 0.0)
            continue
        raw = None
        centered = None
        for letter, e in word.blocks:
            powers = pa if letter == 0 else pb
            raw_factor = powers.power(e)
            raw = raw_factor if raw is None else _mul(raw, raw_factor)
            if centers is not None:
                shift = powers.shifted(e, centers[letter][e])
                centered = shift if centered is None else _mul(centered, shift)
        out[w, 0] = _trace(raw) / n
        out[w, 1] = _trace_square(raw) / n
        if centers is not None:
            out[w, 2] = _trace(centered) / n
            out[w, 3] = _trace_square(centered) / n
        else:
            out[w, 2:] = 0.0
    return out


def word_trace_table(pairs, words, centers=None, threads: int = 1) -> np.ndarray:
    """Normalized traces per sample and word.

    Returns an array of shape (t, len(words), 4) holding tr(W)/N,
    tr(W^2)/N, and the same two for the centered product when ``centers``
    (per-letter scalars indexed by exponent) is given.
    """
    if not hasattr(pairs, "__getitem__"):
        pairs = list(pairs)
    words = [w.canonical() for w in words]
    for word in words:
        if any(letter > 1 for letter, _ in word.blocks):
            raise ValueError("word estimation supports the two-letter alphabet")
    if len(pairs) == 0:
        raise ValueError("need at least one sample")
    dimension = pairs[0].dimension
    out = np.empty((len(pairs), len(words), 4))

    def run_chunk(indices):
        prev_a = prev_b = None
        pa = pb = None
        for i in indices:
            pair = pairs[i]
            if pair.dimension != dimension:
                raise ValueError(
                    f"sample {i} has dimension {pair.dimension}, expected {dimension}"
                )
            if pa is None or not (prev_a is pair.a or np.array_equal(prev_a, pair.a)):
                pa, prev_a = _Powers(pair.a), pair.a
            if pb is None or not (prev_b is pair.b or np.array_equal(prev_b, pair.b)):
                pb, prev_b = _Powers(pair.b), pair.b
            out[i] = _word_traces_for_pair(pair, words, centers, pa, pb)

    indices = range(len(pairs))
    if threads <= 1 or len(pairs) < 2 * threads:
        run_chunk(indices)
    else:
        chunks = np.array_split(np.asarray(indices), threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_chunk, chunks))
    return out


def estimate_word_net(samples, word: Word) -> tuple[float, float]:
    """Monte Carlo mean of tr(word)/N over samples and its standard error.

    The SE follows the variance proxy sqrt((<W^2> - <W>^2)/t) where <W^2>
    is the normalized-trace estimate of the squared product; the radicand
    is clamped at zero (products of indefinite symmetric factors can have
    complex eigenvalue pairs making tr(W^2) small or negative).
    """
    table = word_trace_table(samples, [word])
    v = table[:, 0, 0]
    sq = table[:, 0, 1]
    t = len(v)
    mean = float(v.mean())
    se = math.sqrt(max(0.0, float(sq.mean()) - mean * mean) / t)
    return mean, se
