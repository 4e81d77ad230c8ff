"""Exact probability primitives on finite alphabets.

Distributions are stored in the linear domain as immutable numpy arrays.
Sequence-space distributions use lexicographic indexing with the most
significant symbol first, so index(x) = sum_t x_t * A**(n-1-t) for an
alphabet of size A.
"""

import os
from dataclasses import dataclass

import numpy as np

PROB_ATOL = 1e-12
SEQ_ATOL = 1e-9  # accumulated rounding over alphabet_size**n terms

DEFAULT_ENUM_CAP = 2 ** 24
ENUM_CAP_ENV = "LEL_ENUM_CAP"


class EnumerationCapError(Exception):
    """Raised when an exact enumeration would exceed the configured cap."""

    def __init__(self, message, states=None, cap=None):
        super().__init__(message)
        self.states = states
        self.cap = cap


def enumeration_cap():
    """Current cap on exact sequence-space enumerations (env-overridable)."""
    raw = os.environ.get(ENUM_CAP_ENV)
    if raw is None:
        return DEFAULT_ENUM_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"{ENUM_CAP_ENV} must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ValueError(f"{ENUM_CAP_ENV} must be positive, got {cap}")
    return cap


def check_enumeration_cap(alphabet_size, n):
    """Return alphabet_size**n after checking it against the cap."""
    states = alphabet_size ** n
    cap = enumeration_cap()
    if states > cap:
        raise EnumerationCapError(
            f"enumeration of {states} = {alphabet_size}**{n} sequence states "
            f"(n={n}, alphabet={alphabet_size}) exceeds cap {cap}",
            states=states,
            cap=cap,
        )
    return states


def _frozen_array(values, dtype=float):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Pmf:
    """Probability mass function over {0, ..., alphabet_size - 1}."""

    probs: np.ndarray

    def __post_init__(self):
        probs = _frozen_array(self.probs)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("Pmf needs a nonempty 1-D probability vector")
        if np.any(probs < 0):
            raise ValueError("Pmf entries must be nonnegative")
        total = probs.sum()
        if abs(total - 1.0) > PROB_ATOL:
            raise ValueError(f"Pmf entries sum to {total!r}, not 1 within {PROB_ATOL}")
        object.__setattr__(self, "probs", probs)

    def __eq__(self, other):
        return isinstance(other, Pmf) and np.array_equal(self.probs, other.probs)

    @property
    def alphabet_size(self):
        return self.probs.shape[0]


@dataclass(frozen=True)
class Channel:
    """Conditional pmf: one output distribution per input symbol.

    `degenerate_rows` flags inputs whose rows were unreachable under the
    joint that produced this channel and were filled in as uniform.
    """

    rows: np.ndarray
    degenerate_rows: tuple = ()

    def __post_init__(self):
        rows = _frozen_array(self.rows)
        if rows.ndim != 2 or rows.size == 0:
            raise ValueError("Channel needs a nonempty 2-D row-stochastic matrix")
        if np.any(rows < 0):
            raise ValueError("Channel entries must be nonnegative")
        sums = rows.sum(axis=1)
        bad = np.abs(sums - 1.0) > PROB_ATOL
        if np.any(bad):
            i = int(np.argmax(bad))
            raise ValueError(
                f"Channel row {i} sums to {sums[i]!r}, not 1 within {PROB_ATOL}"
            )
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "degenerate_rows", tuple(self.degenerate_rows))

    def __eq__(self, other):
        return (
            isinstance(other, Channel)
            and np.array_equal(self.rows, other.rows)
            and self.degenerate_rows == other.degenerate_rows
        )

    @property
    def input_size(self):
        return self.rows.shape[0]

    @property
    def output_size(self):
        return self.rows.shape[1]

    def row(self, i):
        return Pmf(self.rows[i])


@dataclass(frozen=True)
class JointPmf:
    """Joint pmf over a pair of finite alphabets."""

    probs: np.ndarray

    def __post_init__(self):
        probs = _frozen_array(self.probs)
        if probs.ndim != 2 or probs.size == 0:
            raise ValueError("JointPmf needs a nonempty 2-D probability table")
        if np.any(probs < 0):
            raise ValueError("JointPmf entries must be nonnegative")
        total = probs.sum()
        if abs(total - 1.0) > PROB_ATOL:
            raise ValueError(f"JointPmf sums to {total!r}, not 1 within {PROB_ATOL}")
        object.__setattr__(self, "probs", probs)

    def __eq__(self, other):
        return isinstance(other, JointPmf) and np.array_equal(self.probs, other.probs)

    @property
    def size_x(self):
        return self.probs.shape[0]

    @property
    def size_y(self):
        return self.probs.shape[1]

    def marginal_x(self):
        return Pmf(self.probs.sum(axis=1))

    def marginal_y(self):
        return Pmf(self.probs.sum(axis=0))


@dataclass(frozen=True)
class SequenceDist:
    """Explicit pmf over length-n sequences, lexicographically indexed."""

    alphabet_size: int
    n: int
    probs: np.ndarray

    def __post_init__(self):
        if self.alphabet_size < 1 or self.n < 1:
            raise ValueError("SequenceDist needs alphabet_size >= 1 and n >= 1")
        probs = _frozen_array(self.probs)
        if probs.ndim != 1 or probs.shape[0] != self.alphabet_size ** self.n:
            raise ValueError(
                f"SequenceDist needs a vector of length {self.alphabet_size}**{self.n}"
            )
        if np.any(probs < 0):
            raise ValueError("SequenceDist entries must be nonnegative")
        total = probs.sum()
        if abs(total - 1.0) > SEQ_ATOL:
            raise ValueError(f"SequenceDist sums to {total!r}, not 1 within {SEQ_ATOL}")
        object.__setattr__(self, "probs", probs)

    def __eq__(self, other):
        return (
            isinstance(other, SequenceDist)
            and (self.alphabet_size, self.n) == (other.alphabet_size, other.n)
            and np.array_equal(self.probs, other.probs)
        )


def sequence_to_index(seq, alphabet_size):
    """Lexicographic index of a sequence (most significant symbol first)."""
    idx = 0
    for s in seq:
        s = int(s)
        if not 0 <= s < alphabet_size:
            raise ValueError(f"symbol {s} outside alphabet of size {alphabet_size}")
        idx = idx * alphabet_size + s
    return idx


def index_to_sequence(idx, alphabet_size, n):
    """Inverse of sequence_to_index."""
    if not 0 <= idx < alphabet_size ** n:
        raise ValueError(f"index {idx} out of range for {alphabet_size}**{n} states")
    out = np.empty(n, dtype=np.int64)
    for t in range(n - 1, -1, -1):
        out[t] = idx % alphabet_size
        idx //= alphabet_size
    return out


def all_sequences(alphabet_size, n):
    """All length-n sequences as an (alphabet_size**n, n) array, lexicographic."""
    check_enumeration_cap(alphabet_size, n)
    grids = np.meshgrid(*([np.arange(alphabet_size)] * n), indexing="ij")
    return np.stack(grids, axis=-1).reshape(-1, n)


def entropy(p):
    """Shannon entropy of a Pmf in bits; 0 log 0 taken as 0."""
    pos = p.probs[p.probs > 0]
    return float(-(pos * np.log2(pos)).sum())


def mutual_information(j):
    """Mutual information of a JointPmf in bits."""
    px = j.probs.sum(axis=1)
    py = j.probs.sum(axis=0)
    outer = px[:, None] * py[None, :]
    mask = j.probs > 0
    terms = j.probs[mask] * (np.log2(j.probs[mask]) - np.log2(outer[mask]))
    return float(terms.sum())


def total_variation(p, q):
    """Half the L1 distance between two pmfs of identical shape."""
    if isinstance(p, Pmf) and isinstance(q, Pmf):
        if p.alphabet_size != q.alphabet_size:
            raise ValueError(
                f"alphabet mismatch: {p.alphabet_size} vs {q.alphabet_size}"
            )
    elif isinstance(p, SequenceDist) and isinstance(q, SequenceDist):
        if (p.alphabet_size, p.n) != (q.alphabet_size, q.n):
            raise ValueError(
                f"sequence-space mismatch: ({p.alphabet_size}, n={p.n}) vs "
                f"({q.alphabet_size}, n={q.n})"
            )
    else:
        raise ValueError("total_variation needs two Pmfs or two SequenceDists")
    return float(0.5 * np.abs(p.probs - q.probs).sum())


def joint_from(input_pmf, ch):
    """Joint pmf with entry (a, b) = input(a) * ch(b | a)."""
    if ch.input_size != input_pmf.alphabet_size:
        raise ValueError(
            f"channel input size {ch.input_size} != pmf alphabet "
            f"{input_pmf.alphabet_size}"
        )
    return JointPmf(input_pmf.probs[:, None] * ch.rows)


def reverse_channel(j):
    """Bayes inversion of a joint: returns (marginal over Y, channel X given Y).

    Rows conditioned on zero-probability Y symbols are unreachable under the
    joint; they are set to uniform and listed in the returned channel's
    `degenerate_rows`.
    """
    py = j.probs.sum(axis=0)
    rows = np.empty((j.size_y, j.size_x))
    degenerate = []
    for y in range(j.size_y):
        if py[y] == 0.0:
            rows[y] = 1.0 / j.size_x
            degenerate.append(y)
        else:
            rows[y] = j.probs[:, y] / py[y]
    # Guard against rounding pushing a row outside the Pmf tolerance.
    rows /= rows.sum(axis=1, keepdims=True)
    return Pmf(py), Channel(rows, degenerate_rows=tuple(degenerate))


def product_extension(p, n):
    """I.i.d. product distribution over length-n sequences."""
    if n < 1:
        raise ValueError("blocklength n must be >= 1")
    check_enumeration_cap(p.alphabet_size, n)
    probs = np.ones(1)
    for _ in range(n):
        probs = np.kron(probs, p.probs)
    return SequenceDist(alphabet_size=p.alphabet_size, n=n, probs=probs)
