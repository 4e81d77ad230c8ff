"""Random codebooks, the stochastic likelihood encoder, and distortion.

The encoder scores every codeword by its product likelihood under the test
channel P(X|Y), entirely in the log domain, and samples an index from the
normalized scores. Codeword indices are 1-based at this API, matching the
usual m in {1, ..., M} convention.
"""

import math
import struct
from dataclasses import dataclass

import numpy as np

from .finite_prob import Channel, EnumerationCapError, Pmf, enumeration_cap


class AllZeroLikelihoodError(Exception):
    """Every codeword has product likelihood zero for the given input.

    Impossible under a full-support test channel; when it occurs it marks an
    input the current codebook cannot encode.
    """


def codebook_size(n, rate):
    """M = ceil(2**(n * rate)), checked against the enumeration cap."""
    if n < 1:
        raise ValueError("blocklength n must be >= 1")
    if rate < 0:
        raise ValueError("rate must be >= 0")
    cap = enumeration_cap()
    exponent = n * rate
    states = 2.0 ** exponent if exponent <= 64 else math.inf
    if states > cap:
        raise EnumerationCapError(
            f"codebook of ceil(2**({n}*{rate})) codewords exceeds cap {cap}",
            states=states,
            cap=cap,
        )
    return math.ceil(states)


@dataclass(frozen=True)
class Codebook:
    """M codewords of length n over a Y alphabet, plus generation metadata."""

    rate: float
    words: np.ndarray  # (M, n) symbol indices, uint8
    alphabet_size: int
    seed: int

    def __post_init__(self):
        words = np.array(self.words, dtype=np.uint8)
        if words.ndim != 2 or words.size == 0:
            raise ValueError("codeword table must be a nonempty (M, n) array")
        if not 1 <= self.alphabet_size <= 256:
            raise ValueError("codeword alphabet must have 1..256 symbols")
        if words.max() >= self.alphabet_size:
            raise ValueError("codeword symbol outside the Y alphabet")
        expected = codebook_size(words.shape[1], self.rate)
        if words.shape[0] != expected:
            raise ValueError(
                f"codebook has {words.shape[0]} words, rate {self.rate} at "
                f"n={words.shape[1]} requires ceil(2**nR) = {expected}"
            )
        words.setflags(write=False)
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "seed", int(self.seed) & ((1 << 64) - 1))

    def __eq__(self, other):
        return (
            isinstance(other, Codebook)
            and (self.rate, self.alphabet_size, self.seed)
            == (other.rate, other.alphabet_size, other.seed)
            and np.array_equal(self.words, other.words)
        )

    @property
    def n(self):
        return self.words.shape[1]

    @property
    def num_words(self):
        return self.words.shape[0]

    def has_repeats(self):
        return len(np.unique(self.words, axis=0)) < self.num_words


def _inverse_cdf_sample(probs, rng, shape):
    cum = np.cumsum(probs)
    picks = np.searchsorted(cum, rng.random(shape), side="right")
    return np.minimum(picks, len(probs) - 1)


def sample_sequence(p, n, rng):
    """One i.i.d. length-n sequence from a Pmf, via the uniform stream."""
    return _inverse_cdf_sample(p.probs, rng, n).astype(np.int64)


def generate_codebook(py, n, rate, seed):
    """Draw M = ceil(2**(n*rate)) codewords i.i.d. from py, reproducibly."""
    if py.alphabet_size > 256:
        raise ValueError("codeword storage is one byte per symbol (alphabet <= 256)")
    m = codebook_size(n, rate)
    rng = np.random.default_rng(int(seed) & ((1 << 64) - 1))
    words = _inverse_cdf_sample(py.probs, rng, (m, n)).astype(np.uint8)
    return Codebook(rate=float(rate), words=words, alphabet_size=py.alphabet_size, seed=seed)


@dataclass(frozen=True)
class EncoderSpec:
    """Test channel P(X|Y) paired with the codebook it scores against."""

    test_channel: Channel
    codebook: Codebook

    def __post_init__(self):
        if self.test_channel.input_size != self.codebook.alphabet_size:
            raise ValueError(
                f"test channel has {self.test_channel.input_size} input symbols, "
                f"codebook alphabet is {self.codebook.alphabet_size}"
            )
        with np.errstate(divide="ignore"):
            ln_rows = np.log(self.test_channel.rows)
        ln_rows.setflags(write=False)
        object.__setattr__(self, "_ln_rows", ln_rows)


def _check_input(x, spec):
    x = np.asarray(x, dtype=np.int64)
    if x.ndim != 1 or x.shape[0] != spec.codebook.n:
        raise ValueError(f"input of shape {x.shape}, expected length {spec.codebook.n}")
    if x.min() < 0 or x.max() >= spec.test_channel.output_size:
        raise ValueError("input symbol outside the X alphabet")
    return x


def log_weights(x, spec):
    """Log product likelihood of x under each codeword's test-channel law."""
    x = _check_input(x, spec)
    return spec._ln_rows[spec.codebook.words, x[None, :]].sum(axis=1)


def encoder_posterior(x, spec):
    """Exact encoding distribution over codeword indices 1..M for input x."""
    lw = log_weights(x, spec)
    shift = lw.max()
    if shift == -np.inf:
        raise AllZeroLikelihoodError(
            "all codewords have zero likelihood for this input"
        )
    w = np.exp(lw - shift)
    return Pmf(w / w.sum())


def likelihood_encode(x, spec, rng):
    """Sample one codeword index from the encoder posterior (Gumbel-max)."""
    lw = log_weights(x, spec)
    if lw.max() == -np.inf:
        raise AllZeroLikelihoodError(
            "all codewords have zero likelihood for this input"
        )
    u = rng.random(lw.shape[0])
    with np.errstate(divide="ignore"):
        gumbel = -np.log(-np.log(u))
    return int(np.argmax(lw + gumbel)) + 1


def map_encode(x, spec):
    """Deterministic argmax baseline; ties go to the lowest index."""
    lw = log_weights(x, spec)
    if lw.max() == -np.inf:
        raise AllZeroLikelihoodError(
            "all codewords have zero likelihood for this input"
        )
    return int(np.argmax(lw)) + 1


def decode(m, cb):
    """Codeword m (1-based) from the table."""
    if not 1 <= m <= cb.num_words:
        raise ValueError(f"index {m} out of range 1..{cb.num_words}")
    return cb.words[m - 1].astype(np.int64)


def avg_distortion(x, y, d):
    """Per-letter average distortion between two equal-length sequences."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    return float(d.table[x, y].mean())


# Codebook files: little-endian header then row-major codeword bytes.
_HEADER = struct.Struct("<4sIIQdIQ")  # magic, version, n, M, R, |Y|, seed
_MAGIC = b"LECB"
_VERSION = 1


def save_codebook(cb, path):
    """Serialize a codebook for later replay."""
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(
                _MAGIC, _VERSION, cb.n, cb.num_words, cb.rate, cb.alphabet_size, cb.seed
            )
        )
        fh.write(cb.words.tobytes(order="C"))


def load_codebook(path):
    """Read a codebook written by save_codebook."""
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) < _HEADER.size:
            raise ValueError(f"{path}: truncated codebook header")
        magic, version, n, m, rate, alphabet_size, seed = _HEADER.unpack(raw)
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a codebook file (bad magic {magic!r})")
        if version != _VERSION:
            raise ValueError(f"{path}: unsupported codebook version {version}")
        body = fh.read(m * n + 1)
    if len(body) != m * n:
        raise ValueError(f"{path}: codeword payload has wrong length")
    words = np.frombuffer(body, dtype=np.uint8).reshape(m, n)
    return Codebook(rate=rate, words=words, alphabet_size=alphabet_size, seed=seed)
