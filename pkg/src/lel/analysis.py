"""Exact and Monte Carlo instrumentation around the likelihood encoder.

Everything here is computed over explicitly enumerated sequence spaces, so
the supported regime is bounded by the enumeration cap. Joints over the
encoded pair are represented over (x^n, codeword index m) rather than
(x^n, y^n): the decoder map m -> y^n(m) is deterministic, so the two agree
except when the codebook repeats a codeword, in which case the index
representation refines the sequence one (never decreasing a TV distance);
reports carry a repeated-codeword flag for that case.
"""

import math
import warnings
from dataclasses import dataclass
from itertools import product as iter_product

import numpy as np

from .codec import (
    AllZeroLikelihoodError,
    EncoderSpec,
    avg_distortion,
    codebook_size,
    decode,
    encoder_posterior,
    generate_codebook,
    likelihood_encode,
    sample_sequence,
)
from .finite_prob import (
    EnumerationCapError,
    JointPmf,
    SequenceDist,
    all_sequences,
    check_enumeration_cap,
    enumeration_cap,
    product_extension,
    total_variation,
)
from .seeds import derive_seed

_CHUNK_TARGET = 1 << 22  # floats per vectorized codeword chunk


@dataclass(frozen=True)
class SoftCoverReport:
    """Total variation between induced and i.i.d. sequence distributions."""

    n: int
    rate: float
    num_words: int
    trials: int
    seed: int
    tv_exact: float = None  # single-codebook evaluation
    tv_mean: float = None  # codebook-ensemble evaluation
    tv_stderr: float = None

    def __post_init__(self):
        for value in (self.tv_exact, self.tv_mean):
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValueError(f"TV value {value} outside [0, 1]")
        if self.tv_stderr is not None and self.tv_stderr < 0.0:
            raise ValueError("stderr must be >= 0")


@dataclass(frozen=True)
class ProofCheckReport:
    """Exactly computed quantities comparing the encoder joint P to Q."""

    tv_joint: float
    tv_marginal: float
    conditional_max_gap: float
    expected_distortion_q: float
    empirical_distortion: float
    distortion_bound_rhs: float  # E_Q[d] + 2 * d_max * tv_joint
    distortion_bound_rhs_one_dmax: float  # tighter single-d_max variant
    repeated_codewords: bool

    def __post_init__(self):
        for value in (self.tv_joint, self.tv_marginal):
            if not 0.0 <= value <= 1.0 + 1e-12:
                raise ValueError(f"TV value {value} outside [0, 1]")
        if self.conditional_max_gap < 0.0:
            raise ValueError("conditional_max_gap must be >= 0")


@dataclass(frozen=True)
class SequenceIndexJoint:
    """Joint pmf over (x^n, codeword index m), lexicographic in x^n."""

    alphabet_size: int
    n: int
    probs: np.ndarray  # (alphabet_size**n, M)
    repeated_codewords: bool

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 2 or probs.shape[0] != self.alphabet_size ** self.n:
            raise ValueError("joint table has the wrong shape")
        if np.any(probs < 0):
            raise ValueError("joint entries must be nonnegative")
        total = probs.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"joint sums to {total!r}, not 1 within 1e-9")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def __eq__(self, other):
        return (
            isinstance(other, SequenceIndexJoint)
            and (self.alphabet_size, self.n, self.repeated_codewords)
            == (other.alphabet_size, other.n, other.repeated_codewords)
            and np.array_equal(self.probs, other.probs)
        )

    @property
    def num_words(self):
        return self.probs.shape[1]

    def marginal_sequences(self):
        return SequenceDist(
            alphabet_size=self.alphabet_size, n=self.n, probs=self.probs.sum(axis=1)
        )


def _check_pair_cap(states, num_words, n, alphabet_size):
    cap = enumeration_cap()
    if states * num_words > cap:
        raise EnumerationCapError(
            f"joint enumeration of {states} sequences x {num_words} codewords "
            f"(n={n}, alphabet={alphabet_size}) exceeds cap {cap}",
            states=states * num_words,
            cap=cap,
        )


def _chunk_size(states):
    return max(1, _CHUNK_TARGET // max(1, states))


def _word_likelihoods(words, rows, states):
    """(M, states) table of per-codeword sequence likelihoods, lexicographic."""
    num_words, n = words.shape
    out = np.empty((num_words, states))
    step = _chunk_size(states)
    for start in range(0, num_words, step):
        chunk = words[start : start + step]
        v = np.ones((chunk.shape[0], 1))
        for t in range(n):
            v = (v[:, :, None] * rows[chunk[:, t], None, :]).reshape(chunk.shape[0], -1)
        out[start : start + step] = v
    return out


def _word_distortions(words, d, states):
    """(M, states) table of per-codeword average distortions d(x^n, y^n(m))."""
    num_words, n = words.shape
    out = np.empty((num_words, states))
    step = _chunk_size(states)
    for start in range(0, num_words, step):
        chunk = words[start : start + step]
        v = np.zeros((chunk.shape[0], 1))
        for t in range(n):
            cols = d.table[:, chunk[:, t]].T  # (chunk, |X|)
            v = (v[:, :, None] + cols[:, None, :]).reshape(chunk.shape[0], -1)
        out[start : start + step] = v / n
    return out


def induced_marginal(cb, test_channel):
    """Exact distribution of X^n when a uniform index is pushed through the
    test channel: (1/M) * sum_m prod_t P(x_t | y_t(m))."""
    if test_channel.input_size != cb.alphabet_size:
        raise ValueError("test channel input must match the codeword alphabet")
    nx = test_channel.output_size
    states = check_enumeration_cap(nx, cb.n)
    acc = np.zeros(states)
    step = _chunk_size(states)
    for start in range(0, cb.num_words, step):
        chunk = cb.words[start : start + step]
        v = np.ones((chunk.shape[0], 1))
        for t in range(cb.n):
            v = (v[:, :, None] * test_channel.rows[chunk[:, t], None, :]).reshape(
                chunk.shape[0], -1
            )
        acc += v.sum(axis=0)
    return SequenceDist(alphabet_size=nx, n=cb.n, probs=acc / cb.num_words)


def soft_cover_tv(cb, test_channel, px):
    """TV between the codebook-induced X^n distribution and the i.i.d. target."""
    if px.alphabet_size != test_channel.output_size:
        raise ValueError("px must live on the test channel's output alphabet")
    return total_variation(
        induced_marginal(cb, test_channel), product_extension(px, cb.n)
    )


def soft_cover_report(cb, test_channel, px):
    """Single-codebook SoftCoverReport, with tv_exact filled."""
    return SoftCoverReport(
        n=cb.n,
        rate=cb.rate,
        num_words=cb.num_words,
        trials=1,
        seed=cb.seed,
        tv_exact=soft_cover_tv(cb, test_channel, px),
    )


def expected_soft_cover_tv(py, test_channel, px, n, rate, trials, master_seed):
    """Mean and standard error of soft_cover_tv over independent codebooks.

    Trial t uses the codebook seeded with derive_seed(master_seed, t), so the
    whole report is a pure function of its arguments.
    """
    if trials < 2:
        raise ValueError("ensemble statistics need trials >= 2")
    tvs = np.empty(trials)
    for t in range(trials):
        cb = generate_codebook(py, n, rate, derive_seed(master_seed, t))
        tvs[t] = soft_cover_tv(cb, test_channel, px)
    mean = float(tvs.mean())
    stderr = float(tvs.std(ddof=1) / math.sqrt(trials))
    return SoftCoverReport(
        n=n,
        rate=float(rate),
        num_words=codebook_size(n, rate),
        trials=trials,
        seed=int(master_seed),
        tv_mean=mean,
        tv_stderr=stderr,
    )


def ideal_joint_Q(cb, test_channel):
    """The idealized joint: a uniform codeword index pushed through the test
    channel, Q(x^n, m) = (1/M) * prod_t P(x_t | y_t(m))."""
    if test_channel.input_size != cb.alphabet_size:
        raise ValueError("test channel input must match the codeword alphabet")
    nx = test_channel.output_size
    states = check_enumeration_cap(nx, cb.n)
    _check_pair_cap(states, cb.num_words, cb.n, nx)
    likes = _word_likelihoods(cb.words, test_channel.rows, states)
    return SequenceIndexJoint(
        alphabet_size=nx,
        n=cb.n,
        probs=likes.T / cb.num_words,
        repeated_codewords=cb.has_repeats(),
    )


def encoder_joint_P(cb, test_channel, px):
    """Exact joint induced by the real system: i.i.d. source times the
    encoder posterior, P(x^n, m) = (prod_t px(x_t)) * P(m | x^n)."""
    if px.alphabet_size != test_channel.output_size:
        raise ValueError("px must live on the test channel's output alphabet")
    nx = test_channel.output_size
    states = check_enumeration_cap(nx, cb.n)
    _check_pair_cap(states, cb.num_words, cb.n, nx)
    spec = EncoderSpec(test_channel=test_channel, codebook=cb)
    pxn = product_extension(px, cb.n).probs
    probs = np.zeros((states, cb.num_words))
    for idx, seq in enumerate(all_sequences(nx, cb.n)):
        if pxn[idx] == 0.0:
            continue
        probs[idx] = pxn[idx] * encoder_posterior(seq, spec).probs
    return SequenceIndexJoint(
        alphabet_size=nx,
        n=cb.n,
        probs=probs,
        repeated_codewords=cb.has_repeats(),
    )


def proof_check(cb, test_channel, px, d):
    """Compare the encoder joint P against the idealized Q exactly.

    Reports the joint and marginal TV distances, the largest gap between the
    two conditionals P(m|x^n) and Q(m|x^n) over source sequences with
    positive probability, and the exact distortion bound chain
    E_P[d] <= E_Q[d] + 2 * d_max * TV(P, Q) (plus the single-d_max variant).
    """
    q = ideal_joint_Q(cb, test_channel)
    p = encoder_joint_P(cb, test_channel, px)

    tv_joint = float(0.5 * np.abs(p.probs - q.probs).sum())
    p_marg = p.probs.sum(axis=1)
    q_marg = q.probs.sum(axis=1)
    tv_marginal = float(0.5 * np.abs(p_marg - q_marg).sum())

    support = p_marg > 0
    p_cond = p.probs[support] / p_marg[support, None]
    q_cond = q.probs[support] / q_marg[support, None]
    gap = float(np.abs(p_cond - q_cond).max()) if support.any() else 0.0

    states = p.probs.shape[0]
    dists = _word_distortions(cb.words, d, states).T  # (states, M)
    e_q = float((q.probs * dists).sum())
    e_p = float((p.probs * dists).sum())

    return ProofCheckReport(
        tv_joint=tv_joint,
        tv_marginal=tv_marginal,
        conditional_max_gap=gap,
        expected_distortion_q=e_q,
        empirical_distortion=e_p,
        distortion_bound_rhs=e_q + 2.0 * d.d_max * tv_joint,
        distortion_bound_rhs_one_dmax=e_q + d.d_max * tv_joint,
        repeated_codewords=q.repeated_codewords,
    )


def codebook_expectation_Q(py, test_channel, n, num_words):
    """Average of Q over every possible codebook, weighted by its generation
    probability, as an exact joint over (x^n, y^n). Exhaustive: feasible only
    for tiny (n, M, |Y|)."""
    if test_channel.input_size != py.alphabet_size:
        raise ValueError("test channel input must match the codeword alphabet")
    ny = py.alphabet_size
    nx = test_channel.output_size
    y_states = check_enumeration_cap(ny, n)
    x_states = check_enumeration_cap(nx, n)
    cap = enumeration_cap()
    total = float(y_states) ** num_words
    if total > cap:
        raise EnumerationCapError(
            f"exhaustive codebook average needs {ny}**({n}*{num_words}) codebooks "
            f"(n={n}, alphabet={ny}), exceeding cap {cap}",
            states=total,
            cap=cap,
        )
    if x_states * y_states > cap:
        raise EnumerationCapError(
            f"joint table of {x_states}x{y_states} entries exceeds cap {cap}",
            states=x_states * y_states,
            cap=cap,
        )

    pyn = product_extension(py, n).probs
    # E_C[(1/M) * sum_m 1{Y^n(m) = y^n}] accumulated codebook by codebook.
    weight = np.zeros(y_states)
    for picks in iter_product(range(y_states), repeat=num_words):
        prob = float(np.prod(pyn[list(picks)]))
        for i in picks:
            weight[i] += prob / num_words

    # T[x_idx, y_idx] = prod_t P(x_t | y_t), built as an n-fold Kronecker power.
    per_position = test_channel.rows.T  # (|X|, |Y|)
    table = np.ones((1, 1))
    for _ in range(n):
        table = np.kron(table, per_position)
    return JointPmf(table * weight[None, :])


@dataclass(frozen=True)
class DistortionTrial:
    trial: int
    seed: int
    index: int  # 0 marks a failed (unencodable) trial
    distortion: float  # nan for failed trials
    failed: bool


@dataclass(frozen=True)
class DistortionSummary:
    n: int
    rate: float
    num_words: int
    trials: int
    failures: int
    mean: float
    stderr: float
    master_seed: int
    rows: tuple


def distortion_experiment(px, py, test_channel, d, n, rate, trials, master_seed):
    """Monte Carlo end-to-end distortion of the likelihood-encoder system.

    Each trial draws a fresh codebook and a fresh source sequence, encodes,
    decodes, and measures average distortion. Trials whose input no codeword
    can explain are counted as failures and excluded from the mean.
    """
    if trials < 1:
        raise ValueError("need trials >= 1")
    rows = []
    values = []
    failures = 0
    for t in range(trials):
        trial_seed = derive_seed(master_seed, t)
        cb = generate_codebook(py, n, rate, derive_seed(trial_seed, 0))
        rng = np.random.default_rng(derive_seed(trial_seed, 1))
        spec = EncoderSpec(test_channel=test_channel, codebook=cb)
        x = sample_sequence(px, n, rng)
        try:
            m = likelihood_encode(x, spec, rng)
        except AllZeroLikelihoodError:
            failures += 1
            rows.append(
                DistortionTrial(
                    trial=t, seed=trial_seed, index=0, distortion=float("nan"), failed=True
                )
            )
            continue
        dist = avg_distortion(x, decode(m, cb), d)
        values.append(dist)
        rows.append(
            DistortionTrial(trial=t, seed=trial_seed, index=m, distortion=dist, failed=False)
        )
    if failures:
        warnings.warn(
            f"{failures} of {trials} trials were unencodable and excluded from the mean",
            RuntimeWarning,
            stacklevel=2,
        )
    arr = np.asarray(values)
    mean = float(arr.mean()) if arr.size else float("nan")
    stderr = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else float("nan")
    return DistortionSummary(
        n=n,
        rate=float(rate),
        num_words=codebook_size(n, rate),
        trials=trials,
        failures=failures,
        mean=mean,
        stderr=stderr,
        master_seed=int(master_seed),
        rows=tuple(rows),
    )
