"""Flat key-value experiment configuration.

The format is INI-style sections; distributions are whitespace-separated
probability lists and channels are row-per-line stochastic tables:

    [source]
    probs = 0.5 0.5

    [forward_channel]
    rows =
        0.8 0.2
        0.2 0.8

    [distortion]
    rows =
        0 1
        1 0

    [experiment]
    n_list = 4 6 8
    R_list = 0.9
    trials = 20
    master_seed = 1

Either [forward_channel] (the channel from source to codeword alphabet,
which gets Bayes-reversed) or the explicit pair [test_channel] +
[codeword_dist] selects the encoder's distributions.
"""

import configparser
import io
from dataclasses import dataclass

from .finite_prob import Channel, JointPmf, Pmf, joint_from, reverse_channel
from .rd_solver import DistortionMeasure


class ConfigError(Exception):
    """Invalid experiment configuration, with the offending location named."""


@dataclass(frozen=True)
class ExperimentConfig:
    source: Pmf
    forward_channel: Channel
    test_channel: Channel
    codeword_dist: Pmf
    distortion: DistortionMeasure
    n_list: tuple
    rate_list: tuple
    slope_list: tuple
    target_d_list: tuple
    trials: int  # None defers to the subcommand default
    master_seed: int
    out: str


def _floats(text, where):
    try:
        return [float(tok) for tok in text.split()]
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _ints(text, where):
    try:
        return [int(tok) for tok in text.split()]
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _matrix(text, where):
    rows = [_floats(line, where) for line in text.splitlines() if line.strip()]
    if not rows:
        raise ConfigError(f"{where}: empty table")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ConfigError(f"{where}: ragged rows")
    return rows


def _build(factory, where, *args):
    try:
        return factory(*args)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def pmf_from_text(text):
    """Pmf from a whitespace-separated probability list (the config syntax)."""
    return _build(Pmf, "pmf", _floats(text, "pmf"))


def channel_from_text(text):
    """Channel from a row-per-line stochastic table (the config syntax)."""
    return _build(Channel, "channel", _matrix(text, "channel"))


def joint_from_text(text):
    """JointPmf from a row-per-line probability table (the config syntax)."""
    return _build(JointPmf, "joint", _matrix(text, "joint"))


def parse_config(text, source_name="<config>"):
    """Parse and validate a config document."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text, source=source_name)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None

    def get(section, key, required=False):
        if cp.has_option(section, key):
            return cp.get(section, key)
        if required:
            raise ConfigError(f"{source_name}: missing [{section}] {key}")
        return None

    if not cp.has_section("source"):
        raise ConfigError(f"{source_name}: missing [source] section")
    source = _build(Pmf, "[source] probs", _floats(get("source", "probs", True), "[source] probs"))

    forward = None
    if cp.has_section("forward_channel"):
        forward = _build(
            Channel,
            "[forward_channel] rows",
            _matrix(get("forward_channel", "rows", True), "[forward_channel] rows"),
        )
        if forward.input_size != source.alphabet_size:
            raise ConfigError(
                f"[forward_channel] has {forward.input_size} rows, source alphabet "
                f"is {source.alphabet_size}"
            )

    test = None
    if cp.has_section("test_channel"):
        test = _build(
            Channel,
            "[test_channel] rows",
            _matrix(get("test_channel", "rows", True), "[test_channel] rows"),
        )
        if test.output_size != source.alphabet_size:
            raise ConfigError(
                f"[test_channel] has {test.output_size} columns, source alphabet "
                f"is {source.alphabet_size}"
            )

    codeword_dist = None
    if cp.has_section("codeword_dist"):
        codeword_dist = _build(
            Pmf,
            "[codeword_dist] probs",
            _floats(get("codeword_dist", "probs", True), "[codeword_dist] probs"),
        )
        if test is not None and codeword_dist.alphabet_size != test.input_size:
            raise ConfigError(
                "[codeword_dist] alphabet does not match [test_channel] rows"
            )

    distortion = None
    if cp.has_section("distortion"):
        distortion = _build(
            DistortionMeasure,
            "[distortion] rows",
            _matrix(get("distortion", "rows", True), "[distortion] rows"),
        )
        if distortion.table.shape[0] != source.alphabet_size:
            raise ConfigError(
                f"[distortion] has {distortion.table.shape[0]} rows, source "
                f"alphabet is {source.alphabet_size}"
            )
        y_size = None
        if forward is not None:
            y_size = forward.output_size
        elif codeword_dist is not None:
            y_size = codeword_dist.alphabet_size
        if y_size is not None and distortion.table.shape[1] != y_size:
            raise ConfigError(
                f"[distortion] has {distortion.table.shape[1]} columns, codeword "
                f"alphabet is {y_size}"
            )

    if not cp.has_section("experiment"):
        raise ConfigError(f"{source_name}: missing [experiment] section")
    n_list = _ints(get("experiment", "n_list", True), "[experiment] n_list")
    rate_list = _floats(get("experiment", "R_list", True), "[experiment] R_list")
    if not n_list or not rate_list:
        raise ConfigError("[experiment] n_list and R_list must be nonempty")
    if any(n < 1 for n in n_list):
        raise ConfigError("[experiment] n_list entries must be >= 1")
    if any(r < 0 for r in rate_list):
        raise ConfigError("[experiment] R_list entries must be >= 0")

    slope_raw = get("experiment", "slope_list")
    slope_list = _floats(slope_raw, "[experiment] slope_list") if slope_raw else []
    if any(s < 0 for s in slope_list):
        raise ConfigError("[experiment] slope_list entries must be >= 0")
    d_raw = get("experiment", "d_list")
    target_d_list = _floats(d_raw, "[experiment] d_list") if d_raw else []

    trials_raw = get("experiment", "trials")
    trials = None
    if trials_raw is not None:
        trials = _ints(trials_raw, "[experiment] trials")
        if len(trials) != 1 or trials[0] < 1:
            raise ConfigError("[experiment] trials must be a single positive integer")
        trials = trials[0]

    seed_raw = get("experiment", "master_seed")
    master_seed = 0
    if seed_raw is not None:
        parsed = _ints(seed_raw, "[experiment] master_seed")
        if len(parsed) != 1 or not 0 <= parsed[0] < 2 ** 64:
            raise ConfigError("[experiment] master_seed must be a single u64")
        master_seed = parsed[0]

    return ExperimentConfig(
        source=source,
        forward_channel=forward,
        test_channel=test,
        codeword_dist=codeword_dist,
        distortion=distortion,
        n_list=tuple(n_list),
        rate_list=tuple(rate_list),
        slope_list=tuple(slope_list),
        target_d_list=tuple(target_d_list),
        trials=trials,
        master_seed=master_seed,
        out=get("experiment", "out"),
    )


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, source_name=str(path))


def resolve_test_pair(config):
    """(codeword marginal P_Y, test channel P_X|Y) from whichever form is given."""
    if config.test_channel is not None and config.forward_channel is not None:
        raise ConfigError("give either [forward_channel] or [test_channel], not both")
    if config.test_channel is not None:
        if config.codeword_dist is None:
            raise ConfigError("[test_channel] needs [codeword_dist] alongside it")
        return config.codeword_dist, config.test_channel
    if config.forward_channel is not None:
        return reverse_channel(joint_from(config.source, config.forward_channel))
    raise ConfigError("config needs [forward_channel] or [test_channel]+[codeword_dist]")


def _fmt_floats(values):
    return " ".join(repr(float(v)) for v in values)


def write_config(config):
    """Serialize back to the flat text format (round-trips through parse_config)."""
    buf = io.StringIO()
    buf.write("[source]\nprobs = " + _fmt_floats(config.source.probs) + "\n")
    for name, channel in (
        ("forward_channel", config.forward_channel),
        ("test_channel", config.test_channel),
    ):
        if channel is not None:
            buf.write(f"\n[{name}]\nrows =\n")
            for row in channel.rows:
                buf.write("    " + _fmt_floats(row) + "\n")
    if config.codeword_dist is not None:
        buf.write("\n[codeword_dist]\nprobs = " + _fmt_floats(config.codeword_dist.probs) + "\n")
    if config.distortion is not None:
        buf.write("\n[distortion]\nrows =\n")
        for row in config.distortion.table:
            buf.write("    " + _fmt_floats(row) + "\n")
    buf.write("\n[experiment]\n")
    buf.write("n_list = " + " ".join(str(n) for n in config.n_list) + "\n")
    buf.write("R_list = " + _fmt_floats(config.rate_list) + "\n")
    if config.slope_list:
        buf.write("slope_list = " + _fmt_floats(config.slope_list) + "\n")
    if config.target_d_list:
        buf.write("d_list = " + _fmt_floats(config.target_d_list) + "\n")
    if config.trials is not None:
        buf.write(f"trials = {config.trials}\n")
    buf.write(f"master_seed = {config.master_seed}\n")
    if config.out is not None:
        buf.write(f"out = {config.out}\n")
    return buf.getvalue()
