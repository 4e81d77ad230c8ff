"""lel: likelihood-encoder lab for finite-alphabet source coding experiments."""

from .analysis import (
    DistortionSummary,
    DistortionTrial,
    ProofCheckReport,
    SequenceIndexJoint,
    SoftCoverReport,
    codebook_expectation_Q,
    distortion_experiment,
    encoder_joint_P,
    expected_soft_cover_tv,
    ideal_joint_Q,
    induced_marginal,
    proof_check,
    soft_cover_report,
    soft_cover_tv,
)
from .codec import (
    AllZeroLikelihoodError,
    Codebook,
    EncoderSpec,
    avg_distortion,
    codebook_size,
    decode,
    encoder_posterior,
    generate_codebook,
    likelihood_encode,
    load_codebook,
    map_encode,
    sample_sequence,
    save_codebook,
)
from .config import (
    ConfigError,
    ExperimentConfig,
    channel_from_text,
    joint_from_text,
    load_config,
    parse_config,
    pmf_from_text,
    resolve_test_pair,
    write_config,
)
from .finite_prob import (
    Channel,
    EnumerationCapError,
    JointPmf,
    Pmf,
    SequenceDist,
    entropy,
    joint_from,
    mutual_information,
    product_extension,
    reverse_channel,
    total_variation,
)
from .rd_solver import (
    DistortionMeasure,
    RdPoint,
    blahut_arimoto,
    distortion_range,
    expected_distortion,
    rd_curve,
    rd_point_at_distortion,
)
from .seeds import derive_seed

__version__ = "0.1.0"
