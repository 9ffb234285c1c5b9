"""Low-overhead distributed interference alignment for the 3-user interference channel."""

from .alignment import FilterSet, reverse_roles
from .errors import AlignmentError, DegeneracyError, LoiaError, ParameterError, ProtocolError, SingularityError
from .experiment import ExperimentConfig, leakage_history, run_experiment
from .iia import IiaState, iia_half_step, iia_run, interference_covariance
from .metrics import MetricRecord, leakage_per_user, orthogonal_baseline, reverse_leakage_per_user, sum_rate
from .mimo import MimoPrecoders, build_precoders_mimo, p_matrices_mimo, receive_filters_mimo, verify_alignment_mimo
from .network import (
    ChannelMatrix,
    ChannelSet,
    Structure,
    TransmitConfig,
    reciprocal,
    sample_mimo,
    sample_siso_extended,
)
from .protocol import OverheadLedger, audit_trace, iia_overhead, run_loia_protocol
from .siso import SisoPrecoders, build_precoders_siso, p_matrices_siso, receive_filters_siso, verify_alignment_siso

__version__ = "0.1.0"
