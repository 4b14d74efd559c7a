"""DoF bounds, beamforming constructions and numerical audits for the bursty MIMO X channel."""

from .model import (
    ChannelParams,
    Classification,
    ContractedState,
    EtaTriple,
    ParameterError,
    StateProbs,
    canonicalize,
    classify,
    contracted_states,
    eta_axpy,
    eta_eval,
    make_params,
    sample_states,
    state_probs,
)

__version__ = "0.1.0"
