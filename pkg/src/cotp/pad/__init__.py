"""The conditional one-time pad: encoders, codes, decoder, adversary, simulation."""
from .decoding import PGMResult, pgm_decoder, pgm_success_monomial
from .encoding import (Code, Encoder, EncodingVector, all_s_arrays, build_code, count_all_s,
                       decompose_marginal, encoding_unitary, enumerate_all_s, full_key_code,
                       generalized_pauli)
from .protocol import (ExpurgationResult, ProtocolConfig, ProtocolReport, TrialResult, expurgate,
                       expurgation_order, simulate, simulate_multikey)
from .states import (CoveringBound, ProtocolFrame, adversary_state, average_state, code_states,
                     covering_bound, security_metrics, subset_name)

__all__ = [
    "Code", "CoveringBound", "Encoder", "EncodingVector", "ExpurgationResult", "PGMResult",
    "ProtocolConfig", "ProtocolFrame", "ProtocolReport", "TrialResult", "adversary_state",
    "all_s_arrays", "average_state", "build_code", "code_states", "count_all_s",
    "covering_bound", "decompose_marginal", "encoding_unitary", "enumerate_all_s", "expurgate",
    "expurgation_order", "full_key_code", "generalized_pauli", "pgm_decoder",
    "pgm_success_monomial", "security_metrics", "simulate", "simulate_multikey", "subset_name",
]
