"""logmarkov package entry point.

Exposes the public API for describing Pauli-noisy QEC cycles in the Clifford frame, extracting
their exact syndrome Markov process, building the approximate logical Markovian model and
checking it against exact and Monte-Carlo oracles.
"""

from .pauli import (
    BitString,
    PauliLabel,
    PauliChannel,
    PauliEigenTable,
    indicator,
    apply_to_basis,
    conjugation_sign,
    channel_eigenvalue,
    channel_table,
    compose_superops,
    dense_superoperator,
)
from .cycle import (
    RegisterLayout,
    RepetitionCode,
    LinearCode,
    TableCode,
    DecoderTable,
    QecCycleSpec,
    PrepSpec,
    MeasSpec,
    ExperimentSettings,
    build_linear_code,
    build_repetition_cycle,
    check_decoding_symmetry,
    direct_readout,
    validate_spec,
)
from .extraction import (
    CycleTransfer,
    PrepTransfer,
    MeasTransfer,
    absorb_cycle_into_prep,
    check_smip,
    cycle_transfer,
    entanglement_fidelity,
    meas_transfer,
    prep_transfer,
    randomized_cycle_transfer,
    single_cycle_channel,
)
from .markov import (
    MarkovModel,
    build_model,
    exact_eigenvalue,
    exact_eigenvalue_general,
    exact_probability,
    lambda1_first_order_report,
    predict_probability,
    theorem_constants,
)
from .oracle import eigen_table_to_channel, path_sum_channel, path_sum_exact, trajectory_sample
from .fit import DecayFit, fit_decay
from .spec_io import LoadedSpec, load_spec
from .errors import (
    LogMarkovError,
    DimensionError,
    ValidationError,
    CapacityError,
    HypothesisViolation,
    UnsupportedSpecError,
)

__all__ = [
    'BitString',
    'PauliLabel',
    'PauliChannel',
    'PauliEigenTable',
    'indicator',
    'apply_to_basis',
    'conjugation_sign',
    'channel_eigenvalue',
    'channel_table',
    'compose_superops',
    'dense_superoperator',
    'RegisterLayout',
    'RepetitionCode',
    'LinearCode',
    'TableCode',
    'DecoderTable',
    'QecCycleSpec',
    'PrepSpec',
    'MeasSpec',
    'ExperimentSettings',
    'build_linear_code',
    'build_repetition_cycle',
    'check_decoding_symmetry',
    'direct_readout',
    'validate_spec',
    'CycleTransfer',
    'PrepTransfer',
    'MeasTransfer',
    'absorb_cycle_into_prep',
    'check_smip',
    'cycle_transfer',
    'entanglement_fidelity',
    'meas_transfer',
    'prep_transfer',
    'randomized_cycle_transfer',
    'single_cycle_channel',
    'MarkovModel',
    'build_model',
    'exact_eigenvalue',
    'exact_eigenvalue_general',
    'exact_probability',
    'lambda1_first_order_report',
    'predict_probability',
    'theorem_constants',
    'eigen_table_to_channel',
    'path_sum_channel',
    'path_sum_exact',
    'trajectory_sample',
    'DecayFit',
    'fit_decay',
    'LoadedSpec',
    'load_spec',
    'LogMarkovError',
    'DimensionError',
    'ValidationError',
    'CapacityError',
    'HypothesisViolation',
    'UnsupportedSpecError',
]
