"""Desk-scale quantum onion routing: exact class-group arithmetic, cyclic
association schemes, a small statevector engine, and a multi-actor protocol
runner with eavesdropper harnesses."""

from .classgroup import (
    Discriminant,
    QuadraticForm,
    RandomElementParams,
    class_number,
    compose,
    enumerate_reduced,
    inverse,
    power,
    principal_form,
    random_element,
    reduce,
)
from .errors import ConfigError, FixtureError, InvalidFormError, QOnionError, ResourceLimitError
from .protocol import (
    Actor,
    MessageCircuit,
    RunConfig,
    SessionKey,
    Transcript,
    build_chain,
    dh_session_key,
    message_decrypt,
    message_encrypt,
    run,
    run_procedure1,
    run_procedure3,
    run_procedure4,
    shift_gate,
    uncompute_key,
)
from .qsim import PermutationGate, RegisterLayout, StateVector, new_state
from .rng import SplitMix64
from .scheme import (
    ActionTable,
    CycleAction,
    SchemeMatrix,
    SpectralData,
    act,
    adjacency,
    bundled_action_table,
    compose_actions,
    export_graph,
    intersection_numbers,
    load_action_table,
    product_walk,
    spectral,
    walk_unitary,
)
from .sobol import sobol_point

__version__ = "0.1.0"
