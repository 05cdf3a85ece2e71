"""Deterministic two-way word transducers, their transition monoids, and
first-order word transductions, with verified translations between the two
models."""

from .words import (
    Alphabet,
    Dfa,
    SequentialTransducer,
    alphabet,
    as_word,
    dfa_accepts,
    dfa_combine,
    dfa_is_counter_free,
    make_dfa,
    make_seq,
    seq_run,
    show_word,
)
from .twoway import (
    Run,
    TwoWayTransducer,
    behaviors,
    context_path,
    make_twoway,
    mirror,
    normalize,
    simulate,
)
from .monoid import (
    BehaviorProfile,
    TransitionMonoid,
    class_language_dfa,
    class_of,
    glue,
    is_aperiodic,
    reach_decision,
    transition_monoid,
)
from .logic import (
    EvalSession,
    Formula,
    MonoidRegistry,
    certify_star_free,
    compile_to_dfa,
    eval_formula,
    parse_formula,
    show_formula,
)
from .fot import FoTransduction, fot_domain_check, fot_eval
from .lookaround import (
    FoLookAroundTransducer,
    SfLookAroundTransducer,
    simulate_fo_la,
    simulate_sf_la,
)
from .translate import (
    compose_right_seq_2w,
    compose_seq_2w,
    fo_la_to_sf_la,
    fot_to_fo_lookaround,
    fot_to_twoway,
    sf_la_to_plain,
    twoway_to_fot,
)
from .cli import Artifact, check_equiv, parse, serialize

__all__ = [
    "Alphabet",
    "Artifact",
    "BehaviorProfile",
    "Dfa",
    "EvalSession",
    "FoLookAroundTransducer",
    "FoTransduction",
    "Formula",
    "MonoidRegistry",
    "Run",
    "SequentialTransducer",
    "SfLookAroundTransducer",
    "TransitionMonoid",
    "TwoWayTransducer",
    "alphabet",
    "as_word",
    "behaviors",
    "certify_star_free",
    "check_equiv",
    "class_language_dfa",
    "class_of",
    "compile_to_dfa",
    "compose_right_seq_2w",
    "compose_seq_2w",
    "context_path",
    "dfa_accepts",
    "dfa_combine",
    "dfa_is_counter_free",
    "eval_formula",
    "fo_la_to_sf_la",
    "fot_domain_check",
    "fot_eval",
    "fot_to_fo_lookaround",
    "fot_to_twoway",
    "glue",
    "is_aperiodic",
    "make_dfa",
    "make_seq",
    "make_twoway",
    "mirror",
    "normalize",
    "parse",
    "parse_formula",
    "reach_decision",
    "seq_run",
    "serialize",
    "sf_la_to_plain",
    "show_formula",
    "show_word",
    "simulate",
    "simulate_fo_la",
    "simulate_sf_la",
    "transition_monoid",
    "twoway_to_fot",
]
