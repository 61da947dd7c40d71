import json

from ._oscint import (
    ExponentTriple,
    GridSpec,
    NondegeneracyReport,
    OscillatoryOp,
    Phase,
    SampledField,
    Space,
    Symbol,
    admissible,
    apply_direct,
    apply_factored,
    check_phase,
    dt_extrapolate,
    forward_transform,
    fp_bilinear_apply,
    free_propagator,
    gaussian,
    inverse_transform,
    lambda_sweep,
    list_experiments,
    lp_norm,
    predicted_exponent,
    random_bandlimited,
    relative_l2_error,
    second_born,
    set_direct_budget,
    set_num_threads,
)
from ._oscint import run_experiment as _run_experiment


def run_experiment(config):
    """Run one experiment config (dict or JSON text); the report comes back parsed."""
    text = config if isinstance(config, str) else json.dumps(config)
    out = _run_experiment(text)
    out["report"] = json.loads(out["report"]) if out["report"] else {}
    return out
