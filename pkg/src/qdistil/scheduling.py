"""Symmetric-scheduling repetition and expected-cost (yield) accounting.

Round one uses the chosen protocol; every later round distills pairs of
the previous round's (Bell-diagonal) output with the plain recurrence
protocol.  Cost bookkeeping is expected-value accounting: a filtered
copy costs 1/P_filter base pairs, and each round consumes two copies of
the previous stage per attempt, so

    cost_1 = 2 * (1 / P_filter) / P_distil_1
    cost_k = 2 * cost_{k-1} / P_distil_k          (k >= 2)

Failed attempts consume their inputs.  The yield is 1/cost of the first
round whose output fidelity reaches the target.  Absolute yields depend
on this accounting; trend and ratio comparisons between protocols do not.
"""
from dataclasses import dataclass, field
from typing import List, Tuple

from . import noise, protocols, qstate
from .errors import QDistilError, TargetUnreachable

PLATEAU_GAIN = 1e-12
DEFAULT_MAX_ROUNDS = 50


@dataclass(frozen=True)
class YieldReport:
    rounds: int
    final_fidelity: float
    expected_base_pairs_per_output: float
    yield_value: float
    reached_target: bool
    per_round_trace: List[Tuple[float, float, float]] = field(default_factory=list)
    # trace entries: (fidelity, distil_prob, filter_prob) per round


def symmetric_yield(rho, protocol, target_fidelity, max_rounds=DEFAULT_MAX_ROUNDS):
    """Iterate distillation to a target fidelity and account base-pair cost.

    Raises TargetUnreachable when the fidelity gain across a round drops
    below 1e-12 while still under target; reaching ``max_rounds`` without
    a plateau returns a report flagged ``reached_target=False``.
    """
    if not 0.5 < target_fidelity < 1:
        raise ValueError(f"target fidelity must lie in (1/2, 1), got {target_fidelity}")
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    state = qstate.as_density(rho)
    fidelity = qstate.max_bell_weight(state)
    cost = 1.0
    trace = []
    rounds = 0
    while fidelity < target_fidelity and rounds < max_rounds:
        if rounds == 0:
            out = protocols.protocol_round(protocol, state)
        else:
            out = protocols.dejmps_round(state)
        rounds += 1
        cost = 2.0 * (cost / out.filter_prob) / out.distil_prob
        trace.append((out.output_fidelity, out.distil_prob, out.filter_prob))
        if out.output_fidelity - fidelity < PLATEAU_GAIN and out.output_fidelity < target_fidelity:
            raise TargetUnreachable(
                f"fidelity plateaued at {out.output_fidelity:.6f} after {rounds} rounds"
            )
        state = out.output_state
        fidelity = out.output_fidelity
    return YieldReport(
        rounds=rounds,
        final_fidelity=float(fidelity),
        expected_base_pairs_per_output=float(cost),
        yield_value=1.0 / cost,
        reached_target=fidelity >= target_fidelity,
        per_round_trace=trace,
    )


def yield_sweep(family, fixed_params, sweep_param, values, protocols_list,
                target_fidelity=0.99, max_rounds=DEFAULT_MAX_ROUNDS):
    """One YieldReport row per (grid value, protocol), in grid order.

    Per-cell failures (unreachable targets, unfilterable states) are
    recorded in the row's ``error`` field and never abort the sweep.
    """
    rows = []
    for value in values:
        params = dict(fixed_params)
        params[sweep_param] = value
        for name in protocols_list:
            row = {
                "param": float(value),
                "protocol": name,
                "rounds": None,
                "yield": 0.0,
                "final_fidelity": None,
                "error": "",
            }
            try:
                state = noise.make_state(family, **params)
                report = symmetric_yield(state, name, target_fidelity, max_rounds)
                row["rounds"] = report.rounds
                row["final_fidelity"] = report.final_fidelity
                if report.reached_target:
                    row["yield"] = report.yield_value
                else:
                    row["error"] = f"target not reached within {max_rounds} rounds"
            except (QDistilError, ValueError) as exc:
                row["error"] = f"{type(exc).__name__}: {exc}"
            rows.append(row)
    return rows
