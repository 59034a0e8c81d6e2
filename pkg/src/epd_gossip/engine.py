"""Run simple and second-order gossip iterations from the Dirac field.

Every run starts at x_0 = 1_0 and records per-round metrics (mass, squared
l2 norm, sup norm); field snapshots are retained only at requested rounds to
bound memory.  Second-order iterates are signed measures and are never
clipped.  The box grows by the filter radius each round; values below the
subnormal floor are flushed to exact zero, which keeps long runs fast
without affecting any tolerance used in this package.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

from ._kernels import DENORMAL_FLOOR, gossip_step
from .errors import CellBudgetExceededError, SnapshotMissingError
from .lattice import (
    BUILTIN_FILTERS,
    LatticeFilter,
    ScalarField,
    dirac_field,
    filter_from_json,
    load_filter,
)
from .schedules import (
    CoefficientSchedule,
    jacobi_general_schedule,
    jacobi_schedule,
    load_schedule,
)

DEFAULT_CELL_BUDGET = 100_000_000


@dataclass(frozen=True)
class RoundMetrics:
    n: int
    l2_sq: float
    sup: float
    mass: float


@dataclass
class IterationTrace:
    """Metrics and optional snapshots of one gossip run."""

    filter_id: str
    schedule_id: str
    rounds: int
    fields: dict[int, ScalarField] = field(default_factory=dict, repr=False)
    metrics: list[RoundMetrics] = field(default_factory=list, repr=False)

    def snapshot(self, n: int) -> ScalarField:
        if n not in self.fields:
            raise SnapshotMissingError(f"no snapshot retained for round {n}")
        return self.fields[n]


def _check_budget(filt: LatticeFilter, n_max: int, cell_budget: int) -> None:
    cells = float(2 * n_max * filt.radius + 1) ** filt.dim
    if cells > cell_budget:
        raise CellBudgetExceededError(
            f"run of {n_max} rounds needs {cells:.3g} cells "
            f"(budget {cell_budget:.3g})"
        )


def filter_label(filt: LatticeFilter) -> str:
    """Registry name of a built-in filter, or a synthesized custom label."""
    for name, builder in BUILTIN_FILTERS.items():
        built = builder()
        if built.dim == filt.dim and built.entries == filt.entries:
            return name
    return f"custom-{filt.dim}d-{len(filt.entries)}pt"


def run_simple(
    filt: LatticeFilter,
    n_max: int,
    snapshot_rounds=(),
    cell_budget: int = DEFAULT_CELL_BUDGET,
) -> IterationTrace:
    """Iterate x_{n+1} = omega * x_n for n_max rounds."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    _check_budget(filt, n_max, cell_budget)
    snapshot_rounds = set(snapshot_rounds)
    trace = IterationTrace(filter_label(filt), "simple", n_max)
    offs, wts = filt.offsets_weights()
    x = dirac_field(filt.dim).values
    trace.metrics.append(RoundMetrics(0, 1.0, 1.0, 1.0))
    if 0 in snapshot_rounds:
        trace.fields[0] = ScalarField(filt.dim, 0, x.copy())
    for n in range(1, n_max + 1):
        x, mass, l2, sup = gossip_step(
            x, x, offs, wts, filt.radius, tiny=DENORMAL_FLOOR
        )
        trace.metrics.append(RoundMetrics(n, l2, sup, mass))
        if n in snapshot_rounds:
            trace.fields[n] = ScalarField(filt.dim, n * filt.radius, x.copy())
    return trace


def run_second_order(
    filt: LatticeFilter,
    schedule: CoefficientSchedule,
    n_max: int,
    snapshot_rounds=(),
    cell_budget: int = DEFAULT_CELL_BUDGET,
) -> IterationTrace:
    """Iterate x_{n+1} = a_n omega*x_n + b_n x_n - c_n x_{n-1}.

    The first step x_1 = a_0 omega*x_0 + b_0 x_0 is the c_0 = 0 case of the
    general update.  Iterates may take negative values.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    _check_budget(filt, n_max, cell_budget)
    snapshot_rounds = set(snapshot_rounds)
    trace = IterationTrace(filter_label(filt), schedule.label, n_max)
    offs, wts = filt.offsets_weights()
    R = filt.radius
    x_prev = dirac_field(filt.dim).values
    trace.metrics.append(RoundMetrics(0, 1.0, 1.0, 1.0))
    if 0 in snapshot_rounds:
        trace.fields[0] = ScalarField(filt.dim, 0, x_prev.copy())
    x = x_prev
    for n in range(1, n_max + 1):
        a, b, c = schedule(n - 1)
        new, mass, l2, sup = gossip_step(
            x, x_prev, offs, wts, R, a=a, b=b, c=c, tiny=DENORMAL_FLOOR
        )
        x_prev, x = x, new
        trace.metrics.append(RoundMetrics(n, l2, sup, mass))
        if n in snapshot_rounds:
            trace.fields[n] = ScalarField(filt.dim, n * R, x.copy())
    return trace


def fundamental_profile(trace: IterationTrace, n: int):
    """Nonzero entries of the retained round-n field, in vertex order."""
    return trace.snapshot(n).nonzero_entries()


def metrics_to_csv(trace: IterationTrace, path) -> None:
    """Write the per-round metric records as columns n, l2_sq, sup, mass."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "l2_sq", "sup", "mass"])
        for m in trace.metrics:
            writer.writerow([m.n, repr(m.l2_sq), repr(m.sup), repr(m.mass)])


# ---------------------------------------------------------------------------
# run descriptor (JSON) interface


def resolve_filter(spec) -> LatticeFilter:
    """Turn a descriptor filter entry (builtin name, path, or inline object) into a filter."""
    if isinstance(spec, LatticeFilter):
        return spec
    if isinstance(spec, dict):
        return filter_from_json(spec)
    name = str(spec)
    if name in BUILTIN_FILTERS:
        return BUILTIN_FILTERS[name]()
    return load_filter(name)


def resolve_schedule(spec, dim: int):
    """Turn a descriptor schedule entry into a schedule, or None for "simple".

    Accepts "simple", "jacobi" (the (d/2, 0) schedule for the filter
    dimension), {"alpha": .., "beta": ..} or a path to a tabulated-schedule
    JSON file.
    """
    if spec is None or spec == "simple":
        return None
    if isinstance(spec, CoefficientSchedule):
        return spec
    if spec == "jacobi":
        return jacobi_schedule(dim)
    if isinstance(spec, dict):
        return jacobi_general_schedule(float(spec["alpha"]), float(spec.get("beta", 0.0)))
    return load_schedule(str(spec))


def run_from_descriptor(descriptor: dict, cell_budget: int = DEFAULT_CELL_BUDGET) -> IterationTrace:
    """Execute the JSON run descriptor.

    Shape: {"filter": <builtin name | path | inline object>,
            "schedule": "simple" | "jacobi" | {"alpha":..,"beta":..} | <path>,
            "rounds": int, "snapshots": [int, ...]}.
    """
    filt = resolve_filter(descriptor["filter"])
    schedule = resolve_schedule(descriptor.get("schedule", "simple"), filt.dim)
    rounds = int(descriptor["rounds"])
    snaps = [int(s) for s in descriptor.get("snapshots", [])]
    if schedule is None:
        return run_simple(filt, rounds, snaps, cell_budget)
    return run_second_order(filt, schedule, rounds, snaps, cell_budget)


def load_run_descriptor(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
