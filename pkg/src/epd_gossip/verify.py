"""Fourier-side tooling for fields and the numerical limit-theorem harness.

The asymptotic statements being checked are little-o limits, which cannot be
falsified at finite n; the harness operationalizes each as "the scaled error
is strictly decreasing over the last sampled rounds and (where configured)
ends below a cap".  Caps are harness configuration, not claims from the
underlying theory.

The weak central-limit statement gets no separate harness: the sup-norm
local check is strictly stronger at desk scale and subsumes it.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .engine import filter_label, run_second_order, run_simple
from .errors import (
    NotAperiodicError,
    NotSymmetricError,
    PeriodicityDetectedError,
    ResolutionTooLowError,
)
from .lattice import (
    LatticeFilter,
    ScalarField,
    filter_fourier,
    verify_aperiodicity,
)
from .oracles import (
    EpdSolution,
    HeatSolution,
    epd_eval,
    epd_filtered_on_lattice,
    epd_fourier,
    heat_eval,
)
from .schedules import CoefficientSchedule
from .specfun import JacobiParams, gamma_fn, jacobi_normalized


def field_fourier(fld: ScalarField, xi) -> complex:
    """x_hat(xi) = sum_v x(v) e^{i <xi, v>}, evaluated exactly on the support box."""
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    v = np.arange(-fld.box_radius, fld.box_radius + 1)
    acc = fld.values.astype(complex)
    for axis in range(fld.dim):
        phase = np.exp(1j * xi_arr[axis] * v)
        acc = np.tensordot(acc, phase, axes=([0], [0]))
    return complex(acc)


def plancherel_l2(fld: ScalarField, quad_points_per_dim: int) -> float:
    """Frequency-side sum of squares, (1/M^d) sum_j |x_hat(xi_j)|^2.

    Exact (to rounding) once M >= 2 box_radius + 1, because |x_hat|^2 is a
    trigonometric polynomial of degree 2 box_radius per axis.
    """
    M = int(quad_points_per_dim)
    m = fld.box_radius
    if M < 2 * m + 1:
        raise ResolutionTooLowError(
            f"need quad_points_per_dim >= {2 * m + 1}, got {M}"
        )
    embedded = np.zeros((M,) * fld.dim, dtype=complex)
    v = np.arange(-m, m + 1)
    mesh = np.meshgrid(*([v] * fld.dim), indexing="ij")
    signs = (-1.0) ** np.abs(sum(mesh))
    idx = tuple(g % M for g in mesh)
    embedded[idx] = fld.values * signs
    x_hat = np.fft.ifftn(embedded) * float(M**fld.dim)
    return float((np.abs(x_hat) ** 2).sum()) / float(M**fld.dim)


@dataclass
class TheoremReport:
    """Scaled-error series for one limit statement plus a pass/fail verdict."""

    theorem_id: str
    parameters: dict
    sample_rounds: list
    metric_series: list[float]
    verdict: bool
    details: dict = dc_field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "theorem_id": self.theorem_id,
            "params": self.parameters,
            "series": [
                {"n": n, "metric": m}
                for n, m in zip(self.sample_rounds, self.metric_series)
            ],
            "verdict": "pass" if self.verdict else "fail",
            "details": self.details,
        }


def report_to_csv(report: TheoremReport, path) -> None:
    """CSV mirror of the report series, columns n, metric."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "metric"])
        for n, metric in zip(report.sample_rounds, report.metric_series):
            writer.writerow([n, repr(float(metric))])


def _strictly_decreasing(seq) -> bool:
    return all(a > b for a, b in zip(seq, seq[1:]))


def ensure_aperiodic(filt: LatticeFilter, grid_points_per_dim=None) -> float:
    """Certify the filter's aperiodicity margin, computing it if unset."""
    if filt.aperiodicity_margin is not None:
        return filt.aperiodicity_margin
    try:
        report = verify_aperiodicity(filt, grid_points_per_dim)
    except PeriodicityDetectedError as exc:
        raise NotAperiodicError(str(exc), xi=exc.xi) from exc
    if not report.passed:
        raise NotAperiodicError(
            f"margin estimate {report.worst_ratio:.3e} at xi={report.worst_xi} is too small"
        )
    return report.margin


def _require_symmetric(filt: LatticeFilter) -> None:
    if not filt.is_symmetric:
        raise NotSymmetricError("operation requires a symmetric filter")


def verify_local_clt(
    filt: LatticeFilter,
    rounds,
    threshold: float = 0.05,
    cell_budget: int | None = None,
) -> TheoremReport:
    """Scaled sup distance between simple gossip and the heat density.

    e_n = n^{d/2} sup_v |x_n(v) - u(n, v)| over the support box; passes when
    e_n decreases over the last three sampled rounds and ends below the cap.
    Outside the box x_n vanishes exactly and the Gaussian tail at ||v|| >= n R
    is far below every tolerance used here.
    """
    margin = ensure_aperiodic(filt)
    rounds = sorted(int(n) for n in rounds)
    if any(n < 1 for n in rounds):
        raise ValueError("rounds must be >= 1")
    kwargs = {} if cell_budget is None else {"cell_budget": cell_budget}
    trace = run_simple(filt, max(rounds), snapshot_rounds=set(rounds), **kwargs)
    series = []
    for n in rounds:
        snap = trace.snapshot(n)
        sol = HeatSolution(filt.dim, filt.covariance, float(n), verify_mass=False)
        m = snap.box_radius
        v = np.arange(-m, m + 1)
        mesh = np.stack(np.meshgrid(*([v] * filt.dim), indexing="ij"), axis=-1)
        err = float(np.abs(snap.values - heat_eval(sol, mesh)).max())
        series.append(n ** (filt.dim / 2.0) * err)
    tail = series[-3:] if len(series) >= 3 else series
    verdict = _strictly_decreasing(tail) and series[-1] < threshold
    return TheoremReport(
        theorem_id="LocalCLT",
        parameters={
            "filter": trace.filter_id,
            "threshold": threshold,
            "aperiodicity_margin": margin,
        },
        sample_rounds=rounds,
        metric_series=series,
        verdict=verdict,
    )


def _schedule_params(schedule: CoefficientSchedule) -> tuple[float, float]:
    if schedule.jacobi_params is None:
        raise ValueError(
            f"schedule {schedule.label!r} carries no Jacobi parameters"
        )
    return schedule.jacobi_params


def verify_weak_epd_pointwise(
    filt: LatticeFilter,
    schedule: CoefficientSchedule,
    xi,
    t: float,
    eps_list,
) -> TheoremReport:
    """Pointwise Fourier gap |pi_floor(t/eps)(omega_hat(eps xi)) - u_hat(t, xi)|.

    Pure special-function evaluation; no field iteration involved.  Verdict:
    the gap decreases along the epsilon list.
    """
    _require_symmetric(filt)
    ensure_aperiodic(filt)
    alpha, beta = _schedule_params(schedule)
    params = JacobiParams(alpha, beta)
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    sol = EpdSolution(
        alpha, filt.dim, filt.covariance, float(t), verify_mass=False
    )
    target = epd_fourier(sol, xi_arr)
    eps_list = list(eps_list)
    gaps = []
    for eps in eps_list:
        n = int(math.floor(t / eps))
        lam = filter_fourier(filt, eps * xi_arr).real
        gaps.append(abs(jacobi_normalized(n, params, lam) - target))
    return TheoremReport(
        theorem_id="WeakEPD",
        parameters={
            "filter": filter_label(filt),
            "schedule": schedule.label,
            "xi": [float(x) for x in xi_arr],
            "t": float(t),
        },
        sample_rounds=eps_list,
        metric_series=gaps,
        verdict=_strictly_decreasing(gaps),
        details={"limit_value": float(target)},
    )


def local_epd_quad_points(dim: int, time: float) -> int:
    """Harness resolution for the band-limited oracle.

    Larger than the oracle's own default so the residual aliasing stays
    below the doubling-check tolerance even at small t.
    """
    base = max(64, 8 * math.ceil(time))
    floor = 1024 if dim == 1 else 512
    return max(base, floor)


def verify_local_epd(
    filt: LatticeFilter,
    schedule: CoefficientSchedule,
    rounds,
    quad_points_per_dim=None,
    cell_budget: int | None = None,
) -> TheoremReport:
    """Scaled l2 distance between the accelerated iterates and u(n,.) * psi.

    E_n = n^d sum_v (x_n(v) - (u(n,.) * psi)(v))^2 over the box
    [-(nR+5), nR+5]^d, which covers the oracle's ellipsoid support.
    Verdict: E_n decreasing over the last three samples (round 0, where the
    oracle is undefined, is excluded by construction).  The unfiltered sup
    distance sup_v |x_n(v) - u(n, v)| is reported in the details as an
    exploratory metric; nothing is asserted about it.
    """
    _require_symmetric(filt)
    ensure_aperiodic(filt)
    alpha, beta = _schedule_params(schedule)
    if beta != 0.0 or alpha != filt.dim / 2.0:
        raise ValueError(
            "local EPD verification is stated for the (d/2, 0) schedule"
        )
    rounds = sorted(int(n) for n in rounds)
    if any(n < 1 for n in rounds):
        raise ValueError("rounds must be >= 1 (the t = 0 oracle is undefined)")
    kwargs = {} if cell_budget is None else {"cell_budget": cell_budget}
    trace = run_second_order(
        filt, schedule, max(rounds), snapshot_rounds=set(rounds), **kwargs
    )
    series = []
    unfiltered = []
    for n in rounds:
        snap = trace.snapshot(n)
        m = n * filt.radius + 5
        sol = EpdSolution(alpha, filt.dim, filt.covariance, float(n), verify_mass=False)
        M = quad_points_per_dim or local_epd_quad_points(filt.dim, float(n))
        oracle = epd_filtered_on_lattice(sol, m, M)
        x = snap.padded_to(m)
        diff = x.values - oracle.values
        series.append(n**filt.dim * float((diff * diff).sum()))
        v = np.arange(-m, m + 1)
        mesh = np.stack(np.meshgrid(*([v] * filt.dim), indexing="ij"), axis=-1)
        unfiltered.append(float(np.abs(x.values - epd_eval(sol, mesh)).max()))
    tail = series[-3:] if len(series) >= 3 else series
    return TheoremReport(
        theorem_id="LocalEPD",
        parameters={"filter": trace.filter_id, "schedule": schedule.label},
        sample_rounds=rounds,
        metric_series=series,
        verdict=_strictly_decreasing(tail),
        details={"unfiltered_sup_distance": unfiltered},
    )


@dataclass
class RateRow:
    n: int
    l2_sq: float
    scaled_l2: float
    predicted: float
    ratio: float


@dataclass
class SharpRateSeries:
    """Empirical n^d sum x_n^2 against the predicted sharp constant."""

    filter_id: str
    predicted_constant: float
    rows: list[RateRow]
    verdict: bool


def sharp_rate_constant(filt: LatticeFilter) -> float:
    """1 / ((det Q)^(1/2) |B(0,1)|) with |B(0,1)| = pi^(d/2)/Gamma(d/2+1)."""
    det = float(np.linalg.det(filt.covariance))
    ball = math.pi ** (filt.dim / 2.0) / gamma_fn(filt.dim / 2.0 + 1.0)
    return 1.0 / (math.sqrt(det) * ball)


def sharp_rate_estimate(
    filt: LatticeFilter,
    schedule: CoefficientSchedule,
    rounds,
    tolerance: float = 0.05,
    cell_budget: int | None = None,
) -> SharpRateSeries:
    """Per-round ratio of n^d sum_v x_n(v)^2 to the predicted constant.

    Verdict: the final ratio lies within ``tolerance`` of one.
    """
    _require_symmetric(filt)
    ensure_aperiodic(filt)
    rounds = sorted(int(n) for n in rounds)
    kwargs = {} if cell_budget is None else {"cell_budget": cell_budget}
    trace = run_second_order(filt, schedule, max(rounds), **kwargs)
    const = sharp_rate_constant(filt)
    by_round = {m.n: m for m in trace.metrics}
    rows = []
    for n in rounds:
        l2 = by_round[n].l2_sq
        scaled = n**filt.dim * l2
        rows.append(RateRow(n, l2, scaled, const, scaled / const))
    verdict = abs(rows[-1].ratio - 1.0) <= tolerance
    return SharpRateSeries(trace.filter_id, const, rows, verdict)
