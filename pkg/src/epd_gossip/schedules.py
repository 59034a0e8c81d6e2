"""Coefficient schedules for second-order gossip recursions.

A schedule produces the triple (a_n, b_n, c_n) of
x_{n+1} = a_n omega*x_n + b_n x_n - c_n x_{n-1}, with c_0 = 0 so the first
step is the uniform special case x_1 = a_0 omega*x_0 + b_0 x_0.  Every
schedule satisfies a_n + b_n - c_n = 1, which conserves total mass.

Two Jacobi families are provided: the canonical schedule for dimension d,
hard-coded as the closed forms of the (d/2, 0) family, and the general
(alpha, beta) schedule obtained by renormalizing the classical three-term
recurrence of the Jacobi polynomials P_n so that the iterate polynomials
are pi_n = P_n / P_n(1).  The two are derived independently and must agree
exactly when (alpha, beta) = (d/2, 0); the test suite enforces that.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

from .errors import InvalidScheduleParametersError

Triple = tuple[float, float, float]


@dataclass(frozen=True)
class CoefficientSchedule:
    """Immutable producer of recursion coefficient triples."""

    label: str
    coefficients: Callable[[int], Triple]
    jacobi_params: tuple[float, float] | None = None

    def __call__(self, n: int) -> Triple:
        if n < 0:
            raise ValueError("round index must be >= 0")
        return self.coefficients(n)


def jacobi_schedule(d: int) -> CoefficientSchedule:
    """The canonical acceleration schedule for gossip on Z^d.

    Closed forms of the (d/2, 0) Jacobi family:

    a_0 = (d+4)/(2(2+d)), b_0 = d/(2(2+d)); for n >= 1
    a_n = (2n+d/2+1)(2n+d/2+2) / (2 (n+1+d/2)^2),
    b_n = d^2 (2n+d/2+1) / (8 (n+1+d/2)^2 (2n+d/2)),
    c_n = n^2 (2n+d/2+2) / ((n+1+d/2)^2 (2n+d/2)).
    """
    if d < 1:
        raise InvalidScheduleParametersError(f"d must be >= 1, got {d}")
    h = d / 2.0

    def coef(n: int) -> Triple:
        if n == 0:
            return ((d + 4.0) / (2.0 * (2.0 + d)), d / (2.0 * (2.0 + d)), 0.0)
        a = (2 * n + h + 1) * (2 * n + h + 2) / (2.0 * (n + 1 + h) ** 2)
        b = d * d * (2 * n + h + 1) / (8.0 * (n + 1 + h) ** 2 * (2 * n + h))
        c = n * n * (2 * n + h + 2) / ((n + 1 + h) ** 2 * (2 * n + h))
        return (a, b, c)

    return CoefficientSchedule(f"jacobi-d{d}", coef, (h, 0.0))


def jacobi_general_schedule(alpha: float, beta: float) -> CoefficientSchedule:
    """Jacobi (alpha, beta) schedule from the renormalized three-term recurrence.

    With P_n(1) = binom(n+alpha, n) and s = alpha + beta:

    a_n = (2n+s+1)(2n+s+2) / (2 (n+1+s)(n+1+alpha)),
    b_n = (alpha^2-beta^2)(2n+s+1) / (2 (n+1+s)(n+1+alpha)(2n+s)),
    c_n = n (n+beta)(2n+s+2) / ((n+1+s)(n+1+alpha)(2n+s)),

    and a_0 = (s+2)/(2(alpha+1)), b_0 = (alpha-beta)/(2(alpha+1)), c_0 = 0
    (the n = 0 closed form avoids the removable 0/0 when s = 0).
    """
    alpha = float(alpha)
    beta = float(beta)
    if not (alpha > -1.0 and beta > -1.0):
        raise InvalidScheduleParametersError(
            f"need alpha, beta > -1, got ({alpha}, {beta})"
        )
    s = alpha + beta

    def coef(n: int) -> Triple:
        if n == 0:
            return (
                (s + 2.0) / (2.0 * (alpha + 1.0)),
                (alpha - beta) / (2.0 * (alpha + 1.0)),
                0.0,
            )
        a = (2 * n + s + 1) * (2 * n + s + 2) / (2.0 * (n + 1 + s) * (n + 1 + alpha))
        b = (
            (alpha * alpha - beta * beta)
            * (2 * n + s + 1)
            / (2.0 * (n + 1 + s) * (n + 1 + alpha) * (2 * n + s))
        )
        c = (
            n
            * (n + beta)
            * (2 * n + s + 2)
            / ((n + 1 + s) * (n + 1 + alpha) * (2 * n + s))
        )
        return (a, b, c)

    return CoefficientSchedule(f"jacobi-a{alpha:g}-b{beta:g}", coef, (alpha, beta))


def custom_schedule(name: str, triples) -> CoefficientSchedule:
    """Schedule from explicitly tabulated coefficient triples."""
    table = [tuple(float(v) for v in t) for t in triples]
    if not table or any(len(t) != 3 for t in table):
        raise InvalidScheduleParametersError("triples must be a nonempty list of [a, b, c]")

    def coef(n: int) -> Triple:
        if n >= len(table):
            raise InvalidScheduleParametersError(
                f"custom schedule {name!r} tabulated only up to n = {len(table) - 1}"
            )
        return table[n]

    return CoefficientSchedule(f"custom-{name}", coef, None)


def schedule_from_json(obj: dict) -> CoefficientSchedule:
    return custom_schedule(str(obj["name"]), obj["triples"])


def load_schedule(path) -> CoefficientSchedule:
    with open(path) as fh:
        return schedule_from_json(json.load(fh))


@dataclass(frozen=True)
class AsymptoticsReport:
    """Samples of |a_n - 2| and |n (1 - c_n) - limit| at increasing n."""

    sample_points: tuple[int, ...]
    a_gaps: tuple[float, ...]
    damping_gaps: tuple[float, ...]
    converging: bool


def check_schedule_asymptotics(
    schedule: CoefficientSchedule,
    expected_limit: float,
    sample_points=(100, 1_000, 10_000, 100_000),
) -> AsymptoticsReport:
    """Check a_n -> 2 and n (1 - c_n) -> expected_limit (= 2 alpha + 1).

    Flags failure when either gap fails to decrease over the last two samples.
    """
    a_gaps = []
    damping_gaps = []
    for n in sample_points:
        a, _, c = schedule(n)
        a_gaps.append(abs(a - 2.0))
        damping_gaps.append(abs(n * (1.0 - c) - expected_limit))
    converging = a_gaps[-1] <= a_gaps[-2] and damping_gaps[-1] <= damping_gaps[-2]
    return AsymptoticsReport(
        tuple(sample_points), tuple(a_gaps), tuple(damping_gaps), converging
    )
