"""Translation-invariant averaging filters on Z^d and dense lattice fields.

A filter is a finitely supported probability vector omega with zero mean and
full-rank covariance; one gossip round is the discrete convolution omega * x.
Fields are stored densely on the centered box [-m, m]^d.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from ._kernels import gossip_step
from .errors import (
    DegenerateCovarianceError,
    DimensionMismatchError,
    DriftError,
    EmptyFilterError,
    NotNormalizedError,
    PeriodicityDetectedError,
)

NORMALIZATION_TOL = 1e-12
DRIFT_TOL = 1e-12
MIN_COVARIANCE_EIGENVALUE = 1e-10
PERIODICITY_TOL = 1e-12
MARGIN_FLOOR = 1e-6

#: default aperiodicity-scan resolution per dimension
DEFAULT_GRID_POINTS = {1: 256, 2: 256, 3: 64}


@dataclass
class LatticeFilter:
    """Validated local averaging filter on Z^dim.

    ``entries`` maps offset tuples to strictly positive weights summing to
    one.  ``aperiodicity_margin`` is filled in by :func:`verify_aperiodicity`.
    """

    dim: int
    entries: dict[tuple[int, ...], float]
    radius: int
    mean: np.ndarray
    covariance: np.ndarray
    is_symmetric: bool
    aperiodicity_margin: float | None = None

    def offsets_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """Entries as parallel (n, dim) int and (n,) float arrays, offset-sorted."""
        keys = sorted(self.entries)
        offs = np.array(keys, dtype=np.int64).reshape(len(keys), self.dim)
        wts = np.array([self.entries[k] for k in keys], dtype=np.float64)
        return offs, wts


def new_filter(dim: int, entries) -> LatticeFilter:
    """Build and validate a filter from (offset, weight) pairs.

    Raises EmptyFilterError / NotNormalizedError / DriftError /
    DegenerateCovarianceError when the standing assumptions fail.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    items: dict[tuple[int, ...], float] = {}
    for offset, weight in entries:
        key = tuple(int(v) for v in np.atleast_1d(offset))
        if len(key) != dim:
            raise DimensionMismatchError(
                f"offset {key} does not have dimension {dim}"
            )
        if key in items:
            raise ValueError(f"duplicate offset {key}")
        w = float(weight)
        if w <= 0.0:
            raise ValueError(f"weight for offset {key} must be > 0, got {w}")
        items[key] = w
    if not items:
        raise EmptyFilterError("filter needs at least one entry")

    offs = np.array(sorted(items), dtype=np.int64).reshape(len(items), dim)
    wts = np.array([items[tuple(o)] for o in offs], dtype=np.float64)
    total = wts.sum()
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NotNormalizedError(f"weights sum to {total!r}, expected 1")
    mean = wts @ offs
    if np.max(np.abs(mean)) > DRIFT_TOL:
        raise DriftError(f"filter mean {mean} is not zero")
    cov = (offs.T * wts) @ offs
    cov = 0.5 * (cov + cov.T)
    smallest = float(np.linalg.eigvalsh(cov)[0])
    if smallest <= MIN_COVARIANCE_EIGENVALUE:
        raise DegenerateCovarianceError(
            f"covariance has smallest eigenvalue {smallest:.3e}"
        )
    radius = int(np.max(np.abs(offs)))
    symmetric = all(
        items.get(tuple(-v for v in key)) == w for key, w in items.items()
    )
    return LatticeFilter(
        dim=dim,
        entries=items,
        radius=radius,
        mean=np.asarray(mean, dtype=float),
        covariance=cov,
        is_symmetric=symmetric,
    )


def standard_filter(dim: int) -> LatticeFilter:
    """Nearest-neighbour filter: weight 1/(2 dim) on each +/- unit vector."""
    w = 1.0 / (2 * dim)
    entries = []
    for i in range(dim):
        e = [0] * dim
        e[i] = 1
        entries.append((tuple(e), w))
        e2 = [0] * dim
        e2[i] = -1
        entries.append((tuple(e2), w))
    return new_filter(dim, entries)


def triangular_filter() -> LatticeFilter:
    """Six-neighbour filter realizing the triangular lattice on Z^2."""
    sixth = 1.0 / 6.0
    offsets = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)]
    return new_filter(2, [(o, sixth) for o in offsets])


def lazy_filter(dim: int) -> LatticeFilter:
    """Lazy nearest-neighbour filter: 1/2 at the origin, 1/(4 dim) on axes.

    Aperiodic in every dimension; the dim = 1 case is the {0: 1/2, +/-1: 1/4}
    filter used throughout the experiments.
    """
    entries = [(tuple([0] * dim), 0.5)]
    w = 1.0 / (4 * dim)
    for i in range(dim):
        e = [0] * dim
        e[i] = 1
        entries.append((tuple(e), w))
        e2 = [0] * dim
        e2[i] = -1
        entries.append((tuple(e2), w))
    return new_filter(dim, entries)


#: filters addressable by name from run descriptors and the CLI
BUILTIN_FILTERS = {
    "standard-1d": lambda: standard_filter(1),
    "standard-2d": lambda: standard_filter(2),
    "standard-3d": lambda: standard_filter(3),
    "lazy-1d": lambda: lazy_filter(1),
    "triangular": triangular_filter,
}


@dataclass
class ScalarField:
    """Real field on Z^dim supported in the box [-box_radius, box_radius]^dim."""

    dim: int
    box_radius: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        expected = (2 * self.box_radius + 1,) * self.dim
        if self.values.shape != expected:
            raise ValueError(
                f"values shape {self.values.shape} does not match box {expected}"
            )

    def mass(self) -> float:
        return float(self.values.sum())

    def l2_squared(self) -> float:
        return float((self.values * self.values).sum())

    def sup_norm(self) -> float:
        return float(np.abs(self.values).max())

    def value_at(self, vertex) -> float:
        idx = tuple(int(v) + self.box_radius for v in np.atleast_1d(vertex))
        if any(i < 0 or i > 2 * self.box_radius for i in idx):
            return 0.0
        return float(self.values[idx])

    def nonzero_entries(self) -> list[tuple[tuple[int, ...], float]]:
        """All nonzero (vertex, value) pairs in lexicographic vertex order."""
        out = []
        for idx in np.argwhere(self.values != 0.0):
            vertex = tuple(int(i) - self.box_radius for i in idx)
            out.append((vertex, float(self.values[tuple(idx)])))
        out.sort(key=lambda item: item[0])
        return out

    def padded_to(self, box_radius: int) -> "ScalarField":
        """Zero-extend to a larger centered box."""
        if box_radius < self.box_radius:
            raise ValueError("cannot shrink a field box")
        pad = box_radius - self.box_radius
        return ScalarField(
            self.dim, box_radius, np.pad(self.values, pad) if pad else self.values.copy()
        )


def dirac_field(dim: int) -> ScalarField:
    """Unit point mass at the origin."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return ScalarField(dim, 0, np.ones((1,) * dim))


def convolve(filt: LatticeFilter, fld: ScalarField) -> ScalarField:
    """One local averaging round: (omega * x)(v) = sum_eta omega(eta) x(v - eta).

    The output box grows by the filter radius; total mass is preserved.
    """
    if filt.dim != fld.dim:
        raise DimensionMismatchError(
            f"filter dim {filt.dim} != field dim {fld.dim}"
        )
    offs, wts = filt.offsets_weights()
    out, _, _, _ = gossip_step(fld.values, fld.values, offs, wts, filt.radius)
    return ScalarField(fld.dim, fld.box_radius + filt.radius, out)


def filter_fourier(filt: LatticeFilter, xi) -> complex:
    """omega_hat(xi) = sum_v omega(v) e^{i <xi, v>}; |omega_hat| <= 1."""
    xi_arr = np.asarray(xi, dtype=float)
    offs, wts = filt.offsets_weights()
    phases = offs @ np.atleast_1d(xi_arr)
    return complex(np.sum(wts * np.exp(1j * phases)))


def _fourier_magnitude_grid(filt: LatticeFilter, n_points: int):
    """|omega_hat| and squared norms on the closed uniform grid over [-pi,pi]^d."""
    axes = [np.linspace(-np.pi, np.pi, n_points)] * filt.dim
    grids = np.meshgrid(*axes, indexing="ij")
    offs, wts = filt.offsets_weights()
    acc = np.zeros(grids[0].shape, dtype=complex)
    for k in range(len(wts)):
        phase = sum(offs[k, i] * grids[i] for i in range(filt.dim))
        acc += wts[k] * np.exp(1j * phase)
    norm_sq = sum(g * g for g in grids)
    return np.abs(acc), norm_sq, grids


@dataclass
class AperiodicityReport:
    """Outcome of the grid scan for the margin in |omega_hat| <= 1 - margin ||xi||^2."""

    passed: bool
    margin: float | None
    worst_xi: np.ndarray
    worst_ratio: float


def verify_aperiodicity(
    filt: LatticeFilter, grid_points_per_dim: int | None = None
) -> AperiodicityReport:
    """Estimate the aperiodicity margin by a uniform frequency-grid scan.

    Samples the closed grid over [-pi, pi]^d excluding the cell around the
    origin and minimizes (1 - |omega_hat|) / ||xi||^2.  On success the margin
    is stored on the filter.  Raises PeriodicityDetectedError if some nonzero
    frequency has |omega_hat| >= 1 - 1e-12.
    """
    if grid_points_per_dim is None:
        grid_points_per_dim = DEFAULT_GRID_POINTS.get(filt.dim, 32)
    if grid_points_per_dim < 16:
        raise ValueError("grid_points_per_dim must be >= 16")
    mag, norm_sq, grids = _fourier_magnitude_grid(filt, grid_points_per_dim)
    h = 2.0 * np.pi / (grid_points_per_dim - 1)
    sup_norm = np.maximum.reduce([np.abs(g) for g in grids])
    keep = sup_norm >= h
    if np.any(mag[keep] >= 1.0 - PERIODICITY_TOL):
        bad = np.argwhere(keep & (mag >= 1.0 - PERIODICITY_TOL))[0]
        xi_bad = np.array([g[tuple(bad)] for g in grids])
        raise PeriodicityDetectedError(
            f"|omega_hat| = 1 at xi = {np.round(xi_bad, 6)}", xi=xi_bad
        )
    ratio = (1.0 - mag[keep]) / norm_sq[keep]
    arg = int(np.argmin(ratio))
    margin = float(ratio[arg])
    flat_idx = np.flatnonzero(keep)[arg]
    idx = np.unravel_index(flat_idx, mag.shape)
    worst_xi = np.array([g[idx] for g in grids])
    if margin > MARGIN_FLOOR:
        filt.aperiodicity_margin = margin
        return AperiodicityReport(True, margin, worst_xi, margin)
    return AperiodicityReport(False, None, worst_xi, margin)


# ---------------------------------------------------------------------------
# file formats


def filter_to_json(filt: LatticeFilter) -> dict:
    return {
        "dim": filt.dim,
        "entries": [
            {"offset": list(k), "weight": w} for k, w in sorted(filt.entries.items())
        ],
    }


def filter_from_json(obj: dict) -> LatticeFilter:
    return new_filter(
        int(obj["dim"]),
        [(tuple(e["offset"]), float(e["weight"])) for e in obj["entries"]],
    )


def save_filter(filt: LatticeFilter, path) -> None:
    with open(path, "w") as fh:
        json.dump(filter_to_json(filt), fh, indent=2)
        fh.write("\n")


def load_filter(path) -> LatticeFilter:
    with open(path) as fh:
        return filter_from_json(json.load(fh))


def field_to_csv(fld: ScalarField, path) -> None:
    """Dump the full box as rows index_1..index_d, value."""
    header = [f"index_{i + 1}" for i in range(fld.dim)] + ["value"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for idx in np.ndindex(*fld.values.shape):
            vertex = [i - fld.box_radius for i in idx]
            writer.writerow([*vertex, repr(float(fld.values[idx]))])


def field_from_csv(path) -> ScalarField:
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        dim = len(header) - 1
        rows = [(tuple(int(c) for c in row[:dim]), float(row[dim])) for row in reader]
    radius = max(max(abs(c) for c in vertex) for vertex, _ in rows)
    values = np.zeros((2 * radius + 1,) * dim)
    for vertex, value in rows:
        values[tuple(c + radius for c in vertex)] = value
    return ScalarField(dim, radius, values)
