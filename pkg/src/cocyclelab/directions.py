"""Directional statistics of a vector cocycle.

The normalized process S_n/||S_n|| is binned on a fixed sphere mesh at
a ladder of norm thresholds M_1 < ... < M_m: cell k is counted at
threshold M_i when some n has ||S_n|| > M_i and direction in cell k.
Counts are nested across thresholds by construction. Histograms form a
merge monoid so independent trajectories can be folded in any order.

The limit-direction estimate is the set of cells visited at the top
threshold by at least a quorum q of the traces; (mesh, ladder, quorum)
are always reported alongside the estimate, since the underlying set
is a limit object with no finite certificate.

Meshes: d=1 uses the two half-lines; d=2 uses K equal arcs (default
72); d>=3 uses a Fibonacci point set with nearest-center cells.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .engine import CocycleTrace, ergodic_sums
from .errors import ConfigInvalid
from .induce import SetSpec, first_entry, induced_trace
from .observables import ObservableSpec
from .systems import SystemSpec, sample_initial

DEFAULT_ARCS = 72
LADDER_RUNGS = (0.1, 10.0 ** -0.5, 1.0, 10.0 ** 0.5, 10.0)


@dataclass(frozen=True)
class SphereMesh:
    """Partition of the unit sphere into K cells with representative centers."""

    d: int
    K: int
    centers: np.ndarray = field(compare=False)

    def assign(self, U: np.ndarray) -> np.ndarray:
        """Cell index per unit vector (rows)."""
        if self.d == 1:
            return np.where(U[:, 0] > 0.0, 0, 1).astype(np.int64)
        if self.d == 2:
            theta = np.mod(np.arctan2(U[:, 1], U[:, 0]), 2.0 * np.pi)
            return np.minimum((theta * self.K / (2.0 * np.pi)).astype(np.int64),
                              self.K - 1)
        return np.argmax(U @ self.centers.T, axis=1).astype(np.int64)

    def antipode_map(self) -> np.ndarray:
        """antipode_map[k] = cell containing the antipode of cell k's center."""
        if self.d == 2:
            return (np.arange(self.K) + self.K // 2) % self.K
        return self.assign(-self.centers)

    def adjacency(self) -> list:
        """Neighbor lists; d=2 is the arc ring, d>=3 a nearest-angle graph."""
        if self.d == 1:
            return [[], []]
        if self.d == 2:
            return [[(k - 1) % self.K, (k + 1) % self.K] for k in range(self.K)]
        cos = self.centers @ self.centers.T
        np.fill_diagonal(cos, -2.0)
        nearest = np.max(cos, axis=1).min()      # widest nearest-neighbor gap
        cut = math.cos(1.6 * math.acos(min(1.0, nearest)))
        return [list(np.flatnonzero(cos[k] >= cut)) for k in range(self.K)]


def make_mesh(d: int, K: int = DEFAULT_ARCS) -> SphereMesh:
    if d < 1:
        raise ConfigInvalid("mesh", "dimension must be >= 1")
    if d == 1:
        return SphereMesh(1, 2, np.array([[1.0], [-1.0]]))
    if d == 2:
        if K < 2 or K % 2:
            raise ConfigInvalid("mesh", "d=2 mesh needs an even number of arcs")
        ang = 2.0 * np.pi * (np.arange(K) + 0.5) / K
        return SphereMesh(2, K, np.column_stack([np.cos(ang), np.sin(ang)]))
    if d == 3:
        i = np.arange(K) + 0.5
        z = 1.0 - 2.0 * i / K
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        golden = np.pi * (3.0 - math.sqrt(5.0))
        th = golden * i
        centers = np.column_stack([r * np.cos(th), r * np.sin(th), z])
        return SphereMesh(3, K, centers)
    raise ConfigInvalid("mesh", "meshes are provided for d <= 3")


def directional_process(trace: CocycleTrace):
    """Unit vectors S_n/||S_n|| for n >= 1 with S_n != 0.

    Returns (units, norms, skipped) where skipped counts the exact-zero
    entries that were left out.
    """
    V = trace.values[1:]
    nrm = trace.norms[1:]
    nz = nrm > 0.0
    U = V[nz] / nrm[nz][:, None]
    return U, nrm[nz], int(len(nrm) - nz.sum())


@dataclass
class DirectionHistogram:
    """Visit counts per (threshold, cell); a commutative merge monoid."""

    mesh: SphereMesh
    thresholds: np.ndarray            # (m,) increasing
    counts: np.ndarray                # (m, K) int64
    visited_traces: np.ndarray        # (m, K) int64, traces with count > 0
    n_traces: int = 0
    total_steps: int = 0

    @classmethod
    def empty(cls, mesh: SphereMesh, thresholds) -> "DirectionHistogram":
        th = np.asarray(thresholds, dtype=np.float64)
        if len(th) == 0 or np.any(np.diff(th) <= 0.0):
            raise ConfigInvalid("thresholds", "thresholds must be strictly increasing")
        z = np.zeros((len(th), mesh.K), dtype=np.int64)
        return cls(mesh, th, z.copy(), z.copy())

    def merge(self, other: "DirectionHistogram") -> "DirectionHistogram":
        if self.mesh.K != other.mesh.K or not np.array_equal(self.thresholds,
                                                             other.thresholds):
            raise ConfigInvalid("histogram", "merge needs identical mesh and ladder")
        return DirectionHistogram(
            self.mesh, self.thresholds, self.counts + other.counts,
            self.visited_traces + other.visited_traces,
            self.n_traces + other.n_traces, self.total_steps + other.total_steps)

    def visited_at(self, i: int) -> np.ndarray:
        return self.counts[i] > 0


def hist_from_values(values: np.ndarray, mesh: SphereMesh,
                     thresholds) -> DirectionHistogram:
    """Histogram of one trajectory's partial-sum rows (row 0 may be 0)."""
    h = DirectionHistogram.empty(mesh, thresholds)
    nrm = np.linalg.norm(values, axis=1)
    nz = nrm > 0.0
    cells = mesh.assign(values[nz] / nrm[nz][:, None])
    nrm = nrm[nz]
    for i, M in enumerate(h.thresholds):
        sel = nrm > M
        h.counts[i] = np.bincount(cells[sel], minlength=mesh.K)
    h.visited_traces = (h.counts > 0).astype(np.int64)
    h.n_traces = 1
    h.total_steps = len(values)
    return h


def hist_from_trace(trace: CocycleTrace, mesh: SphereMesh,
                    thresholds) -> DirectionHistogram:
    return hist_from_values(trace.values[1:], mesh, thresholds)


def default_m_ladder(scale: float) -> np.ndarray:
    """Five thresholds centered (geometrically) on a trajectory norm scale."""
    if scale <= 0.0:
        raise ConfigInvalid("thresholds", "ladder scale must be positive")
    return scale * np.asarray(LADDER_RUNGS)


@dataclass
class DirectionEstimate:
    """Cells visited at the top threshold by >= quorum of the traces."""

    cells: np.ndarray                 # sorted cell indices
    quorum: float
    histogram: DirectionHistogram

    @property
    def mask(self) -> np.ndarray:
        out = np.zeros(self.histogram.mesh.K, dtype=bool)
        out[self.cells] = True
        return out


def direction_set_estimate(hist: DirectionHistogram,
                           quorum: float = 0.9) -> DirectionEstimate:
    if not 0.0 < quorum <= 1.0:
        raise ConfigInvalid("quorum", "quorum must lie in (0, 1]")
    need = quorum * hist.n_traces - 1e-9
    cells = np.flatnonzero(hist.visited_traces[-1] >= need)
    return DirectionEstimate(cells, quorum, hist)


def cone_visit_frequency(trace: CocycleTrace, mesh: SphereMesh,
                         cell_mask: np.ndarray) -> np.ndarray:
    """Running frequency of direction visits to a set of mesh cells.

    Zero partial sums are skipped (not counted in the denominator).
    """
    U, _, _ = directional_process(trace)
    member = np.asarray(cell_mask, dtype=bool)[mesh.assign(U)]
    n = np.arange(1, len(member) + 1)
    return np.cumsum(member) / n


@dataclass
class RecurrenceReport:
    window_minima: np.ndarray         # min ||S_n|| per dyadic window
    verdict: str                      # recurrent-like | transient-like | inconclusive
    epsilon: float


def recurrence_diagnostic(trace: CocycleTrace, epsilon: float) -> RecurrenceReport:
    """Dyadic-window minima heuristic; labels, never proofs.

    recurrent-like: a minimum <= epsilon within the last two windows;
    transient-like: minima strictly increasing over the last five.
    """
    N = trace.N
    if N < 1024:
        raise ConfigInvalid("N", "recurrence diagnostic needs N >= 1024")
    nrm = trace.norms
    mins = []
    j = 0
    while (1 << j) <= N:
        lo = 1 << j
        hi = min((1 << (j + 1)) - 1, N)
        mins.append(nrm[lo:hi + 1].min())
        j += 1
    mins = np.asarray(mins)
    if mins[-2:].min() <= epsilon:
        verdict = "recurrent-like"
    elif len(mins) >= 5 and np.all(np.diff(mins[-5:]) > 0.0):
        verdict = "transient-like"
    else:
        verdict = "inconclusive"
    return RecurrenceReport(mins, verdict, epsilon)


@dataclass
class ProbeReport:
    """Intersection of induced-cocycle direction estimates over several sets.

    An upper bound probe for directions that persist under inducing;
    not a decision procedure.
    """

    cells: np.ndarray
    per_set: list
    thresholds: np.ndarray
    quorum: float


def essential_probe(system: SystemSpec, obs: ObservableSpec, sets,
                    thresholds, mesh: SphereMesh, n_returns: int,
                    seeds, cap: int = 10_000_000,
                    quorum: float = 0.9) -> ProbeReport:
    """Estimate directions surviving induction on every given set."""
    sets = list(sets)
    if not sets:
        raise ConfigInvalid("sets", "essential probe needs at least one set")
    estimates = []
    for B in sets:
        h = DirectionHistogram.empty(mesh, thresholds)
        for s in seeds:
            st = first_entry(system, B, sample_initial(system, s), cap)
            it = induced_trace(system, obs, B, st, n_returns, cap)
            h = h.merge(hist_from_values(it.values[1:], mesh, thresholds))
        estimates.append(direction_set_estimate(h, quorum))
    mask = estimates[0].mask
    for est in estimates[1:]:
        mask &= est.mask
    return ProbeReport(np.flatnonzero(mask), estimates,
                       np.asarray(thresholds, dtype=np.float64), quorum)


def antipodal_closure(mesh: SphereMesh, mask: np.ndarray) -> np.ndarray:
    """Cells union the cells of their antipodes."""
    amap = mesh.antipode_map()
    out = np.asarray(mask, dtype=bool).copy()
    out[amap[np.flatnonzero(mask)]] = True
    return out


def is_arc_connected(mesh: SphereMesh, mask: np.ndarray) -> bool:
    """True when the marked cells form one connected patch (or none)."""
    mask = np.asarray(mask, dtype=bool)
    cells = np.flatnonzero(mask)
    if len(cells) <= 1:
        return True
    adj = mesh.adjacency()
    seen = {int(cells[0])}
    stack = [int(cells[0])]
    while stack:
        k = stack.pop()
        for nb in adj[k]:
            if mask[nb] and nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(cells)


def direction_scan(system: SystemSpec, obs: ObservableSpec, N: int, seeds,
                   mesh: SphereMesh | None = None, thresholds=None,
                   quorum: float = 0.9, checkpoint_every: int = 1 << 20):
    """End-to-end estimate over fresh trajectories.

    When thresholds are omitted, the ladder is scaled to the median
    terminal norm of the first pass (reported in the histogram).
    Returns (estimate, per_seed_terminal_norms).
    """
    seeds = list(seeds)
    mesh = mesh or make_mesh(obs.d)
    terms = np.empty(len(seeds))
    if thresholds is None:
        # ladder pass: terminal norms only, traces are recomputed below
        # so at most one full trace is ever held in memory
        for i, s in enumerate(seeds):
            tr = ergodic_sums(system, obs, sample_initial(system, s), N,
                              checkpoint_every)
            terms[i] = tr.norms[-1]
        thresholds = default_m_ladder(float(np.median(terms)))
    hist = None
    for i, s in enumerate(seeds):
        tr = ergodic_sums(system, obs, sample_initial(system, s), N,
                          checkpoint_every)
        terms[i] = tr.norms[-1]
        h = hist_from_trace(tr, mesh, thresholds)
        hist = h if hist is None else hist.merge(h)
    return direction_set_estimate(hist, quorum), terms
