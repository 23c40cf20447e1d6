"""Ergodic sums, the cocycle chain rule, skew products, reverse cocycles.

A trace holds the partial sums S_n = sum_{k<n} phi(T^k x) for n = 0..N
as an (N+1, d) array. Accumulation runs in extended precision
(longdouble cumsum per block with a carried offset) and is rounded to
float64, which keeps indicator-heavy sums well inside the 1e-9
identity tolerances at N = 10^6.

Checkpoints record the orbit state every `checkpoint_every` steps so a
second pass can restart mid-orbit without O(N) storage per restart.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import MissingCheckpoint, NotInvertible
from .observables import ObservableSpec
from .systems import SystemSpec, SystemState, orbit_span, state_at

BLOCK = 1 << 16


@dataclass
class CocycleTrace:
    """Partial-sum process of one observable along one orbit."""

    system: SystemSpec
    obs: ObservableSpec
    state0: SystemState
    N: int
    values: np.ndarray                     # (N+1, d), values[n] = S_n, values[0] = 0
    checkpoints: dict = field(default_factory=dict)   # step -> SystemState
    checkpoint_every: int = 1024
    direction: int = 1                     # -1 for reverse traces
    _norms: np.ndarray | None = field(default=None, repr=False)

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def norms(self) -> np.ndarray:
        if self._norms is None:
            self._norms = np.linalg.norm(self.values, axis=1)
        return self._norms

    def value(self, n: int) -> np.ndarray:
        return self.values[n]

    def state_at_step(self, n: int) -> SystemState:
        """Orbit state at step n; n must sit on the checkpoint grid."""
        if n == 0:
            return self.state0
        st = self.checkpoints.get(self.direction * n)
        if st is None:
            raise MissingCheckpoint(
                f"step {n} not on the checkpoint grid (every {self.checkpoint_every})")
        return st


def _accumulate(phi: np.ndarray, carry: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # extended-precision running sum; returns (float64 partial sums, new carry)
    s = np.cumsum(phi.astype(np.longdouble), axis=0) + carry
    return s.astype(np.float64), s[-1]


def _checkpoint_state(system: SystemSpec, state0: SystemState, data, k: int) -> SystemState:
    # build the state at relative step k from an already computed span row;
    # rows are bitwise identical to step() iteration, so restarts reproduce
    if system.kind == "iid-shift":
        return replace(state0, index=state0.index + k)
    coords = data.positions[data.rows(k, k)][0].copy()
    return replace(state0, index=state0.index + k, coords=coords)


def ergodic_sums(system: SystemSpec, obs: ObservableSpec, state0: SystemState,
                 N: int, checkpoint_every: int = 1024) -> CocycleTrace:
    """Trace of S_n = sum_{k<n} phi(T^k x) for n = 0..N."""
    obs.validate_for(system)
    values = np.zeros((N + 1, obs.d))
    checkpoints: dict = {}
    carry = np.zeros(obs.d, dtype=np.longdouble)
    ext = max(1, obs.lookahead)    # row hi+1 must exist for on-grid checkpoints
    off = 0
    while off < N:
        hi = min(off + BLOCK, N) - 1
        data = orbit_span(system, state0, off, hi + ext)
        phi = obs.evaluate(data, off, hi)
        values[off + 1:hi + 2], carry = _accumulate(phi, carry)
        first_cp = -((-(off + 1)) // checkpoint_every) * checkpoint_every
        for k in range(first_cp, hi + 2, checkpoint_every):
            checkpoints[k] = _checkpoint_state(system, state0, data, k)
        off = hi + 1
    return CocycleTrace(system, obs, state0, N, values, checkpoints, checkpoint_every)


def cocycle_identity_check(trace: CocycleTrace, n: int, p: int) -> float:
    """Residual of S_{n+p}(x) = S_n(x) + S_p(T^n x), second pass from step n.

    Raises MissingCheckpoint when n is off the checkpoint grid.
    """
    if n + p > trace.N:
        raise ValueError("n + p exceeds the trace length")
    st = trace.state_at_step(n)
    fresh = ergodic_sums(trace.system, trace.obs, st, p,
                         trace.checkpoint_every).values[p]
    return float(np.linalg.norm(trace.values[n + p] - trace.values[n] - fresh))


def evaluate_at(system: SystemSpec, obs: ObservableSpec, state: SystemState) -> np.ndarray:
    """phi at a single phase point."""
    data = orbit_span(system, state, 0, obs.lookahead)
    return obs.evaluate(data, 0, 0)[0]


def skew_step(system: SystemSpec, obs: ObservableSpec,
              point: tuple[SystemState, np.ndarray]) -> tuple[SystemState, np.ndarray]:
    """One step of the skew product (x, y) -> (Tx, y + phi(x))."""
    state, y = point
    return state_at(system, state, 1), np.asarray(y, dtype=np.float64) + evaluate_at(system, obs, state)


def reverse_sums(system: SystemSpec, obs: ObservableSpec, state0: SystemState,
                 N: int, checkpoint_every: int = 1024) -> CocycleTrace:
    """Reverse trace R_n = -sum_{k=1..n} phi(T^{-k} x) for n = 0..N.

    Satisfies R_n(T^n x) = -S_n(x). Invertible systems only.
    """
    if not system.invertible:
        raise NotInvertible("reverse sums need an invertible system")
    obs.validate_for(system)
    values = np.zeros((N + 1, obs.d))
    checkpoints: dict = {}
    carry = np.zeros(obs.d, dtype=np.longdouble)
    done = 0                       # how many reverse steps are summed so far
    while done < N:
        m = min(done + BLOCK, N)   # this block covers reverse steps done+1 .. m
        data = orbit_span(system, state0, -m, -done - 1 + obs.lookahead)
        phi = obs.evaluate(data, -m, -done - 1)        # rows: k = m .. done+1
        values[done + 1:m + 1], carry = _accumulate(-phi[::-1], carry)
        first_cp = -((-(done + 1)) // checkpoint_every) * checkpoint_every
        for k in range(first_cp, m + 1, checkpoint_every):
            checkpoints[-k] = _checkpoint_state(system, state0, data, -k)
        done = m
    return CocycleTrace(system, obs, state0, N, values, checkpoints,
                        checkpoint_every, direction=-1)
