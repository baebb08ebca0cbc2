"""Truncated average-cost MDP over the (channel age, information age) grid.

States are pairs (tau, delta) on [1, tau_max] x [1, delta_max]; ages that
would leave the grid saturate at the boundary. Actions are idle, transmit,
renew. Per-epoch cost is the age-indexed MSE; a renewal epoch pays the lump
sum of the MSE accrued over its whole downtime.

State enumeration is row-major with tau outer and delta inner; this ordering
is part of the exported-artifact contract.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterator, NamedTuple

import numpy as np

from .channel import ChannelModel
from .errors import DomainError
from .linear_model import MseTable, SystemModel, mse_table, steady_state


class Action(IntEnum):
    IDLE = 0
    TRANSMIT = 1
    RENEW = 2


class AgeState(NamedTuple):
    tau: int
    delta: int


@dataclass(frozen=True)
class Truncation:
    """Grid bounds for the two age processes."""

    tau_max: int
    delta_max: int

    def __post_init__(self):
        for name, v in (("tau_max", self.tau_max), ("delta_max", self.delta_max)):
            if int(v) != v or v < 1:
                raise DomainError(f"{name} must be a positive integer, got {v}")
        object.__setattr__(self, "tau_max", int(self.tau_max))
        object.__setattr__(self, "delta_max", int(self.delta_max))

    @property
    def n_states(self) -> int:
        return self.tau_max * self.delta_max


@dataclass(frozen=True)
class MdpSpec:
    """Assembled cost table and sparse transition kernel.

    ``cost_table`` has shape (tau_max, delta_max, 3). The kernel is stored as
    fixed-width successor lists: ``succ_index[t, d, u]`` holds up to two flat
    successor indices with probabilities ``succ_prob[t, d, u]`` (padding
    entries carry probability 0). Flat index = (tau-1) * delta_max + (delta-1).
    Immutable after construction; safe for concurrent read-only sweeps.
    """

    trunc: Truncation
    channel: ChannelModel
    mse: MseTable
    theta: np.ndarray       # (tau_max,) reliability at each channel age
    cost_table: np.ndarray  # (tau_max, delta_max, 3)
    succ_index: np.ndarray  # (tau_max, delta_max, 3, 2) flat state indices
    succ_prob: np.ndarray   # (tau_max, delta_max, 3, 2)

    @property
    def n_states(self) -> int:
        return self.trunc.n_states

    @property
    def shape(self) -> tuple[int, int]:
        return (self.trunc.tau_max, self.trunc.delta_max)

    def state_index(self, s: AgeState) -> int:
        """Flat row-major index of a grid state."""
        tau, delta = s
        if not (1 <= tau <= self.trunc.tau_max and 1 <= delta <= self.trunc.delta_max):
            raise DomainError(f"state {s} outside grid {self.shape}")
        return (tau - 1) * self.trunc.delta_max + (delta - 1)

    def state_at(self, index: int) -> AgeState:
        d = self.trunc.delta_max
        if not 0 <= index < self.n_states:
            raise DomainError(f"flat index {index} outside [0, {self.n_states})")
        return AgeState(index // d + 1, index % d + 1)

    def states(self) -> Iterator[AgeState]:
        """All grid states in the contractual row-major order."""
        for tau in range(1, self.trunc.tau_max + 1):
            for delta in range(1, self.trunc.delta_max + 1):
                yield AgeState(tau, delta)

    def cost(self, s: AgeState, u: Action | int) -> float:
        """Per-epoch cost of action ``u`` in state ``s``."""
        self.state_index(s)
        u = _check_action(u)
        return float(self.cost_table[s.tau - 1, s.delta - 1, u])

    def transitions(self, s: AgeState, u: Action | int) -> list[tuple[AgeState, float]]:
        """Successor states with probabilities (zero-probability entries omitted)."""
        self.state_index(s)
        u = _check_action(u)
        out = []
        for k in range(2):
            p = float(self.succ_prob[s.tau - 1, s.delta - 1, u, k])
            if p > 0.0:
                out.append((self.state_at(int(self.succ_index[s.tau - 1, s.delta - 1, u, k])), p))
        return out


def _check_action(u) -> int:
    if u not in (0, 1, 2):
        raise DomainError(f"invalid action {u!r}, expected 0, 1 or 2")
    return int(u)


def build_mdp(
    model: SystemModel,
    channel: ChannelModel,
    trunc: Truncation,
    *,
    require_headroom: bool = True,
    riccati_tol: float = 1e-12,
    riccati_max_iter: int = 100_000,
) -> MdpSpec:
    """Assemble the truncated MDP for a model/channel pair.

    ``require_headroom`` enforces tau_max >= 1 + tau_d and
    delta_max >= 1 + delta_r so every action has an in-range successor before
    clamping dominates; pass False only for deliberately degenerate grids.
    Renewal lump-sum summands beyond the grid clamp to the last table entry,
    consistent with the clamped dynamics.
    """
    t_max, d_max = trunc.tau_max, trunc.delta_max
    if require_headroom:
        if t_max < 1 + channel.tau_d:
            raise DomainError(
                f"tau_max={t_max} leaves no headroom for wear per transmission "
                f"(need >= {1 + channel.tau_d})"
            )
        if d_max < 1 + channel.delta_r:
            raise DomainError(
                f"delta_max={d_max} leaves no headroom for the renewal downtime "
                f"(need >= {1 + channel.delta_r})"
            )

    ss = steady_state(model, tol=riccati_tol, max_iter=riccati_max_iter)
    mse = mse_table(model, ss, d_max)
    f = mse.values  # f[j] = MSE at information age j+1

    theta = np.asarray(channel.reliability(np.arange(1, t_max + 1)), dtype=float).reshape(t_max)

    # Costs: idle and transmit pay the current-age MSE; renewal pays the MSE
    # lump sum over its delta_r-slot downtime, entries clamped to the grid.
    f_pad = np.concatenate([f, np.full(channel.delta_r, f[-1])])
    csum = np.concatenate([[0.0], np.cumsum(f_pad)])
    renew_cost = csum[channel.delta_r : channel.delta_r + d_max] - csum[:d_max]
    cost = np.empty((t_max, d_max, 3))
    cost[:, :, Action.IDLE] = f[np.newaxis, :]
    cost[:, :, Action.TRANSMIT] = f[np.newaxis, :]
    cost[:, :, Action.RENEW] = renew_cost[np.newaxis, :]

    # Clamped age updates, 0-based.
    ti = np.arange(t_max)[:, None]          # channel-age index
    di = np.arange(d_max)[None, :]          # information-age index
    tau_idle = np.minimum(ti + 1, t_max - 1)
    tau_tx = np.minimum(ti + channel.tau_d, t_max - 1)
    delta_up = np.minimum(di + 1, d_max - 1)
    delta_renew = np.minimum(di + channel.delta_r, d_max - 1)

    def flat(t_idx, d_idx):
        return (t_idx * d_max + d_idx).astype(np.int64)

    succ_index = np.zeros((t_max, d_max, 3, 2), dtype=np.int64)
    succ_prob = np.zeros((t_max, d_max, 3, 2))

    succ_index[:, :, Action.IDLE, 0] = flat(tau_idle, delta_up)
    succ_prob[:, :, Action.IDLE, 0] = 1.0

    succ_index[:, :, Action.TRANSMIT, 0] = flat(tau_tx, np.zeros_like(di))
    succ_prob[:, :, Action.TRANSMIT, 0] = theta[:, None]
    succ_index[:, :, Action.TRANSMIT, 1] = flat(tau_tx, delta_up)
    succ_prob[:, :, Action.TRANSMIT, 1] = 1.0 - theta[:, None]

    succ_index[:, :, Action.RENEW, 0] = flat(np.zeros_like(ti), delta_renew)
    succ_prob[:, :, Action.RENEW, 0] = 1.0

    for arr in (theta, cost, succ_index, succ_prob):
        arr.flags.writeable = False
    return MdpSpec(
        trunc=trunc,
        channel=channel,
        mse=mse,
        theta=theta,
        cost_table=cost,
        succ_index=succ_index,
        succ_prob=succ_prob,
    )
