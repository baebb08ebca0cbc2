"""Monte-Carlo simulation of the age process under a policy, plus the
baseline policy constructors (transmit-always, boundary-renewal, and explicit
threshold policies).

The simulator runs on the decision-epoch timeline; costs accrue per epoch,
and a renewal epoch is additionally accounted as ``delta_r`` slots when
computing the per-slot average. Randomness comes from numpy's PCG64: one
uniform draw is consumed per epoch regardless of the action, so trajectories
are reproducible bit-for-bit from ``(seed, stream)``. Replication r of an
experiment uses ``stream=r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelModel
from .errors import DomainError
from .linear_model import SystemModel, spectral_radius
from .mdp import Action, AgeState, MdpSpec, Truncation
from .solvers import Policy

# Number of contiguous batches used for the batch-means standard error.
BATCH_COUNT = 32


@dataclass(frozen=True, eq=False)
class SimStats:
    """Trajectory statistics.

    ``per_epoch_avg_cost`` is the empirical long-run average cost per decision
    epoch; ``per_slot_avg_cost`` divides the same cost total by elapsed slots
    (renewal epochs span ``delta_r`` slots, all others one).
    ``std_error`` is the batch-means standard error of the per-epoch average.
    Histograms count epochs by the age value at the decision instant.
    """

    epochs: int
    per_epoch_avg_cost: float
    per_slot_avg_cost: float
    std_error: float
    aoi_histogram: np.ndarray
    aoc_histogram: np.ndarray
    action_counts: np.ndarray
    boundary_hit_fraction: float

    def __post_init__(self):
        if int(self.action_counts.sum()) != self.epochs:
            raise DomainError("action counts must sum to the epoch count")
        if int(self.aoi_histogram.sum()) != self.epochs or int(self.aoc_histogram.sum()) != self.epochs:
            raise DomainError("age histograms must sum to the epoch count")
        if not 0.0 <= self.boundary_hit_fraction <= 1.0:
            raise DomainError("boundary_hit_fraction must lie in [0, 1]")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SimStats)
            and self.epochs == other.epochs
            and self.per_epoch_avg_cost == other.per_epoch_avg_cost
            and self.per_slot_avg_cost == other.per_slot_avg_cost
            and (self.std_error == other.std_error or (np.isnan(self.std_error) and np.isnan(other.std_error)))
            and np.array_equal(self.aoi_histogram, other.aoi_histogram)
            and np.array_equal(self.aoc_histogram, other.aoc_histogram)
            and np.array_equal(self.action_counts, other.action_counts)
            and self.boundary_hit_fraction == other.boundary_hit_fraction
        )


def replication_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """PCG64 generator for one replication; streams are split by seeding the
    generator with the entropy pair (seed, stream)."""
    if not 0 <= seed < 2**64:
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if stream < 0:
        raise DomainError(f"stream index must be nonnegative, got {stream}")
    return np.random.default_rng([seed, stream])


def simulate(
    mdp: MdpSpec,
    policy: Policy,
    s0: AgeState = AgeState(1, 1),
    epochs: int = 100_000,
    seed: int = 0,
    stream: int = 0,
) -> SimStats:
    """Simulate the controlled age process and collect cost/age statistics.

    Transmission outcomes are drawn with the reliability of the current
    channel age; ages advance exactly as in the MDP kernel (clamped at the
    grid bounds). Identical ``(mdp, policy, s0, epochs, seed, stream)``
    reproduce identical statistics.
    """
    if epochs < 1:
        raise DomainError(f"epochs must be >= 1, got {epochs}")
    if policy.shape != mdp.shape:
        raise DomainError(f"policy grid {policy.shape} does not match MDP grid {mdp.shape}")
    start = mdp.state_index(s0)
    rng = replication_rng(seed, stream)

    n = mdp.n_states
    act_flat = policy.actions.reshape(-1).astype(np.int64)
    rows = np.arange(n)
    cost_flat = mdp.cost_table.reshape(n, 3)[rows, act_flat]
    si = mdp.succ_index.reshape(n, 3, 2)
    # Success branch only exists for transmit; for idle/renew the sole
    # successor sits in slot 0.
    succ_hit = si[rows, act_flat, 0]
    succ_miss = np.where(act_flat == Action.TRANSMIT, si[rows, act_flat, 1], si[rows, act_flat, 0])
    theta_flat = np.where(
        act_flat == Action.TRANSMIT, mdp.succ_prob.reshape(n, 3, 2)[rows, act_flat, 0], 0.0
    )

    # Plain-python lists make the sequential hot loop ~3x faster than ndarray
    # scalar indexing.
    hit = succ_hit.tolist()
    miss = succ_miss.tolist()
    theta = theta_flat.tolist()
    is_tx = (act_flat == Action.TRANSMIT).tolist()
    draws = rng.random(epochs)
    traj = np.empty(epochs, dtype=np.int64)
    s = start
    for t in range(epochs):
        traj[t] = s
        if is_tx[s] and draws[t] < theta[s]:
            s = hit[s]
        else:
            s = miss[s]

    costs = cost_flat[traj]
    actions = act_flat[traj]
    slots = np.where(actions == Action.RENEW, mdp.channel.delta_r, 1)
    tau_idx = traj // mdp.trunc.delta_max
    delta_idx = traj % mdp.trunc.delta_max

    # Exactly-rounded summation: with constant costs and a power-of-two epoch
    # count the average is bit-exact.
    total_cost = math.fsum(costs)
    per_epoch = total_cost / epochs
    per_slot = total_cost / int(slots.sum())
    batches = min(BATCH_COUNT, epochs)
    if batches >= 2:
        means = np.array([chunk.mean() for chunk in np.array_split(costs, batches)])
        std_error = float(means.std(ddof=1) / np.sqrt(batches))
    else:
        std_error = 0.0

    return SimStats(
        epochs=epochs,
        per_epoch_avg_cost=per_epoch,
        per_slot_avg_cost=per_slot,
        std_error=std_error,
        aoi_histogram=np.bincount(delta_idx, minlength=mdp.trunc.delta_max),
        aoc_histogram=np.bincount(tau_idx, minlength=mdp.trunc.tau_max),
        action_counts=np.bincount(actions, minlength=3),
        boundary_hit_fraction=float(
            np.mean((tau_idx == mdp.trunc.tau_max - 1) | (delta_idx == mdp.trunc.delta_max - 1))
        ),
    )


def transmit_always(trunc: Truncation) -> Policy:
    """The policy that transmits in every state."""
    return Policy(actions=np.full((trunc.tau_max, trunc.delta_max), Action.TRANSMIT, dtype=np.int8))


def boundary_renewal(model: SystemModel, channel: ChannelModel, trunc: Truncation) -> Policy:
    """Transmit inside the mean-square-stable channel-age region, renew outside.

    The stable region consists of the ages with rho^2 (1 - theta(tau)) < 1;
    renewal resets the system to the best channel age whenever the state
    leaves it. Requires rho^2 (1 - theta_max) < 1, otherwise no renewal
    policy can stabilize the system.
    """
    rho2 = spectral_radius(model.A) ** 2
    if not rho2 * (1.0 - channel.theta_max) < 1.0:
        raise DomainError(
            "empty stable region: rho^2 * (1 - theta_max) = "
            f"{rho2 * (1.0 - channel.theta_max):.6g} >= 1, so renewal cannot stabilize"
        )
    theta = np.asarray(channel.reliability(np.arange(1, trunc.tau_max + 1)), dtype=float)
    stable = rho2 * (1.0 - theta) < 1.0
    col = np.where(stable, Action.TRANSMIT, Action.RENEW).astype(np.int8)
    return Policy(actions=np.tile(col[:, None], (1, trunc.delta_max)))


def threshold_policy(tau_renew: int, transmit_thresholds, trunc: Truncation) -> Policy:
    """Renew above a channel-age threshold; below it, transmit once the
    information age reaches a per-channel-age threshold, else idle.

    ``transmit_thresholds`` lists the information-age threshold for each
    channel age 1..tau_max and must be nonincreasing (entries above
    ``tau_renew`` are unused but still validated).
    """
    t_max, d_max = trunc.tau_max, trunc.delta_max
    if int(tau_renew) != tau_renew or not 0 <= tau_renew <= t_max:
        raise DomainError(f"tau_renew must be an integer in [0, {t_max}], got {tau_renew}")
    thr = np.asarray(transmit_thresholds, dtype=np.int64)
    if thr.shape != (t_max,):
        raise DomainError(f"need one transmit threshold per channel age (shape ({t_max},)), got {thr.shape}")
    if np.any(thr < 1) or np.any(thr > d_max):
        raise DomainError(f"transmit thresholds must lie in [1, {d_max}]")
    if np.any(np.diff(thr) > 0):
        raise DomainError("transmit thresholds must be nonincreasing in the channel age")
    actions = np.zeros((t_max, d_max), dtype=np.int8)
    deltas = np.arange(1, d_max + 1)[None, :]
    actions[deltas >= thr[:, None]] = Action.TRANSMIT
    actions[np.arange(1, t_max + 1) > tau_renew, :] = Action.RENEW
    return Policy(actions=actions)
