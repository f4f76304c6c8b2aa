"""Ground-truth trajectory generators for the leadership models.

Five generative mechanisms produce planar trajectories with known
initiators: a single dictator (DM), a chained hierarchy of ranked
initiators (HM), neighbor-fraction contagion toward one initiator (LT),
leaderless independent travel (Random), and a dictator that changes every
event (RotatingDM).  Each trial is a pure function of its config, seed
included.

Follower kinematics are dash-then-ride: a departing follower first heads
for the point where its target began moving (a short inward dash with
heading noise), then walks the target's recorded trail one step per step,
trailing it by a fixed delay.  An equal-speed chase of the target's
*current* position would degenerate into riding the goal with no time lag
— erasing the lead/follow signal the generator exists to produce — and a
chase of a delayed moving anchor never catches it at all.  Trail-riding
also keeps every follower strictly inside the group's convex hull (the
corridor between the unmoved rear and the front-runner is convex), so
hull-based indicators single out the true initiator.  After the
coordinated travel interval the initiator decelerates to a stop and
everyone who moved sprints back to a personal spot near it — scattered
offsets for ordinary members so the resting group stays a two-dimensional
blob, while ranked chain members rejoin the initiator itself — and the
next event starts from stationary, compact geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from coordlead.timeseries import Dataset

__all__ = ["MODELS", "SimConfig", "EventTruth", "Trial", "simulate", "run_trial_suite"]

MODELS = ("DM", "HM", "LT", "Random", "RotatingDM")


@dataclass(frozen=True)
class SimConfig:
    """Trial-generation parameters.

    ``lag_max`` defaults to ``pre_len // 2``; LT requires ``kappa`` (nearest
    neighbors queried) and ``rho`` (moving fraction that triggers
    activation).  ``lag_max = 0`` is the degenerate everyone-at-once limit
    used by the noiseless sanity example.
    """

    model: str
    n: int = 20
    events: int = 20
    pre_len: int = 200
    coord_len: int = 200
    post_len: int = 200
    leader_speed: float = 1.0
    heading_noise_sigma: float = 0.1
    lag_max: int | None = None
    circle_radius: float = 10.0
    kappa: int | None = None
    rho: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.model == "HM" and self.n < 4:
            raise ValueError("HM needs at least 4 individuals for the ranked chain")
        if self.events < 1:
            raise ValueError(f"events must be >= 1, got {self.events}")
        if min(self.pre_len, self.coord_len, self.post_len) < 1:
            raise ValueError("all interval lengths must be >= 1")
        if self.pre_len < 2:
            raise ValueError("pre_len must be >= 2 so follower lags can be strict")
        if self.lag_max is not None and not 0 <= self.lag_max < self.pre_len:
            raise ValueError(f"lag_max must be in [0, pre_len), got {self.lag_max}")
        if not self.leader_speed > 0:
            raise ValueError("leader_speed must be positive")
        if self.heading_noise_sigma < 0:
            raise ValueError("heading_noise_sigma must be >= 0")
        if not self.circle_radius > 0:
            raise ValueError("circle_radius must be positive")
        if self.model == "LT":
            if self.kappa is None or self.rho is None:
                raise ValueError("LT requires kappa and rho")
            if not 1 <= self.kappa < self.n:
                raise ValueError(f"kappa must be in [1, n), got {self.kappa}")
            if not 0 < self.rho <= 1:
                raise ValueError(f"rho must be in (0, 1], got {self.rho}")

    @property
    def resolved_lag_max(self) -> int:
        if self.lag_max is not None:
            return self.lag_max
        return min(max(1, self.pre_len // 2), self.pre_len - 1)

    @property
    def event_len(self) -> int:
        return self.pre_len + self.coord_len + self.post_len

    @property
    def total_steps(self) -> int:
        return self.events * self.event_len


@dataclass(frozen=True)
class EventTruth:
    """Scheduled event boundaries (absolute time steps) and the true initiator."""

    pre_start: int
    coord_start: int
    post_start: int
    end: int
    leader: str


@dataclass(frozen=True)
class Trial:
    """A simulated dataset plus its ground truth."""

    config: SimConfig
    dataset: Dataset
    truth: tuple[EventTruth, ...]
    hierarchy: tuple[str, ...] | None = None


def _largest_remainder(proportions: Sequence[float], total: int) -> list[int]:
    """Integer allocation of ``total`` by proportions, largest remainders first."""
    raw = [p * total for p in proportions]
    base = [math.floor(r) for r in raw]
    leftover = total - sum(base)
    order = sorted(range(len(raw)), key=lambda i: -(raw[i] - base[i]))
    for i in order[:leftover]:
        base[i] += 1
    return base


def _rotate(vec: np.ndarray, angle: float) -> np.ndarray:
    ca, sa = math.cos(angle), math.sin(angle)
    return np.array([ca * vec[0] - sa * vec[1], sa * vec[0] + ca * vec[1]])


# Entity motion phases within one event.
_WAITING = 0
_DASHING = 1
_RIDING = 2
_REGROUP = 3
_STOPPED = 4


def simulate(config: SimConfig) -> Trial:
    """Generate one trial.

    Per event: the initiator departs at the event start and travels in a
    straight line (HM: the ranked chain departs on a fixed cadence, each
    rank trailing the one above; LT: a random half of the population moves
    with the initiator from the first step and the neighbor-threshold
    contagion recruits the rest; Random: everyone independently heads for
    its own destination).  A follower with departure lag ``g`` dashes to the
    point where its target departed, then rides the target's recorded trail
    exactly, so its trajectory reproduces the target's with a time delay of
    ``g`` plus the dash duration.  Early in the post interval everyone
    still travelling sprints back to a personal resting spot near the
    initiator; the next event starts from stopped positions.
    """
    rng = np.random.default_rng(config.seed)
    n = config.n
    el = config.event_len
    total = config.total_steps
    ids = tuple(f"e{i:02d}" for i in range(n))
    speed = config.leader_speed

    radii = config.circle_radius * np.sqrt(rng.uniform(size=n))
    angles = rng.uniform(0.0, 2.0 * np.pi, size=n)
    cur = np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=1)

    lt_leader = int(rng.integers(n)) if config.model == "LT" else -1
    hierarchy_idx = (0, n - 3, n - 2, n - 1) if config.model == "HM" else None
    chain_member = np.zeros(n, dtype=bool)
    hm_target = np.zeros(n, dtype=np.int64)
    hm_offset = np.zeros(n, dtype=np.int64)
    if hierarchy_idx is not None:
        chain_member[list(hierarchy_idx[1:])] = True
        # The ranked chain rests with the top initiator, so each rank
        # departs from the exact point its predecessor departs from and
        # the whole chain marches single file down the initiator's line.
        cur[list(hierarchy_idx[1:])] = cur[0]
        # A hierarchy is stable individual structure: every member keeps
        # its affiliation (which rank it follows) and its personal
        # departure lag for the whole trial, unlike the exchangeable
        # followers of the dictator models, which redraw lags per event.
        lag_max_r = config.resolved_lag_max
        inter_lag = max(1, config.pre_len // 10)
        lag_floor = min(max(1, 2 * config.pre_len // 5), lag_max_r)
        for rank in range(1, 4):
            hm_target[hierarchy_idx[rank]] = hierarchy_idx[rank - 1]
            hm_offset[hierarchy_idx[rank]] = rank * inter_lag
        followers = [i for i in range(n) if i not in hierarchy_idx]
        perm = rng.permutation(len(followers))
        sizes = _largest_remainder((0.4, 0.3, 0.2, 0.1), len(followers))
        pos0 = 0
        for rank, size in enumerate(sizes):
            for slot in perm[pos0 : pos0 + size]:
                f = followers[slot]
                hm_target[f] = hierarchy_idx[rank]
                hm_offset[f] = rank * inter_lag + int(
                    rng.integers(lag_floor, lag_max_r + 1)
                )
            pos0 += size

    positions = np.empty((n, 2, total))
    positions[:, :, 0] = cur
    truths: list[EventTruth] = []
    lag_max = config.resolved_lag_max

    # Per-event state, re-initialized at each block start.
    depart = np.zeros(n, dtype=np.int64)
    target = np.zeros(n, dtype=np.int64)
    phase = np.full(n, _STOPPED, dtype=np.int64)
    anchor_time = np.zeros(n, dtype=np.int64)
    ride_copy = False  # degenerate lag_max = 0: copy displacements in place
    dash_goal = np.zeros((n, 2))
    regroup_goal = np.zeros((n, 2))
    dest = np.zeros((n, 2))
    ent_speed = np.full(n, speed)
    heading = np.zeros(2)
    leader = 0
    t0 = 0
    move_end = 0
    regroup_start = 0
    leader_stop = 0

    for t in range(total - 1):
        if t % el == 0:
            event_index = t // el
            t0 = t
            move_end = t0 + config.pre_len + config.coord_len
            block_end = t0 + el
            regroup_start = move_end + max(1, config.post_len // 10)
            depart = np.full(n, block_end, dtype=np.int64)
            target = np.zeros(n, dtype=np.int64)
            phase = np.full(n, _WAITING, dtype=np.int64)
            anchor_time = np.zeros(n, dtype=np.int64)
            ride_copy = False
            dest = np.zeros((n, 2))
            ent_speed = np.full(n, speed)

            if config.model in ("DM", "RotatingDM"):
                leader = 0 if config.model == "DM" else event_index % n
                if lag_max >= 1:
                    lags = rng.integers(1, lag_max + 1, size=n)
                else:
                    lags = np.zeros(n, dtype=np.int64)
                    ride_copy = True
                depart[:] = t0 + lags
                depart[leader] = t0
                target[:] = leader
            elif config.model == "HM":
                leader = 0
                target[:] = hm_target
                depart[:] = t0 + hm_offset
            elif config.model == "LT":
                leader = lt_leader
                moving0 = rng.uniform(size=n) < 0.5
                moving0[leader] = True
                depart[moving0] = t0
                target[:] = leader
            else:  # Random
                leader = 0
                lags = rng.integers(0, lag_max + 1, size=n)
                depart[:] = t0 + lags
                ent_speed = np.clip(rng.normal(1.0, 0.2, size=n), 0.5, 1.5)
                ent_speed *= speed
                mult = rng.uniform(1.0, 1.5, size=n)
                phi = rng.uniform(0.0, 2.0 * np.pi, size=n)
                reach = ent_speed * np.maximum(move_end - depart, 1) * mult
                dest = cur + np.stack([reach * np.cos(phi), reach * np.sin(phi)], axis=1)

            target[leader] = -1
            if config.model != "Random":
                # Head roughly away from the group's center of mass, like a
                # departure from a resting site.  An outward travel line
                # also keeps the departure point covered by the rest of the
                # group, so follower approaches stay inside the population
                # hull.
                outward = cur[leader] - cur.mean(axis=0)
                norm = math.hypot(outward[0], outward[1])
                base = (
                    math.atan2(outward[1], outward[0])
                    if norm > 1e-9
                    else rng.uniform(0.0, 2.0 * np.pi)
                )
                theta = base + rng.uniform(-np.pi / 4, np.pi / 4)
                heading = np.array([np.cos(theta), np.sin(theta)])
            # Every target is stationary until its own departure, so its
            # departure point is simply its position at the block start.
            dash_goal = cur[np.clip(target, 0, None)].copy()
            off_mag = rng.uniform(1.0, 5.0, size=n)
            off_ang = rng.uniform(0.0, 2.0 * np.pi, size=n)
            leader_stop = move_end + 1 + int(rng.integers(max(1, config.post_len // 5)))
            truths.append(
                EventTruth(
                    pre_start=t0,
                    coord_start=t0 + config.pre_len,
                    post_start=move_end,
                    end=block_end,
                    leader=ids[leader],
                )
            )

        if config.model == "LT" and t < move_end:
            moving = depart <= t
            if moving.any() and not moving.all():
                diff = cur[:, None, :] - cur[None, :, :]
                sq = (diff**2).sum(axis=2)
                np.fill_diagonal(sq, np.inf)
                for u in np.where(~moving)[0]:
                    nearest = np.argpartition(sq[u], config.kappa)[: config.kappa]
                    if moving[nearest].mean() >= config.rho and rng.uniform() < 0.5:
                        depart[u] = t + 1

        newpos = cur.copy()
        noise = rng.normal(0.0, config.heading_noise_sigma, size=n)

        for i in range(n):
            if phase[i] == _STOPPED:
                continue
            if phase[i] == _WAITING:
                if depart[i] > t:
                    continue
                if ride_copy and i != leader:
                    phase[i] = _RIDING
                    anchor_time[i] = depart[target[i]]
                else:
                    phase[i] = _DASHING

            if i == leader and config.model != "Random":
                if t < move_end:
                    newpos[i] = cur[i] + heading * speed
                elif t < leader_stop:
                    frac = (leader_stop - t) / max(leader_stop - move_end, 1)
                    newpos[i] = cur[i] + heading * speed * frac
                else:
                    phase[i] = _STOPPED
                continue

            if (
                config.model != "Random"
                and t >= regroup_start
                and phase[i] in (_DASHING, _RIDING)
            ):
                # Cluster back around the initiator.  Ordinary members take
                # a scattered personal offset, which keeps the resting
                # group a genuinely two-dimensional blob (a collinear blob
                # would put every member on the hull boundary).  Ranked
                # chain members rejoin the initiator itself, re-forming the
                # resting stack the next event departs from.
                if not chain_member[i]:
                    regroup_goal[i] = cur[leader] + off_mag[i] * np.array(
                        [np.cos(off_ang[i]), np.sin(off_ang[i])]
                    )
                phase[i] = _REGROUP

            if phase[i] == _REGROUP:
                goal = cur[leader] if chain_member[i] else regroup_goal[i]
                vec = goal - cur[i]
                dist = math.hypot(vec[0], vec[1])
                sprint = 2.0 * speed
                if dist <= sprint:
                    newpos[i] = goal
                    if not chain_member[i]:
                        phase[i] = _STOPPED
                else:
                    newpos[i] = cur[i] + vec * (sprint / dist)
                continue

            if config.model == "Random":
                vec = dest[i] - cur[i]
                dist = math.hypot(vec[0], vec[1])
                if dist <= ent_speed[i]:
                    newpos[i] = dest[i]
                    phase[i] = _STOPPED
                else:
                    step = _rotate(vec / dist, noise[i])
                    newpos[i] = cur[i] + step * ent_speed[i]
                continue

            if phase[i] == _DASHING:
                vec = dash_goal[i] - cur[i]
                dist = math.hypot(vec[0], vec[1])
                if dist <= speed:
                    newpos[i] = dash_goal[i]
                    phase[i] = _RIDING
                    anchor_time[i] = depart[target[i]]
                else:
                    # Ranked chain members approach dead straight: their
                    # whole segment runs between two points covered by the
                    # group, so they never cross the population hull.
                    step = (
                        vec / dist
                        if chain_member[i]
                        else _rotate(vec / dist, noise[i])
                    )
                    newpos[i] = cur[i] + step * speed
                continue

            # _RIDING: walk the target's recorded trail one step per step.
            nxt = anchor_time[i] + 1
            if nxt <= t:
                trail = positions[target[i]]
                if ride_copy:
                    newpos[i] = cur[i] + (trail[:, nxt] - trail[:, nxt - 1])
                else:
                    newpos[i] = trail[:, nxt]
                anchor_time[i] = nxt

        cur = newpos
        positions[:, :, t + 1] = cur

    dataset = Dataset(ids, positions)
    hierarchy = (
        tuple(ids[i] for i in hierarchy_idx) if hierarchy_idx is not None else None
    )
    return Trial(config, dataset, tuple(truths), hierarchy)


def run_trial_suite(
    model: str, trials: int, base_seed: int = 0, **overrides
) -> list[Trial]:
    """Generate ``trials`` independent trials with seeds base_seed + index."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    return [
        simulate(SimConfig(model=model, seed=base_seed + i, **overrides))
        for i in range(trials)
    ]
