"""Write-in and read-out of the four-mode linear cluster across four memory channels.

Twelve modes take part: the cluster light ``L1..L4``, the atomic ensembles
``A1..A4`` (vacuum) and the read-out pulses ``R1..R4`` (vacuum). Each channel
first swaps ``(A_i, L_i)`` through the transfer map, then ``(A_i, R_i)``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .cluster import GraphSpec, build_linear4_cluster, linear4_network, nullifiers, squeezer_bank, validate_profile
from .gaussian import (
    VACUUM_VARIANCE,
    ConfigurationError,
    GaussianState,
    ModeKind,
    ModeLabel,
    QuadratureCombination,
    QuadratureOrdering,
    ShapeError,
    SymplecticTransform,
    apply,
    atom,
    embed,
    light,
    mode_expansion_oracle,
    readout,
    symplectic_form,
    tensor,
    vacuum_state,
    variance,
)
from .memory import coefficients, transfer_beam_splitter, validate_kappa

N_CHANNELS = 4
CHANNELS = range(1, N_CHANNELS + 1)
LINEAR4 = GraphSpec.linear(N_CHANNELS)


class Stage(enum.Enum):
    INPUT = "input"
    STORED = "stored"
    RETRIEVED = "retrieved"


STAGE_KIND = {Stage.INPUT: ModeKind.LIGHT, Stage.STORED: ModeKind.ATOM, Stage.RETRIEVED: ModeKind.READOUT}


@dataclass(frozen=True)
class ProtocolConfig:
    kappa: float
    profile: tuple[float, ...]
    track_stage_snapshots: bool = False

    def __init__(self, kappa: float, r=0.0, track_stage_snapshots: bool = False):
        if np.ndim(r) == 0:
            r = [r] * N_CHANNELS
        profile = validate_profile(r, N_CHANNELS)
        object.__setattr__(self, "kappa", validate_kappa(kappa))
        object.__setattr__(self, "profile", tuple(float(v) for v in profile))
        object.__setattr__(self, "track_stage_snapshots", bool(track_stage_snapshots))

    @property
    def uniform_r(self) -> float | None:
        return self.profile[0] if len(set(self.profile)) == 1 else None

    @property
    def r(self) -> float | tuple[float, ...]:
        u = self.uniform_r
        return self.profile if u is None else u

    @classmethod
    def from_dict(cls, doc: dict) -> "ProtocolConfig":
        if not isinstance(doc, dict):
            raise ConfigurationError("config must be a JSON object")
        unknown = set(doc) - {"kappa", "r", "snapshots"}
        if unknown:
            raise ConfigurationError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        if "kappa" not in doc:
            raise ConfigurationError("config field 'kappa' is required")
        kappa = doc["kappa"]
        if isinstance(kappa, bool) or not isinstance(kappa, (int, float)):
            raise ConfigurationError(f"config field 'kappa' must be a number, got {kappa!r}")
        r = doc.get("r", 0.0)
        if isinstance(r, list):
            if len(r) != N_CHANNELS or not all(_is_number(v) for v in r):
                raise ConfigurationError(f"config field 'r' must be a number or {N_CHANNELS} numbers")
        elif not _is_number(r):
            raise ConfigurationError(f"config field 'r' must be a number, got {r!r}")
        snapshots = doc.get("snapshots", False)
        if not isinstance(snapshots, bool):
            raise ConfigurationError("config field 'snapshots' must be true or false")
        return cls(kappa, r, snapshots)

    @classmethod
    def from_json(cls, path: str | Path) -> "ProtocolConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


# closed forms

def _prefactor(which: int) -> float:
    if which not in CHANNELS:
        raise ConfigurationError(f"nullifier index must be 1..4, got {which}")
    return 0.5 if which in (1, 4) else 0.75


def input_variance_closed_form(r, which: int) -> float:
    """Nullifier variance of the ideal cluster.

    ``r`` may be a scalar (all four modes alike) or four per-mode values; in
    the latter case nullifiers 2 and 3 mix two squeezed momenta with weights
    5/8 and 1/8.
    """
    pre = _prefactor(which)
    if np.ndim(r) == 0:
        return pre * math.exp(-2 * r)
    r1, r2, r3, r4 = validate_profile(r, N_CHANNELS)
    return {
        1: 0.5 * math.exp(-2 * r1),
        2: 0.625 * math.exp(-2 * r3) + 0.125 * math.exp(-2 * r4),
        3: 0.125 * math.exp(-2 * r1) + 0.625 * math.exp(-2 * r2),
        4: 0.5 * math.exp(-2 * r4),
    }[which]


def stored_variance_closed_form(r, kappa: float, which: int) -> float:
    u = math.exp(-validate_kappa(kappa) ** 2)
    if np.ndim(r) == 0:
        return _prefactor(which) * ((1 - u) * math.exp(-2 * r) + u)
    return (1 - u) * input_variance_closed_form(r, which) + u * _prefactor(which)


def retrieved_variance_closed_form(r, kappa: float, which: int) -> float:
    u = math.exp(-validate_kappa(kappa) ** 2)
    if np.ndim(r) == 0:
        return _prefactor(which) * ((1 - u) ** 2 * math.exp(-2 * r) + (2 - u) * u)
    return (1 - u) ** 2 * input_variance_closed_form(r, which) + (2 - u) * u * _prefactor(which)


CLOSED_FORMS = {
    Stage.INPUT: lambda r, kappa, which: input_variance_closed_form(r, which),
    Stage.STORED: stored_variance_closed_form,
    Stage.RETRIEVED: retrieved_variance_closed_form,
}


# simulation

def protocol_ordering() -> QuadratureOrdering:
    return QuadratureOrdering(
        [light(i) for i in CHANNELS] + [atom(i) for i in CHANNELS] + [readout(i) for i in CHANNELS]
    )


def stage_modes(stage: Stage) -> list[ModeLabel]:
    kind = STAGE_KIND[stage]
    return [ModeLabel(kind, i) for i in CHANNELS]


def stage_nullifiers(stage: Stage, ordering: QuadratureOrdering | None = None) -> list[QuadratureCombination]:
    return nullifiers(LINEAR4, stage_modes(stage), ordering or protocol_ordering())


def storage_transforms(kappa: float, ordering: QuadratureOrdering) -> list[SymplecticTransform]:
    bs = transfer_beam_splitter(kappa)
    return [embed(bs, [atom(i), light(i)], ordering) for i in CHANNELS]


def retrieval_transforms(kappa: float, ordering: QuadratureOrdering) -> list[SymplecticTransform]:
    bs = transfer_beam_splitter(kappa)
    return [embed(bs, [atom(i), readout(i)], ordering) for i in CHANNELS]


def protocol_chain(config: ProtocolConfig) -> tuple[QuadratureOrdering, list[SymplecticTransform], list[SymplecticTransform], list[SymplecticTransform]]:
    """Transforms acting on the 12-mode vacuum, split into (prepare, store, retrieve)."""
    ordering = protocol_ordering()
    lights = [light(i) for i in CHANNELS]
    prepare = [
        embed(squeezer_bank(config.profile), lights, ordering),
        embed(linear4_network(), lights, ordering),
    ]
    return ordering, prepare, storage_transforms(config.kappa, ordering), retrieval_transforms(config.kappa, ordering)


@dataclass(frozen=True)
class StageReport:
    stage: Stage
    nullifier_variances: tuple[float, ...]
    closed_form_variances: tuple[float, ...]

    @property
    def max_deviation(self) -> float:
        return max(abs(a - b) for a, b in zip(self.nullifier_variances, self.closed_form_variances))

    def to_dict(self) -> dict:
        return {
            "stage": self.stage.value,
            "nullifier_variances": list(self.nullifier_variances),
            "closed_form_variances": list(self.closed_form_variances),
            "max_deviation": self.max_deviation,
        }


@dataclass(frozen=True)
class ProtocolResult:
    config: ProtocolConfig
    reports: dict[Stage, StageReport]
    final_state: GaussianState
    snapshots: dict[Stage, GaussianState] = field(default_factory=dict)

    @property
    def max_deviation(self) -> float:
        return max(rep.max_deviation for rep in self.reports.values())


def store_and_retrieve(light_state: GaussianState, kappa: float) -> dict[Stage, GaussianState]:
    """Run a four-mode light state through the memory; returns the 12-mode state per stage."""
    expected = [light(i) for i in CHANNELS]
    if list(light_state.ordering.modes) != expected:
        raise ShapeError(f"light state must be over modes {[str(m) for m in expected]}")
    state = tensor(
        light_state,
        vacuum_state(QuadratureOrdering(atom(i) for i in CHANNELS)),
        vacuum_state(QuadratureOrdering(readout(i) for i in CHANNELS)),
    )
    ordering = state.ordering
    states = {Stage.INPUT: state}
    for S in storage_transforms(kappa, ordering):
        state = apply(S, state)
    states[Stage.STORED] = state
    for S in retrieval_transforms(kappa, ordering):
        state = apply(S, state)
    states[Stage.RETRIEVED] = state
    return states


def run_protocol(config: ProtocolConfig, displacement=None) -> ProtocolResult:
    cluster = build_linear4_cluster(config.profile)
    if displacement is not None:
        cluster = cluster.displaced(_check_displacement(displacement))
    states = store_and_retrieve(cluster, config.kappa)
    reports = {}
    for stage, state in states.items():
        sim = tuple(variance(state, u) for u in stage_nullifiers(stage, state.ordering))
        closed = tuple(CLOSED_FORMS[stage](config.r, config.kappa, k) for k in CHANNELS)
        reports[stage] = StageReport(stage, sim, closed)
    snapshots = states if config.track_stage_snapshots else {}
    return ProtocolResult(config, reports, states[Stage.RETRIEVED], snapshots)


def _check_displacement(displacement) -> np.ndarray:
    d = np.asarray(displacement, dtype=float).reshape(-1)
    if d.size != 2 * N_CHANNELS:
        raise ShapeError(f"displacement needs {2 * N_CHANNELS} entries, got {d.size}")
    return d


def oracle_variances(config: ProtocolConfig) -> dict[Stage, tuple[float, ...]]:
    """Stage nullifier variances via the mode-expansion route only."""
    ordering, prepare, store, retrieve = protocol_chain(config)
    chains = {
        Stage.INPUT: prepare,
        Stage.STORED: prepare + store,
        Stage.RETRIEVED: prepare + store + retrieve,
    }
    initial = np.full(ordering.dim, VACUUM_VARIANCE)
    out = {}
    for stage, chain in chains.items():
        oracle = mode_expansion_oracle(chain, initial)
        out[stage] = tuple(oracle.variance(u) for u in stage_nullifiers(stage, ordering))
    return out


def stored_correlation_residual(config: ProtocolConfig) -> tuple[float, ...]:
    """Stored nullifier variances minus their perfect-transfer values."""
    stored = run_protocol(config).reports[Stage.STORED].nullifier_variances
    return tuple(v - input_variance_closed_form(config.r, k) for k, v in zip(CHANNELS, stored))


def sign_flip_check(kappa: float, displacement) -> float:
    """Max ``|readout mean + C1 * input mean|`` over all read-out quadratures."""
    d = _check_displacement(displacement)
    result = run_protocol(ProtocolConfig(kappa, 0.0), displacement=d)
    final = result.final_state
    out = final.mean[[i for m in (readout(k) for k in CHANNELS) for i in (final.ordering.x(m), final.ordering.p(m))]]
    return float(np.max(np.abs(out + coefficients(kappa).c1 * d)))


# entanglement witness

def restricted_commutator(u: QuadratureCombination, v: QuadratureCombination, ordering: QuadratureOrdering, channels) -> float:
    """Commutator coefficient of ``u`` and ``v`` keeping only modes whose channel is in ``channels``."""
    mask = np.zeros(ordering.dim)
    for k, m in enumerate(ordering.modes):
        if m.channel in channels:
            mask[2 * k:2 * k + 2] = 1.0
    J = symplectic_form(len(ordering))
    return 0.5 * float((u.coefficients * mask) @ J @ (v.coefficients * mask))


def separability_bound(u, v, ordering, side_a) -> float:
    """Lower bound on ``V(u) + V(v)`` for states separable across ``side_a | rest``.

    Product states obey ``V(u_A) + V(v_A) >= |<[u_A, v_A]>|`` on each side
    independently, with the commutators taken at the 1/4 vacuum level.
    """
    side_b = {m.channel for m in ordering.modes} - set(side_a)
    return abs(restricted_commutator(u, v, ordering, set(side_a))) + abs(
        restricted_commutator(u, v, ordering, side_b)
    )


DEFAULT_BIPARTITIONS = ({1}, {1, 2}, {1, 2, 3})


@dataclass(frozen=True)
class WitnessEntry:
    pair: tuple[int, int]
    side_a: tuple[int, ...]
    variance_sum: float
    bound: float

    @property
    def informative(self) -> bool:
        return self.bound > 0.0

    @property
    def witnessed(self) -> bool:
        return self.variance_sum < self.bound

    def to_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "side_a": list(self.side_a),
            "variance_sum": self.variance_sum,
            "bound": self.bound,
            "witnessed": self.witnessed,
        }


def entanglement_report(
    state: GaussianState,
    nulls: Sequence[QuadratureCombination],
    bipartitions=DEFAULT_BIPARTITIONS,
    bound: Callable = separability_bound,
) -> list[WitnessEntry]:
    """Variance-sum test for every adjacent nullifier pair against every bipartition.

    Bipartitions are given as the channel indices on side A. Entries whose
    bound is zero can never witness anything and are kept only for
    completeness.
    """
    entries = []
    for k in range(len(nulls) - 1):
        u, v = nulls[k], nulls[k + 1]
        total = variance(state, u) + variance(state, v)
        for side_a in bipartitions:
            entries.append(
                WitnessEntry((k + 1, k + 2), tuple(sorted(side_a)), total, bound(u, v, state.ordering, side_a))
            )
    return entries
