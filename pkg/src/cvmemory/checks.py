"""Numerical invariant suite behind ``cvmemory verify``.

Every check returns a residual; it passes when the residual is at most its
tolerance. Logical properties (orderings, monotonicity) report the size of
the worst violation, so a clean pass has residual 0.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from itertools import combinations
from typing import Callable

import numpy as np

from . import cluster, memory, protocol, sweeps, svg
from .gaussian import (
    QuadratureCombination,
    SymplecticTransform,
    apply,
    check_symplectic,
    commutator_coefficient,
    readout,
    variance,
)
from .protocol import CHANNELS, ProtocolConfig, Stage

KAPPA_GRID = (0.0, 0.5, 1.0, 1.5, 2.5, 5.0)
R_GRID = (0.0, 0.5, 1.0, 2.0, 3.0)
SEED = 20111


@dataclass(frozen=True)
class Check:
    name: str
    module: str
    tol: float
    fn: Callable[..., float]
    description: str


@dataclass(frozen=True)
class CheckResult:
    name: str
    module: str
    residual: float
    tol: float
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.residual <= self.tol

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        detail = self.error or f"residual={self.residual:.3e} tol={self.tol:.1e}"
        return f"[{status}] {self.module}.{self.name}: {detail}"


REGISTRY: list[Check] = []


def check(module: str, tol: float, description: str):
    def deco(fn):
        REGISTRY.append(Check(fn.__name__, module, tol, fn, description))
        return fn

    return deco


def _grid_results():
    return {(k, r): protocol.run_protocol(ProtocolConfig(k, r, True)) for k in KAPPA_GRID for r in R_GRID}


def _random_symplectic(rng, n_modes: int) -> np.ndarray:
    """Product of random local squeezers, rotations and beam splitters."""
    M = np.eye(2 * n_modes)
    for _ in range(3):
        for k in range(n_modes):
            t, r = rng.uniform(0, 2 * np.pi), rng.uniform(-1, 1)
            local = np.array([[np.cos(t), np.sin(t)], [-np.sin(t), np.cos(t)]]) @ np.diag([np.exp(r), np.exp(-r)])
            B = np.eye(2 * n_modes)
            B[2 * k:2 * k + 2, 2 * k:2 * k + 2] = local
            M = B @ M
        for k in range(n_modes - 1):
            kappa = rng.uniform(0, 3)
            M = embed_matrix(memory.transfer_beam_splitter(kappa).matrix, [k, k + 1], n_modes) @ M
    return M


def embed_matrix(small: np.ndarray, positions, n_modes: int) -> np.ndarray:
    idx = [i for p in positions for i in (2 * p, 2 * p + 1)]
    M = np.eye(2 * n_modes)
    M[np.ix_(idx, idx)] = small
    return M


def _strict_violation(steps) -> float:
    """0 when every step is strictly positive, else the worst offending step size (at least 1 for ties)."""
    worst = float(np.min(steps))
    return 0.0 if worst > 0 else max(-worst, 1.0)


# gaussian_core

@check("gaussian_core", 1e-10, "every transform built in the package satisfies S J S^T = J")
def symplectic_preservation(table=None, **_):
    mats = [cluster.table_to_matrix(table or cluster.LINEAR4_TABLE), cluster.squeezer_bank([0.3, 1, 2, 3]).matrix]
    mats += [memory.transfer_beam_splitter(k).matrix for k in KAPPA_GRID]
    mats += [cluster.edge_gate(4, a, b).matrix for a, b in combinations(range(1, 5), 2)]
    _, prepare, store, retrieve = protocol.protocol_chain(ProtocolConfig(1.5, 1.0))
    mats += [S.matrix for S in prepare + store + retrieve]
    return max(check_symplectic(m)[1] for m in mats)


@check("gaussian_core", 1e-9, "symplectic maps keep cov + (i/4)J positive semidefinite")
def uncertainty_preservation(grid, **_):
    margins = [st.uncertainty_margin() for res in grid.values() for st in res.snapshots.values()]
    return max(0.0, -min(margins))


@check("gaussian_core", 1e-10, "commutators of pulled-back combinations are unchanged")
def commutator_invariance(rng, **_):
    worst = 0.0
    for _ in range(100):
        S = _random_symplectic(rng, 3)
        u, v = QuadratureCombination(rng.normal(size=6)), QuadratureCombination(rng.normal(size=6))
        Su, Sv = QuadratureCombination(S.T @ u.coefficients), QuadratureCombination(S.T @ v.coefficients)
        worst = max(worst, abs(commutator_coefficient(Su, Sv) - commutator_coefficient(u, v)))
    return worst


@check("gaussian_core", 1e-12, "covariance propagation equals the mode-expansion oracle")
def representation_equivalence(grid, **_):
    worst = 0.0
    for (k, r), res in grid.items():
        oracle = protocol.oracle_variances(ProtocolConfig(k, r))
        for stage, state in res.snapshots.items():
            sim = [variance(state, u, method="cov") for u in protocol.stage_nullifiers(stage)]
            worst = max(worst, max(abs(a - b) for a, b in zip(sim, oracle[stage])))
    return worst


@check("gaussian_core", 0.0, "displacing the mean leaves every variance unchanged")
def translation_invariance(rng, **_):
    worst = 0.0
    state = protocol.run_protocol(ProtocolConfig(1.5, 1.0)).final_state
    for _ in range(100):
        shifted = state.displaced(rng.normal(scale=10, size=state.ordering.dim))
        u = QuadratureCombination(rng.normal(size=state.ordering.dim))
        worst = max(worst, abs(variance(shifted, u) - variance(state, u)))
    return worst


# cluster_builder

@check("cluster_builder", 1e-12, "linear four-mode network is symplectic")
def linear4_symplectic(table=None, **_):
    return check_symplectic(cluster.table_to_matrix(table or cluster.LINEAR4_TABLE))[1]


@check("cluster_builder", 1e-12, "cluster nullifier variances equal (1/2, 3/4, 3/4, 1/2) e^{-2r}")
def linear4_nullifier_closed_form(**_):
    worst = 0.0
    for r in R_GRID:
        st = cluster.build_linear4_cluster(cluster.uniform_profile(r))
        for k, u in enumerate(cluster.nullifiers(protocol.LINEAR4), start=1):
            worst = max(worst, abs(variance(st, u) - protocol.input_variance_closed_form(r, k)))
    return worst


@check("cluster_builder", 1e-12, "nullifiers of one graph mutually commute")
def nullifier_commutation(**_):
    graphs = [protocol.LINEAR4, cluster.GraphSpec(4, [(1, 2), (2, 3), (3, 4), (4, 1)]),
              cluster.GraphSpec(4, [(1, 2), (2, 3), (2, 4)]), cluster.GraphSpec(5, [])]
    worst = 0.0
    for g in graphs:
        for u, v in combinations(cluster.nullifiers(g), 2):
            worst = max(worst, abs(commutator_coefficient(u, v)))
    return worst


@check("cluster_builder", 0.0, "each nullifier variance strictly decreases with r")
def nullifier_monotonicity(**_):
    rs = np.linspace(0, 5, 51)
    vals = np.array([[variance(cluster.build_linear4_cluster(cluster.uniform_profile(r)), u)
                      for u in cluster.nullifiers(protocol.LINEAR4)] for r in rs])
    return _strict_violation(-np.diff(vals, axis=0))


@check("cluster_builder", 1e-12, "edge-gate clusters have nullifier variance e^{-2 r_a}/4")
def graph_cluster_nullifiers(**_):
    worst = 0.0
    cases = [(protocol.LINEAR4, [1.0] * 4), (cluster.GraphSpec(5, [(1, 2), (1, 3), (3, 4), (4, 5), (5, 1)]),
                                              [0.2, 0.7, 1.1, 0.0, 2.0])]
    for g, r in cases:
        st = cluster.build_graph_cluster(g, r)
        for a, u in enumerate(cluster.nullifiers(g)):
            worst = max(worst, abs(variance(st, u) - 0.25 * math.exp(-2 * r[a])))
    return worst


@check("cluster_builder", 1e-8, "nullifier variances vanish at r = 10")
def infinite_squeezing_limit(**_):
    st = cluster.build_linear4_cluster(cluster.uniform_profile(10.0))
    return max(variance(st, u) for u in cluster.nullifiers(protocol.LINEAR4))


# memory_channel

@check("memory_channel", 1e-12, "transfer map is symplectic for every kappa")
def transfer_symplectic(rng, **_):
    ks = list(KAPPA_GRID) + list(rng.uniform(0, 6, size=50))
    return max(check_symplectic(memory.transfer_beam_splitter(k).matrix)[1] for k in ks)


@check("memory_channel", 1e-12, "C1^2 + C2^2 + C3^2 = 1")
def coefficient_normalization(rng, **_):
    ks = np.concatenate([KAPPA_GRID, rng.uniform(0, 5, size=100)])
    return max(abs(sum(c * c for c in memory.coefficients(k).as_tuple()) - 1) for k in ks)


@check("memory_channel", 0.0, "C1 increases and C2 decreases strictly over kappa in [0, 3]")
def coefficient_monotonicity(**_):
    c = np.array([memory.coefficients(k).as_tuple() for k in np.arange(301) * 0.01])
    return max(_strict_violation(np.diff(c[:, 0])), _strict_violation(-np.diff(c[:, 1])))


@check("memory_channel", 1e-15, "C1 -> 1 at kappa = 6")
def c1_limit(**_):
    return abs(memory.coefficients(6.0).c1 - 1.0)


@check("memory_channel", 2e-8, "C2, C3 -> 0 at kappa = 6")
def c2_c3_limit(**_):
    c = memory.coefficients(6.0)
    return max(c.c2, c.c3)


@check("memory_channel", 0.0, "transfer map acts identically on x and p")
def xp_symmetry(**_):
    worst = 0.0
    for k in KAPPA_GRID:
        M = memory.transfer_beam_splitter(k).matrix
        worst = max(worst, float(np.max(np.abs(M[0::2, 0::2] - M[1::2, 1::2]))),
                    float(np.max(np.abs(M[0::2, 1::2]))), float(np.max(np.abs(M[1::2, 0::2]))))
    return worst


@check("memory_channel", 1e-12, "storage then retrieval gives (-C1, +C2, -C3)")
def composition_identity(rng, **_):
    return max(memory.composition_identity_check(k) for k in rng.uniform(0, 5, size=100))


@check("memory_channel", 1e-8, "C3 peaks at 1/2; grid search agrees with the analytic value")
def c3_maximum_value(**_):
    _, c_star = memory.c3_maximum()
    _, c_grid = memory.c3_grid_maximum()
    return max(abs(c_star - c_grid), abs(c_star - 0.5))


@check("memory_channel", 1e-4, "C3 peak location sqrt(ln 2) agrees with grid search")
def c3_maximum_location(**_):
    return abs(memory.c3_maximum()[0] - memory.c3_grid_maximum()[0])


# protocol_runner

@check("protocol_runner", 1e-12, "simulated stage variances match the closed forms on the grid")
def closed_form_grid(grid, **_):
    return max(res.max_deviation for res in grid.values())


@check("protocol_runner", 0.0, "at kappa = 1.5 input < stored < retrieved for r > 0")
def stage_ordering(**_):
    worst = 0.0
    for r in (0.25, 0.5, 1.0, 2.0, 3.0):
        rep = protocol.run_protocol(ProtocolConfig(1.5, r)).reports
        v = [np.array(rep[s].nullifier_variances) for s in Stage]
        worst = max(worst, float(np.max(v[0] - v[1])), float(np.max(v[1] - v[2])))
        if np.any(v[0] == v[1]) or np.any(v[1] == v[2]):
            worst = max(worst, 1.0)
    return worst


@check("protocol_runner", 0.0, "at kappa = 2.5 every stage stays within 3/4 u (2-u) of the input")
def near_coincidence(**_):
    u = math.exp(-2.5**2)
    bound = 0.75 * (2 - u) * u
    worst = 0.0
    for r in np.arange(61) * 0.05:
        rep = protocol.run_protocol(ProtocolConfig(2.5, r)).reports
        v_in = np.array(rep[Stage.INPUT].nullifier_variances)
        for s in (Stage.STORED, Stage.RETRIEVED):
            worst = max(worst, float(np.max(np.abs(np.array(rep[s].nullifier_variances) - v_in))) - bound)
    return max(0.0, worst)


@check("protocol_runner", 1e-12, "relabelling the channels permutes the results identically")
def channel_permutation(rng, **_):
    worst = 0.0
    for _ in range(20):
        perm = rng.permutation(4)
        cfg = ProtocolConfig(rng.uniform(0, 4), list(rng.uniform(0, 2, size=4)))
        worst = max(worst, protocol_permutation_residual(cfg, perm))
    return worst


def protocol_permutation_residual(cfg: ProtocolConfig, perm) -> float:
    """Run the cluster with its light modes permuted by ``perm`` and compare
    every read-out quadrature covariance against the unpermuted run."""
    base = cluster.build_linear4_cluster(cfg.profile)
    P = np.zeros((8, 8))
    for i, j in enumerate(perm):
        P[2 * j:2 * j + 2, 2 * i:2 * i + 2] = np.eye(2)
    permuted = apply(SymplecticTransform(P, "perm"), base)
    out_a = protocol.store_and_retrieve(base, cfg.kappa)
    out_b = protocol.store_and_retrieve(permuted, cfg.kappa)
    worst = 0.0
    for stage in Stage:
        a = out_a[stage].reduced(protocol.stage_modes(stage))
        b = out_b[stage].reduced(protocol.stage_modes(stage))
        worst = max(worst, float(np.max(np.abs(P @ a.cov @ P.T - b.cov))))
    return worst


@check("protocol_runner", 0.0, "retrieved covariance differs from input by at most (1-C1^2) max(e^{2r}/4, 1)")
def retrieved_covariance_bound(grid, **_):
    worst = 0.0
    for (k, r), res in grid.items():
        c1 = memory.coefficients(k).c1
        a = res.snapshots[Stage.INPUT].reduced(protocol.stage_modes(Stage.INPUT)).cov
        b = res.snapshots[Stage.RETRIEVED].reduced(protocol.stage_modes(Stage.RETRIEVED)).cov
        bound = (1 - c1**2) * max(math.exp(2 * r) / 4, 1.0)
        worst = max(worst, float(np.max(np.abs(a - b))) - bound - 1e-12)
    return max(0.0, worst)


@check("protocol_runner", 1e-12, "stored excess noise equals prefactor e^{-kappa^2}(1 - e^{-2r})")
def stored_correlation(**_):
    worst = 0.0
    for k in KAPPA_GRID:
        for r in R_GRID:
            res = protocol.stored_correlation_residual(ProtocolConfig(k, r))
            for which, v in zip(CHANNELS, res):
                pre = 0.5 if which in (1, 4) else 0.75
                worst = max(worst, abs(v - pre * math.exp(-k * k) * (1 - math.exp(-2 * r))))
    return worst


@check("protocol_runner", 1e-12, "read-out means equal -C1 times the input means")
def sign_flip(rng, **_):
    return max(protocol.sign_flip_check(k, rng.normal(size=8)) for k in KAPPA_GRID + (6.0,))


@check("protocol_runner", 1e-10, "at kappa = 6 the read-out means are the exact negation of the input")
def sign_flip_large_kappa(**_):
    d = np.zeros(8)
    d[0] = 1.0
    res = protocol.run_protocol(ProtocolConfig(6.0, 0.0), displacement=d).final_state
    out = res.mean[[res.ordering.x(readout(i)) for i in CHANNELS] +
                   [res.ordering.p(readout(i)) for i in CHANNELS]]
    expected = -np.concatenate([d[0::2], d[1::2]])
    return float(np.max(np.abs(out - expected)))


@check("protocol_runner", 1e-6, "r = 15, kappa = 1.5 stored/retrieved V1 approach 0.052700 / 0.099845")
def asymptotes(**_):
    rep = protocol.run_protocol(ProtocolConfig(1.5, 15.0)).reports
    return max(abs(rep[Stage.STORED].nullifier_variances[0] - 0.052700),
               abs(rep[Stage.RETRIEVED].nullifier_variances[0] - 0.099845))


@check("protocol_runner", 0.0, "strong squeezing and coupling witness entanglement across every chain cut")
def entanglement_witness(**_):
    state = protocol.run_protocol(ProtocolConfig(2.5, 2.0)).final_state
    entries = protocol.entanglement_report(state, protocol.stage_nullifiers(Stage.RETRIEVED))
    informative = [e for e in entries if e.informative]
    vac = protocol.run_protocol(ProtocolConfig(2.5, 0.0)).final_state
    vac_entries = protocol.entanglement_report(vac, protocol.stage_nullifiers(Stage.RETRIEVED))
    return float(sum(not e.witnessed for e in informative) + sum(e.witnessed for e in vac_entries)
                 + (len(informative) != 3))


# cli_analysis

@check("cli_analysis", 0.0, "CSV output is deterministic and round-trips exactly")
def csv_roundtrip(**_):
    spec = sweeps.SweepSpec("kappa", 0.0, 3.0, 0.01)
    recs = sweeps.coefficient_sweep(spec)
    a, b = sweeps.to_csv(recs, "kappa"), sweeps.to_csv(sweeps.coefficient_sweep(spec), "kappa")
    _, rows = sweeps.read_csv(a)
    mismatch = sum(row != [rec.abscissa, *rec.series.values()] for row, rec in zip(rows, recs))
    return float((a != b) + mismatch + (len(rows) != 301))


@check("cli_analysis", 0.0, "SVG output is well-formed with one path per series")
def svg_wellformed(**_):
    xs = [0.0, 1.0, 2.0]
    panel = svg.Panel("t", "x", "y", [svg.Series("a", xs, [0, 1, 2]), svg.Series("b", xs, [2, 1, 0])])
    root = ET.fromstring(svg.render([panel, panel]))
    paths = root.findall(".//{http://www.w3.org/2000/svg}path")
    return float(len(paths) != 4)


def run_checks(tol_override: float | None = None, table=None, seed: int = SEED) -> list[CheckResult]:
    grid = _grid_results()
    results = []
    for c in REGISTRY:
        rng = np.random.default_rng(seed)
        tol = c.tol if tol_override is None else tol_override
        try:
            residual = float(c.fn(grid=grid, rng=rng, table=table))
        except Exception as exc:  # noqa: BLE001 - a crashing check is a failing check
            results.append(CheckResult(c.name, c.module, math.inf, tol, f"{type(exc).__name__}: {exc}"))
            continue
        results.append(CheckResult(c.name, c.module, residual, tol))
    return results
