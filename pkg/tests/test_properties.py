import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from cvmemory.checks import protocol_permutation_residual
from cvmemory.cluster import GraphSpec, build_graph_cluster, nullifiers, squeezer_bank
from cvmemory.gaussian import (
    GaussianState,
    QuadratureCombination,
    QuadratureOrdering,
    SymplecticTransform,
    apply,
    check_symplectic,
    commutator_coefficient,
    embed,
    light,
    mode_expansion_oracle,
    vacuum_state,
    variance,
)
from cvmemory.memory import coefficients, composition_identity_check, transfer_beam_splitter
from cvmemory.protocol import ProtocolConfig, run_protocol

N = 3
ORDERING = QuadratureOrdering(light(i) for i in range(1, N + 1))

kappas = st.floats(0.0, 5.0)
squeezings = st.floats(-2.0, 2.0)
angles = st.floats(0.0, 2 * math.pi)
reals = st.floats(-3.0, 3.0)


def rotation(t):
    return SymplecticTransform(np.array([[math.cos(t), math.sin(t)], [-math.sin(t), math.cos(t)]]))


@st.composite
def symplectics(draw):
    """Random layered network of local rotations, squeezers and beam splitters."""
    M = SymplecticTransform.identity(N)
    for _ in range(2):
        for k in range(1, N + 1):
            M = embed(rotation(draw(angles)), [light(k)], ORDERING) @ M
            M = embed(squeezer_bank([draw(squeezings)]), [light(k)], ORDERING) @ M
        a, b = draw(st.permutations(range(1, N + 1)))[:2]
        M = embed(transfer_beam_splitter(draw(kappas)), [light(a), light(b)], ORDERING) @ M
    return M


@st.composite
def physical_states(draw):
    """Thermal-squeezed states: symplectic image of a diagonal state with variances >= 1/4."""
    nu = [draw(st.floats(0.25, 3.0)) for _ in range(N)]
    base = GaussianState(ORDERING, np.zeros(2 * N), np.diag(np.repeat(nu, 2)))
    return apply(draw(symplectics()), base)


combos = st.lists(reals, min_size=2 * N, max_size=2 * N).filter(lambda c: any(c)).map(QuadratureCombination)


@settings(max_examples=150, deadline=None)
@given(physical_states(), symplectics())
def test_uncertainty_preserved(state, S):
    assert state.is_physical()
    assert apply(S, state).uncertainty_margin() >= -1e-9


@settings(max_examples=150, deadline=None)
@given(symplectics())
def test_random_networks_symplectic(S):
    assert check_symplectic(S.matrix)[1] <= 1e-10


@settings(max_examples=150, deadline=None)
@given(combos, combos, symplectics())
def test_commutator_invariance(u, v, S):
    Su = QuadratureCombination(S.matrix.T @ u.coefficients)
    Sv = QuadratureCombination(S.matrix.T @ v.coefficients)
    scale = 1 + float(np.abs(Su.coefficients).max() * np.abs(Sv.coefficients).max())
    assert abs(commutator_coefficient(Su, Sv) - commutator_coefficient(u, v)) <= 1e-10 * scale


@st.composite
def graphs(draw):
    n = draw(st.integers(1, 7))
    pairs = [(a, b) for a in range(1, n + 1) for b in range(a + 1, n + 1)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return GraphSpec(n, edges)


@settings(max_examples=150, deadline=None)
@given(graphs())
def test_nullifiers_commute(graph):
    nulls = nullifiers(graph)
    assert len(nulls) == graph.n_vertices
    for i in range(len(nulls)):
        for j in range(i + 1, len(nulls)):
            assert abs(commutator_coefficient(nulls[i], nulls[j])) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(graphs(), st.data())
def test_graph_cluster_nullifier_variances(graph, data):
    r = data.draw(st.lists(st.floats(0.0, 3.0), min_size=graph.n_vertices, max_size=graph.n_vertices))
    state = build_graph_cluster(graph, r)
    for a, u in enumerate(nullifiers(graph)):
        assert abs(variance(state, u) - 0.25 * math.exp(-2 * r[a])) <= 1e-12


@settings(max_examples=150, deadline=None)
@given(physical_states(), st.lists(st.floats(-1e3, 1e3), min_size=2 * N, max_size=2 * N), combos)
def test_translation_invariance(state, shift, u):
    shifted = state.displaced(shift)
    assert variance(shifted, u) == variance(state, u)
    assert variance(shifted, u, method="cov") == variance(state, u, method="cov")


@settings(max_examples=100, deadline=None)
@given(kappas, st.lists(st.floats(0.0, 2.0), min_size=4, max_size=4), st.permutations(range(4)))
def test_channel_permutation_equivariance(kappa, profile, perm):
    assert protocol_permutation_residual(ProtocolConfig(kappa, profile), perm) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.lists(symplectics(), max_size=3), combos)
def test_oracle_matches_covariance_route(chain, u):
    state = vacuum_state(ORDERING)
    for S in chain:
        state = apply(S, state)
    oracle = mode_expansion_oracle(chain, np.full(2 * N, 0.25))
    expected = variance(state, u, method="cov")
    assert abs(oracle.variance(u) - expected) <= 1e-12 * max(1.0, expected)


@settings(max_examples=150, deadline=None)
@given(kappas)
def test_channel_coefficient_identities(kappa):
    c = coefficients(kappa)
    assert abs(c.c1**2 + c.c2**2 + c.c3**2 - 1) <= 1e-12
    assert composition_identity_check(kappa) <= 1e-12
    assert check_symplectic(transfer_beam_splitter(kappa).matrix)[1] <= 1e-12


@settings(max_examples=100, deadline=None)
@given(kappas, st.floats(0.0, 3.0))
def test_protocol_physical_at_every_stage(kappa, r):
    res = run_protocol(ProtocolConfig(kappa, r, track_stage_snapshots=True))
    assert res.max_deviation <= 1e-12
    assert all(s.uncertainty_margin() >= -1e-9 for s in res.snapshots.values())
