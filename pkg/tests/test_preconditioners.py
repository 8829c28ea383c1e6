import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nsprecoding.channel import SystemConfig, draw_realization
from nsprecoding.checks import all_kinds, random_grams
from nsprecoding.errors import BadRange, SingularPrecondition
from nsprecoding.preconditioners import (
    Kind,
    PreconditionKind,
    assemble_batch,
    build_precondition,
    invert_precondition,
    mp_edges,
    omega_star,
    select_columns,
    spectral_check,
)


def test_mp_edges_third():
    e = mp_edges(1 / 3)
    assert e.a_bar == pytest.approx(0.17863279495408177, abs=1e-12)
    assert e.b_bar == pytest.approx(2.488033871712585, abs=1e-12)


def test_mp_edges_quarter_exact():
    e = mp_edges(0.25)
    assert (e.a_bar, e.b_bar) == (0.25, 2.25)


def test_mp_edges_small_loading():
    e = mp_edges(1e-14)
    assert e.a_bar == pytest.approx(1.0, abs=1e-6) and e.b_bar == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("r", [0.0, -0.1, 1.01])
def test_mp_edges_range(r):
    with pytest.raises(BadRange):
        mp_edges(r)


def test_omega_star_reference_values():
    assert abs(omega_star(60, 10, 0.5) - 4 / 3) < 1e-12
    assert abs(omega_star(100, 10, 0.5) - 1.2) < 1e-12
    assert abs(omega_star(10**9, 1, 1.0) - 1.0) < 1e-8


@given(M=st.integers(1, 5000), kfrac=st.floats(1e-4, 1.0), c=st.floats(0.01, 1.0))
def test_omega_star_identity(M, kfrac, c):
    K = max(1, int(kfrac * c * M))
    if K > c * M:
        return
    assert abs(omega_star(M, K, c) - (1 + K / (c * M))) < 1e-12


def test_kind_validation():
    with pytest.raises(ValueError):
        PreconditionKind(Kind.DNS, 1.2)
    with pytest.raises(BadRange):
        PreconditionKind(Kind.ICNS, 0.0)
    assert Kind.parse("orderedicns") is Kind.ORDERED_ICNS
    with pytest.raises(ValueError):
        Kind.parse("SOR")


def test_ins_matrix():
    pm = build_precondition(PreconditionKind(Kind.INS, 1.3), random_grams(3, 1, 0)[0])
    assert np.array_equal(pm.D, 1.3 * np.eye(3))


def test_icns_two_by_two():
    G = np.array([[1.0, 1.0], [1.0, 1.0]], dtype=complex)
    pm = build_precondition(PreconditionKind(Kind.ICNS, 2.0), G)
    assert np.array_equal(pm.D, [[2, 0], [1, 2]])
    assert np.allclose(pm.D_inv, [[0.5, 0], [-0.25, 0.5]], atol=0)


def test_ordered_icns_picks_strongest_column():
    G = np.array([[1, 0.1, 0.5], [0.1, 1, 0.6], [0.5, 0.6, 1]], dtype=complex)
    pm = build_precondition(PreconditionKind(Kind.ORDERED_ICNS, 1.5), G)
    assert pm.selected_column == 2
    off = pm.D - np.diag(np.diag(pm.D))
    assert np.count_nonzero(off[:, :2]) == 0
    assert np.allclose(off[:, 2], [0.5, 0.6, 0])
    assert pm.D[2, 2] == 1.5


def test_ordered_icns_tie_goes_to_smallest_index():
    G = np.ones((4, 4), dtype=complex) + 3 * np.eye(4)
    assert build_precondition(PreconditionKind(Kind.ORDERED_ICNS, 1.0), G).selected_column == 0
    G = np.eye(4, dtype=complex)
    G[1, 3] = G[3, 1] = G[2, 3] = G[3, 2] = 0.4
    G[1, 2] = G[2, 1] = 0.4
    # columns 1, 2, 3 tie
    assert build_precondition(PreconditionKind(Kind.ORDERED_ICNS, 1.0), G).selected_column == 1


def test_icns_scalar():
    pm = build_precondition(PreconditionKind(Kind.ICNS, 1.0), np.array([[2.0 + 0j]]))
    assert np.array_equal(pm.D, [[1.0]]) and np.array_equal(pm.D_inv, [[1.0]])


def test_cns_identity_gram():
    pm = build_precondition(PreconditionKind(Kind.CNS), np.eye(4, dtype=complex))
    assert np.array_equal(pm.D, np.eye(4)) and np.allclose(pm.D_inv, np.eye(4))


def test_tns_against_dense_solve():
    rng = np.random.default_rng(5)
    D = np.diag(5 + rng.random(5)).astype(complex)
    for i in range(4):
        z = rng.standard_normal() + 1j * rng.standard_normal()
        D[i + 1, i], D[i, i + 1] = z, np.conj(z)
    Dinv = invert_precondition(PreconditionKind(Kind.TNS), D)
    assert np.linalg.norm(Dinv - np.linalg.solve(D, np.eye(5))) < 1e-10


@pytest.mark.parametrize("tag", [Kind.DNS, Kind.CNS, Kind.TNS])
def test_zero_pivot_raises(tag):
    G = np.eye(3, dtype=complex)
    G[1, 1] = 0.0
    with pytest.raises(SingularPrecondition):
        build_precondition(PreconditionKind(tag), G)


def test_tns_interior_pivot_raises():
    D = np.array([[1, 1, 0], [1, 1, 1], [0, 1, 1]], dtype=complex)
    with pytest.raises(SingularPrecondition):
        invert_precondition(PreconditionKind(Kind.TNS), D)


def test_spectral_check_exact_split():
    G = random_grams(5, 1, 2)[0]
    assert spectral_check(np.linalg.inv(G), G) == pytest.approx(0.0, abs=1e-12)
    assert spectral_check(np.linalg.inv(2 * G), G) == pytest.approx(0.5, abs=1e-10)


def test_spectral_check_ins_large_iid():
    real = draw_realization(SystemConfig(400, 40, 1.0), 17)
    w = omega_star(400, 40, 1.0)
    val = spectral_check(np.eye(40) / w, real.G)
    target = 2 * np.sqrt(0.1) / 1.1
    assert abs(val - target) / target < 0.10


def test_spectral_check_matches_svd():
    G = random_grams(8, 1, 9)[0]
    pm = build_precondition(PreconditionKind(Kind.DNS), G)
    ref = np.linalg.norm(np.eye(8) - pm.D_inv @ G, 2)
    assert spectral_check(pm.D_inv, G) == pytest.approx(ref, rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(K=st.integers(1, 32), seed=st.integers(0, 10**6))
def test_inverse_identity_all_kinds(K, seed):
    G = random_grams(K, 4, seed)
    for kind in all_kinds(K, 2 * K):
        for g in G:
            pm = build_precondition(kind, g)
            assert np.linalg.norm(pm.D @ pm.D_inv - np.eye(K)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(K=st.integers(2, 32), seed=st.integers(0, 10**6))
def test_column_block_is_nilpotent(K, seed):
    G = random_grams(K, 1, seed)[0]
    for tag in (Kind.ICNS, Kind.ORDERED_ICNS):
        pm = build_precondition(PreconditionKind(tag, 1.3), G)
        C = pm.D - 1.3 * np.eye(K)
        assert not np.any(C @ C)
        j = pm.selected_column if tag is Kind.ORDERED_ICNS else 0
        assert np.count_nonzero(np.delete(C, j, axis=1)) == 0


@settings(max_examples=30, deadline=None)
@given(K=st.integers(2, 16), seed=st.integers(0, 10**6), scale=st.floats(1e-3, 1e3))
def test_argmax_scale_invariant(K, seed, scale):
    G = random_grams(K, 3, seed)
    assert np.array_equal(select_columns(G), select_columns(scale * G))


def test_assembly_requires_resolved_omega():
    with pytest.raises(ValueError):
        assemble_batch(PreconditionKind(Kind.INS), random_grams(3, 1, 0))
