"""Ensembles, named models, dense assembly, and coefficient-file round trips."""

import numpy as np
import pytest

from corrspec.basis import LatticeError, LatticeSpec, build_local_basis, hs_inner
from corrspec.hamiltonians import (
    assemble_dense,
    coefficient_angle,
    load_coefficients,
    named_model,
    project_coefficients,
    random_disordered,
    random_translation_invariant,
    save_coefficients,
    ti_block,
    vector_angle,
)
from corrspec.momentum import translate

import oracles


@pytest.fixture(scope="module")
def basis4():
    return build_local_basis(LatticeSpec(n=4))


def test_disordered_deterministic(basis4):
    h1 = random_disordered(basis4, seed=7)
    h2 = random_disordered(basis4, seed=7)
    assert np.array_equal(h1.coeffs, h2.coeffs)
    h3 = random_disordered(basis4, seed=8)
    assert not np.array_equal(h1.coeffs, h3.coeffs)


def test_disordered_moments():
    basis = build_local_basis(LatticeSpec(n=9))  # 108 coeffs per draw
    draws = np.concatenate([random_disordered(basis, seed=s, stddev=2.0).coeffs for s in range(1000)])
    n = draws.size  # 108000 samples
    assert abs(draws.mean()) < 3 * 2.0 / np.sqrt(n)
    var = draws.var()
    # var of sample variance ~ 2 sigma^4 / n
    assert abs(var - 4.0) < 3 * np.sqrt(2 * 16.0 / n)


def test_translation_invariant_structure(basis4):
    h = random_translation_invariant(basis4, seed=3)
    blocks = h.coeffs.reshape(4, 12)
    assert np.array_equal(blocks[0], blocks[1])
    assert np.array_equal(blocks[0], blocks[3])
    assert np.array_equal(ti_block(h), blocks[0])
    with pytest.raises(LatticeError):
        random_translation_invariant(build_local_basis(LatticeSpec(n=4, boundary="open")), seed=1)


def test_translation_invariant_commutes_with_shift():
    spec = LatticeSpec(n=5)
    h = random_translation_invariant(spec, seed=11)
    dense = assemble_dense(h)
    N = spec.N
    # dense translation operator from its action on basis vectors
    T = np.zeros((N, N))
    eye = np.eye(N)
    for c in range(N):
        T[:, c] = translate(eye[:, c], spec).real
    comm = dense @ T - T @ dense
    assert np.abs(comm).max() < 1e-12


def test_named_models(basis4):
    xxz = named_model("xxz", {"J": 2.0, "delta": 0.5}, basis4)
    idx = {lab: i for i, lab in enumerate(basis4.labels)}
    for x in range(4):
        assert xxz.coeffs[idx[(x, 1, 1)]] == 2.0
        assert xxz.coeffs[idx[(x, 2, 2)]] == 2.0
        assert xxz.coeffs[idx[(x, 3, 3)]] == 1.0
        assert xxz.coeffs[idx[(x, 1, 2)]] == 0.0
    heis = named_model("heisenberg", {"J": 2.0}, basis4)
    xxz1 = named_model("xxz", {"J": 2.0, "delta": 1.0}, basis4)
    assert np.array_equal(heis.coeffs, xxz1.coeffs)
    dec = named_model("decoupled", {"h": 1.5, "axis": "z"}, basis4)
    for (anchor, a, b), i in idx.items():
        if a == 0 and b == 3:
            assert dec.coeffs[i] == 1.5
        elif a >= 1 and b >= 1:
            assert dec.coeffs[i] == 0.0
    with pytest.raises(ValueError):
        named_model("ising-3d", {}, basis4)
    with pytest.raises(ValueError):
        named_model("xxz", {"bogus": 1}, basis4)


def test_assemble_dense_matches_oracle(basis4, rng):
    h = random_disordered(basis4, seed=5)
    dense = assemble_dense(h)
    ops, _ = oracles.dense_basis(4, "periodic")
    want = oracles.dense_hamiltonian(h.coeffs, ops)
    assert np.abs(dense - want).max() < 1e-13
    assert np.abs(dense - dense.conj().T).max() < 1e-14


def test_assemble_dense_trivial():
    spec = LatticeSpec(n=3)
    basis = build_local_basis(spec)
    zero = assemble_dense(random_disordered(basis, seed=1, stddev=1.0).__class__(basis, np.zeros(basis.S)))
    assert np.abs(zero).max() == 0.0
    # single coefficient on sigma_z sigma_z
    coeffs = np.zeros(basis.S)
    i = list(basis.labels).index((0, 3, 3))
    coeffs[i] = 1.0
    from corrspec.hamiltonians import LocalHamiltonian

    dense = assemble_dense(LocalHamiltonian(basis, coeffs))
    zz = oracles.site_op(3, 0, oracles.SZ) @ oracles.site_op(3, 1, oracles.SZ)
    assert np.abs(dense - zz).max() < 1e-14


def test_dense_cap_rejected():
    spec = LatticeSpec(n=15)
    basis = build_local_basis(spec)
    h = random_disordered(basis, seed=0)
    with pytest.raises(LatticeError, match="dense cap"):
        assemble_dense(h)


def test_projection_roundtrip(basis4):
    h = random_disordered(basis4, seed=9)
    dense = assemble_dense(h)
    back = project_coefficients(dense, basis4)
    assert np.abs(back - h.coeffs).max() < 1e-13


def test_hs_norm_matches_euclidean():
    spec = LatticeSpec(n=5)
    basis = build_local_basis(spec)
    h = random_disordered(basis, seed=21)
    dense = assemble_dense(h)
    hs_sq = hs_inner(dense, dense)
    assert abs(hs_sq - h.norm**2) < 1e-12 * h.norm**2


def test_coefficient_angle(basis4):
    h = random_disordered(basis4, seed=2)
    from corrspec.hamiltonians import LocalHamiltonian

    h3 = LocalHamiltonian(basis4, 3.0 * h.coeffs)
    hneg = LocalHamiltonian(basis4, -h.coeffs)
    assert coefficient_angle(h, h3) < 1e-15
    assert coefficient_angle(h, hneg) == 0.0
    e0 = np.zeros(basis4.S)
    e0[0] = 1.0
    e1 = np.zeros(basis4.S)
    e1[1] = 1.0
    assert abs(vector_angle(e0, e1) - np.pi / 2) < 1e-14
    with pytest.raises(ValueError):
        vector_angle(e0, np.zeros(basis4.S))


def test_coefficient_file_roundtrip(tmp_path, basis4):
    h = random_disordered(basis4, seed=33, stddev=0.7)
    path = tmp_path / "h.json"
    save_coefficients(h, path)
    back = load_coefficients(path)
    assert back.spec == h.spec
    assert np.array_equal(back.coeffs, h.coeffs)  # exact round trip
    assert back.label == h.label
