"""Local Hamiltonians as coefficient vectors over a LocalBasis.

A Hamiltonian is a real vector c of length S; by orthonormality of the basis
its Hilbert-Schmidt norm equals |c|_2.  Ensembles draw i.i.d. Gaussian
couplings; named models (tfim, xxz, heisenberg, decoupled) fill specific
labels.  All randomness flows through numpy Generators seeded explicitly, so
identical (spec, seed, stddev) reproduce coefficient vectors bit-for-bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .basis import LatticeError, LatticeSpec, LocalBasis, build_local_basis

DENSE_CAP = 2**14


def _as_basis(spec_or_basis) -> LocalBasis:
    if isinstance(spec_or_basis, LocalBasis):
        return spec_or_basis
    if isinstance(spec_or_basis, LatticeSpec):
        return build_local_basis(spec_or_basis)
    raise TypeError(f"expected LatticeSpec or LocalBasis, got {type(spec_or_basis)}")


@dataclass(frozen=True)
class LocalHamiltonian:
    """Coefficient vector over a LocalBasis, with provenance label."""

    basis: LocalBasis
    coeffs: np.ndarray
    label: str = ""

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.float64)
        if c.shape != (self.basis.S,):
            raise LatticeError(f"coefficient vector length {c.shape} != basis size {self.basis.S}")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def spec(self) -> LatticeSpec:
        return self.basis.spec

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """Matrix-free H @ psi."""
        return self.basis.apply_sum(self.coeffs, psi)

    def dense(self, cap: int = DENSE_CAP) -> np.ndarray:
        return assemble_dense(self, cap=cap)


def random_disordered(spec_or_basis, seed: int, stddev: float = 1.0) -> LocalHamiltonian:
    """Every coefficient i.i.d. Gaussian(0, stddev^2) from a seeded generator."""
    if stddev <= 0:
        raise ValueError(f"stddev must be positive, got {stddev}")
    basis = _as_basis(spec_or_basis)
    rng = np.random.default_rng(seed)
    coeffs = rng.normal(0.0, stddev, size=basis.S)
    return LocalHamiltonian(basis, coeffs, label=f"disordered(seed={seed},stddev={stddev})")


def random_translation_invariant(spec_or_basis, seed: int, stddev: float = 1.0) -> LocalHamiltonian:
    """Draw one per-anchor coefficient block and replicate it across anchors."""
    if stddev <= 0:
        raise ValueError(f"stddev must be positive, got {stddev}")
    basis = _as_basis(spec_or_basis)
    if basis.spec.boundary != "periodic":
        raise LatticeError("translation invariance is undefined on open chains")
    per = basis.per_anchor
    rng = np.random.default_rng(seed)
    block = rng.normal(0.0, stddev, size=per)
    coeffs = np.tile(block, basis.spec.n)
    return LocalHamiltonian(basis, coeffs, label=f"ti(seed={seed},stddev={stddev})")


def ti_block(ham: LocalHamiltonian) -> np.ndarray:
    """The per-anchor coefficient block of a translation-invariant Hamiltonian."""
    per = ham.basis.per_anchor
    blocks = ham.coeffs.reshape(ham.basis.spec.n, per)
    if not np.allclose(blocks, blocks[0], atol=1e-12):
        raise LatticeError("coefficients are not translation-invariant")
    return blocks[0].copy()


def _singlesite_labels(basis: LocalBasis, axis: int):
    """Indices of basis ops that are a single sigma_axis on one site."""
    out = []
    for i, op in enumerate(basis.ops):
        if len(op.letters) == 1 and op.letters[0][1] == axis:
            out.append(i)
    return out


def _bond_labels(basis: LocalBasis, a: int, b: int):
    """Indices of ops sigma_a^x sigma_b^{x+1} (two-site products only)."""
    out = []
    for i, (anchor, *letters) in enumerate(basis.labels):
        if tuple(letters) == (a, b) and a != 0 and b != 0:
            out.append(i)
    return out


def named_model(name: str, params: dict | None, spec_or_basis) -> LocalHamiltonian:
    """Standard models: tfim(J,h), xxz(J,delta), heisenberg(J), decoupled(h,axis)."""
    params = dict(params or {})
    basis = _as_basis(spec_or_basis)
    if basis.spec.local_dim != 2:
        raise LatticeError("named models are defined for qubit chains")
    coeffs = np.zeros(basis.S)
    if name == "xxz" or name == "heisenberg":
        J = float(params.pop("J", 1.0))
        delta = 1.0 if name == "heisenberg" else float(params.pop("delta", 1.0))
        for i in _bond_labels(basis, 1, 1):
            coeffs[i] = J
        for i in _bond_labels(basis, 2, 2):
            coeffs[i] = J
        for i in _bond_labels(basis, 3, 3):
            coeffs[i] = J * delta
        label = f"{name}(J={J},delta={delta})"
    elif name == "tfim":
        J = float(params.pop("J", 1.0))
        h = float(params.pop("h", 1.0))
        for i in _bond_labels(basis, 1, 1):
            coeffs[i] = J
        for i in _singlesite_labels(basis, 3):
            coeffs[i] = h
        label = f"tfim(J={J},h={h})"
    elif name == "decoupled":
        h = float(params.pop("h", 1.0))
        axis = {"x": 1, "y": 2, "z": 3}.get(str(params.pop("axis", "z")))
        if axis is None:
            raise ValueError("decoupled axis must be one of x, y, z")
        for i in _singlesite_labels(basis, axis):
            coeffs[i] = h
        label = f"decoupled(h={h},axis={'xyz'[axis - 1]})"
    else:
        raise ValueError(f"unknown model name {name!r}")
    if params:
        raise ValueError(f"unused parameters for model {name!r}: {sorted(params)}")
    return LocalHamiltonian(basis, coeffs, label=label)


def assemble_dense(ham: LocalHamiltonian, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense N x N matrix sum_i c_i L_i; rejected above the dense cap."""
    spec = ham.basis.spec
    if spec.N > cap:
        raise LatticeError(
            f"N={spec.N} exceeds the dense cap {cap}; use LocalHamiltonian.apply "
            "(matrix-free) or raise the cap explicitly"
        )
    N = spec.N
    out = np.zeros((N, N), dtype=complex)
    if spec.local_dim == 2:
        idx = np.arange(N, dtype=np.int64)
        for c, op in zip(ham.coeffs, ham.basis.ops):
            if c == 0.0:
                continue
            xflip, smask, pref = op._masks
            signs = 1.0 - 2.0 * (_popcount_parity(idx & smask))
            out[idx ^ xflip, idx] += (c * pref) * signs
    else:
        for c, op in zip(ham.coeffs, ham.basis.ops):
            if c != 0.0:
                out += c * op.dense()
    return out


def _popcount_parity(x):
    x = x.copy()
    x ^= x >> 32
    x ^= x >> 16
    x ^= x >> 8
    x ^= x >> 4
    x ^= x >> 2
    x ^= x >> 1
    return (x & 1).astype(np.float64)


def project_coefficients(mat: np.ndarray, basis: LocalBasis) -> np.ndarray:
    """hs_inner projection of a dense operator onto every basis element."""
    N = basis.spec.N
    if mat.shape != (N, N):
        raise LatticeError(f"matrix shape {mat.shape} != ({N}, {N})")
    out = np.empty(basis.S)
    for i, op in enumerate(basis.ops):
        action = op.apply(mat)  # L_i @ mat columns... careful: op acts from the left
        out[i] = np.trace(action).real / N
    return out


def vector_angle(u: np.ndarray, v: np.ndarray) -> float:
    """arccos |<u_hat, v_hat>| in [0, pi/2]; identifies c and -c.

    Evaluated as atan2(|v_perp|, |<u,v>|), which resolves angles all the way
    down to machine precision (plain arccos floors out near 1e-8).
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("angle undefined for zero vectors")
    u = u / nu
    v = v / nv
    ov = float(u @ v)
    if ov < 0:
        v = -v
        ov = -ov
    perp = v - ov * u
    return float(np.arctan2(np.linalg.norm(perp), ov))


def coefficient_angle(h1: LocalHamiltonian, h2: LocalHamiltonian) -> float:
    """Angle between coefficient vectors; scale- and sign-invariant."""
    if h1.basis != h2.basis:
        raise LatticeError("Hamiltonians live on different bases")
    return vector_angle(h1.coeffs, h2.coeffs)


def save_coefficients(ham: LocalHamiltonian, path) -> None:
    """Structured-text coefficient file; round-trips float64 exactly (17 sig digits)."""
    payload = {
        "schema_version": 1,
        "kind": "coefficients",
        "spec": ham.spec.to_dict(),
        "label": ham.label,
        "coeffs": [format(float(c), ".17g") for c in ham.coeffs],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_coefficients(path, basis: LocalBasis | None = None) -> LocalHamiltonian:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("kind") != "coefficients" or payload.get("schema_version") != 1:
        raise ValueError(f"{path} is not a v1 coefficient file")
    spec = LatticeSpec.from_dict(payload["spec"])
    if basis is None:
        basis = build_local_basis(spec)
    elif basis.spec != spec:
        raise LatticeError("provided basis does not match the file header")
    coeffs = np.array([float(c) for c in payload["coeffs"]])
    return LocalHamiltonian(basis, coeffs, label=payload.get("label", ""))
