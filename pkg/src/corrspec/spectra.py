"""Eigen-decomposition and state utilities.

Dense Hermitian decompositions back everything at desk scale (N <= 2^14);
single-eigenstate queries use LAPACK subset drivers above N=2048 so that
mid-spectrum states of 12-qubit chains stay affordable.  A matrix-free
Lanczos path covers ground states beyond the dense cap.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .basis import LatticeError, LatticeSpec
from .hamiltonians import DENSE_CAP, LocalHamiltonian, assemble_dense

FULL_EIG_CAP = 2048
DEGENERACY_REL_TOL = 1e-10
HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class EigenstateRecord:
    """One eigenpair: unit state vector, energy, spectral index, residual."""

    state: np.ndarray
    energy: float
    index: int
    residual: float
    degenerate: bool = False
    min_gap: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "state", np.asarray(self.state, dtype=complex))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian PSD trace-one matrix on an ordered contiguous site region."""

    region: tuple
    matrix: np.ndarray
    local_dim: int = 2

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = self.local_dim ** len(self.region)
        if m.shape != (d, d):
            raise LatticeError(f"density matrix shape {m.shape} != ({d}, {d})")
        if np.abs(m - m.conj().T).max() > 1e-12 * max(1.0, np.abs(m).max()):
            raise LatticeError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-12:
            raise LatticeError(f"density matrix trace {tr} != 1")
        # full PSD certification is O(d^3); above this size consumers clip
        # the tiny negative tails themselves
        if d <= 512 and np.linalg.eigvalsh(m).min() < -1e-12:
            raise LatticeError("density matrix has negative eigenvalues")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "region", tuple(int(s) for s in self.region))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


def _check_hermitian(mat: np.ndarray) -> np.ndarray:
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise LatticeError(f"expected a square matrix, got shape {mat.shape}")
    scale = max(1.0, np.abs(mat).max())
    if np.abs(mat - mat.conj().T).max() > HERMITICITY_TOL * scale:
        raise LatticeError("matrix is not Hermitian to 1e-12")
    return mat


def eig_hermitian(mat: np.ndarray):
    """Full ascending eigen-decomposition of a Hermitian matrix.

    Returns (eigenvalues, eigenvectors) with orthonormal columns.
    """
    mat = _check_hermitian(mat)
    vals, vecs = np.linalg.eigh(mat)
    return vals, vecs


def fix_phase(state: np.ndarray) -> np.ndarray:
    """Make the first non-negligible amplitude real positive (reproducible sign)."""
    state = np.asarray(state, dtype=complex)
    mags = np.abs(state)
    i = int(np.argmax(mags > 1e-12 * mags.max()))
    ph = state[i] / abs(state[i])
    return state * ph.conjugate()


def _record_from(ham, vals_window, vecs_window, pos_in_window, index, spread):
    state = fix_phase(vecs_window[:, pos_in_window])
    state = state / np.linalg.norm(state)
    energy = float(vals_window[pos_in_window])
    hv = ham.apply(state)
    residual = float(np.linalg.norm(hv - energy * state))
    gaps = []
    if pos_in_window > 0:
        gaps.append(vals_window[pos_in_window] - vals_window[pos_in_window - 1])
    if pos_in_window + 1 < len(vals_window):
        gaps.append(vals_window[pos_in_window + 1] - vals_window[pos_in_window])
    min_gap = float(min(gaps)) if gaps else float("inf")
    degenerate = bool(min_gap < DEGENERACY_REL_TOL * spread)
    return EigenstateRecord(
        state=state,
        energy=energy,
        index=int(index),
        residual=residual,
        degenerate=degenerate,
        min_gap=min_gap,
    )


def _spectral_spread(ham: LocalHamiltonian) -> float:
    """E_max - E_min via matrix-free Lanczos (deterministic start vector)."""
    N = ham.spec.N
    v0 = np.full(N, 1.0 / np.sqrt(N))
    op = scipy.sparse.linalg.LinearOperator(
        (N, N), matvec=lambda x: ham.apply(x), dtype=complex
    )
    lo = scipy.sparse.linalg.eigsh(op, k=1, which="SA", v0=v0, return_eigenvectors=False)
    hi = scipy.sparse.linalg.eigsh(op, k=1, which="LA", v0=v0, return_eigenvectors=False)
    return float(hi[0] - lo[0])


def ith_eigenstate(ham: LocalHamiltonian, i: int, cap: int = DENSE_CAP) -> EigenstateRecord:
    """The i'th eigenstate (ascending), with residual and degeneracy flag.

    Degeneracy (min neighbor gap < 1e-10 * spectral spread) is a warning
    flag on the record, not an error: degenerate eigenstates are not unique.
    """
    N = ham.spec.N
    if not 0 <= i < N:
        raise IndexError(f"eigenstate index {i} outside [0, {N})")
    if N > cap:
        raise LatticeError(f"N={N} exceeds the dense cap {cap}")
    dense = assemble_dense(ham, cap=cap)
    if N <= FULL_EIG_CAP:
        vals, vecs = np.linalg.eigh(dense)
        spread = float(vals[-1] - vals[0])
        return _record_from(ham, vals, vecs, i, i, spread)
    lo, hi = max(0, i - 1), min(N - 1, i + 1)
    vals, vecs = scipy.linalg.eigh(dense, subset_by_index=[lo, hi], driver="evr")
    spread = _spectral_spread(ham)
    return _record_from(ham, vals, vecs, i - lo, i, spread)


def eigenstates(ham: LocalHamiltonian, indices, cap: int = DENSE_CAP):
    """Several eigenstates from one dense decomposition."""
    N = ham.spec.N
    if N > cap:
        raise LatticeError(f"N={N} exceeds the dense cap {cap}")
    dense = assemble_dense(ham, cap=cap)
    vals, vecs = np.linalg.eigh(dense)
    spread = float(vals[-1] - vals[0])
    out = []
    for i in indices:
        if not 0 <= i < N:
            raise IndexError(f"eigenstate index {i} outside [0, {N})")
        out.append(_record_from(ham, vals, vecs, i, i, spread))
    return out


def ground_state(ham: LocalHamiltonian, tol: float = 0.0) -> EigenstateRecord:
    """Ground state via restarted Krylov iteration; works past the dense cap."""
    N = ham.spec.N
    v0 = np.full(N, 1.0 / np.sqrt(N))
    op = scipy.sparse.linalg.LinearOperator(
        (N, N), matvec=lambda x: ham.apply(x), dtype=complex
    )
    vals, vecs = scipy.sparse.linalg.eigsh(op, k=2, which="SA", v0=v0, tol=tol)
    order = np.argsort(vals)
    vals = vals[order]
    vecs = vecs[:, order]
    spread = _spectral_spread(ham)
    return _record_from(ham, vals, vecs, 0, 0, spread)


def reduce_state(state, region, spec: LatticeSpec | None = None) -> DensityMatrix:
    """Partial trace of a pure state onto a contiguous region.

    Region sites are relabelled 0..m-1 (region[0] becomes local site 0), so
    operators built on an m-site lattice act on the result directly.
    """
    if isinstance(state, EigenstateRecord):
        vec = state.state
    else:
        vec = np.asarray(state, dtype=complex)
    region = [int(s) for s in region]
    if sorted(region) != list(range(region[0], region[0] + len(region))):
        raise LatticeError(f"region {region} is not contiguous ascending")
    if spec is None:
        n = int(round(np.log2(vec.shape[0])))
        d = 2
    else:
        n, d = spec.n, spec.local_dim
    if d ** n != vec.shape[0]:
        raise LatticeError(f"state length {vec.shape[0]} != {d}^{n}")
    if not all(0 <= s < n for s in region):
        raise LatticeError(f"region {region} outside chain of {n} sites")
    m = len(region)
    tensor = vec.reshape((d,) * n)
    # axis of site s is n-1-s; order axes so local site 0 is least significant
    axes = [n - 1 - s for s in reversed(region)]
    moved = np.moveaxis(tensor, axes, range(m))
    psi = moved.reshape(d ** m, -1)
    rho = psi @ psi.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(region=tuple(region), matrix=rho, local_dim=d)


def reduce_density_matrix(rho: DensityMatrix, region, spec: LatticeSpec | None = None) -> DensityMatrix:
    """Partial trace of a mixed state onto a contiguous sub-region."""
    region = [int(s) for s in region]
    if sorted(region) != list(range(region[0], region[0] + len(region))):
        raise LatticeError(f"region {region} is not contiguous ascending")
    d = rho.local_dim
    n = len(rho.region)
    if not all(s in rho.region for s in region):
        raise LatticeError(f"region {region} not inside {rho.region}")
    base = rho.region[0]
    local = [s - base for s in region]
    m = len(local)
    tensor = rho.matrix.reshape((d,) * (2 * n))
    row_axes = [n - 1 - s for s in reversed(local)]
    col_axes = [2 * n - 1 - s for s in reversed(local)]
    moved = np.moveaxis(tensor, row_axes + col_axes, list(range(m)) + list(range(n, n + m)))
    moved = moved.reshape(d**m, d ** (n - m), d**m, d ** (n - m))
    out = np.einsum("arbr->ab", moved)
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(region=tuple(region), matrix=out, local_dim=d)


def gibbs_state(ham: LocalHamiltonian, beta: float, cap: int = DENSE_CAP) -> DensityMatrix:
    """Full-system thermal state exp(-beta H) / Z via eigen-decomposition."""
    if not np.isfinite(beta):
        raise ValueError(f"beta must be finite, got {beta}")
    N = ham.spec.N
    if N > cap:
        raise LatticeError(f"N={N} exceeds the dense cap {cap}")
    vals, vecs = np.linalg.eigh(assemble_dense(ham, cap=cap))
    w = np.exp(-beta * (vals - vals.min()))
    w /= w.sum()
    rho = (vecs * w) @ vecs.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(region=tuple(range(ham.spec.n)), matrix=rho, local_dim=ham.spec.local_dim)


# ---------------------------------------------------------------------------
# binary serialization: little-endian payload behind a one-line JSON header
# ---------------------------------------------------------------------------

_MAGIC = b"CSPB1\n"


def _write_binary(path, header: dict, payload: np.ndarray) -> None:
    data = np.ascontiguousarray(payload)
    header = dict(header)
    header["dtype"] = str(data.dtype)
    header["shape"] = list(data.shape)
    header["endian"] = "little"
    raw = data.astype(data.dtype.newbyteorder("<"), copy=False).tobytes()
    head = json.dumps(header, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(head)))
        fh.write(head)
        fh.write(raw)


def _read_binary(path):
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise ValueError(f"{path} is not a corrspec binary file")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode())
        raw = fh.read()
    dtype = np.dtype(header["dtype"]).newbyteorder("<")
    arr = np.frombuffer(raw, dtype=dtype).reshape(header["shape"])
    return header, arr.astype(dtype.newbyteorder("="))


def save_state(path, state: np.ndarray, spec: LatticeSpec) -> None:
    _write_binary(
        path,
        {"kind": "state", "n": spec.n, "local_dim": spec.local_dim, "region": list(range(spec.n))},
        np.asarray(state, dtype=complex),
    )


def load_state(path):
    header, arr = _read_binary(path)
    if header.get("kind") != "state":
        raise ValueError(f"{path} does not hold a state vector")
    return header, arr


def save_density_matrix(path, rho: DensityMatrix) -> None:
    _write_binary(
        path,
        {"kind": "density_matrix", "local_dim": rho.local_dim, "region": list(rho.region)},
        rho.matrix,
    )


def load_density_matrix(path) -> DensityMatrix:
    header, arr = _read_binary(path)
    if header.get("kind") != "density_matrix":
        raise ValueError(f"{path} does not hold a density matrix")
    return DensityMatrix(region=tuple(header["region"]), matrix=arr, local_dim=int(header["local_dim"]))
