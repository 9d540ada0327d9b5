"""Correlation matrices of local observables and their spectra.

The pure-state matrix holds connected two-point correlations
M_ij = (1/2)<{L_i,L_j}> - <L_i><L_j>; its kernel is the space of traceless
local Hamiltonians with the state as an eigenstate.  Mixed-state and
commutator variants share the same Gram-matrix skeleton: factor the source
(state columns, density-matrix square root, or commutators), then one
symmetric rank-reveal via eigh.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .basis import LatticeError, LocalBasis, PauliString
from .hamiltonians import DENSE_CAP, LocalHamiltonian
from .spectra import DensityMatrix, EigenstateRecord

DEFAULT_ZERO_TOL = 1e-8
#: streaming kicks in when S * dim * ncols exceeds this many complex entries
CACHE_BUDGET = 2**24
_FLUCT_FLOOR = 1e-30

VARIANTS = ("anticommutator", "rho_commutator", "h_commutator")


@dataclass(frozen=True)
class CorrelationMatrix:
    """Real symmetric S x S matrix over a LocalBasis, tagged with provenance."""

    basis: LocalBasis
    entries: np.ndarray
    variant: str = "anticommutator"
    source_id: str = ""

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        S = self.basis.S
        if m.shape != (S, S):
            raise LatticeError(f"entries shape {m.shape} != ({S}, {S})")
        scale = max(1.0, np.abs(m).max())
        if np.abs(m - m.T).max() > 1e-12 * scale:
            raise LatticeError("correlation matrix is not symmetric to 1e-12")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def S(self) -> int:
        return self.basis.S


@dataclass(frozen=True)
class CorrelationSpectrum:
    """Ascending eigenvalues with eigen-operators (columns) and kernel count."""

    eigenvalues: np.ndarray
    eigen_operators: np.ndarray
    zero_tolerance: float
    kernel_dim: int

    def operator(self, i: int) -> np.ndarray:
        return self.eigen_operators[:, i]


def _state_vector(state) -> np.ndarray:
    if isinstance(state, EigenstateRecord):
        return state.state
    return np.asarray(state, dtype=complex)


def _gram_moments(basis: LocalBasis, columns: np.ndarray, budget: int = CACHE_BUDGET):
    """Gram matrix G_ij = Re<L_i Psi, L_j Psi> and t_i = Re<Psi, L_i Psi>.

    ``columns`` is a (dim, r) factor of the source (a unit state vector for
    pure states, V sqrt(p) for density matrices).  Falls back to chunked
    evaluation when the cached stack of applied operators would exceed the
    budget; both paths agree to 1e-12.
    """
    S = basis.S
    dim, r = columns.shape
    flat = columns.reshape(-1)
    if S * dim * r <= budget:
        stack = np.empty((S, dim * r), dtype=complex)
        for i in range(S):
            stack[i] = basis.apply_op(i, columns).reshape(-1)
        gram = (stack.conj() @ stack.T).real
        t = (stack.conj() @ flat).real
        return 0.5 * (gram + gram.T), t
    chunk = max(1, budget // (2 * dim * r))
    gram = np.empty((S, S))
    t = np.empty(S)
    blocks = [(s, min(s + chunk, S)) for s in range(0, S, chunk)]
    for bi, (i0, i1) in enumerate(blocks):
        left = np.empty((i1 - i0, dim * r), dtype=complex)
        for i in range(i0, i1):
            left[i - i0] = basis.apply_op(i, columns).reshape(-1)
        t[i0:i1] = (left.conj() @ flat).real
        for j0, j1 in blocks[bi:]:
            if j0 == i0:
                right = left
            else:
                right = np.empty((j1 - j0, dim * r), dtype=complex)
                for j in range(j0, j1):
                    right[j - j0] = basis.apply_op(j, columns).reshape(-1)
            block = (left.conj() @ right.T).real
            gram[i0:i1, j0:j1] = block
            gram[j0:j1, i0:i1] = block.T
    return 0.5 * (gram + gram.T), t


def expectation(basis: LocalBasis, coeffs: np.ndarray, state) -> float:
    """<v| O |v> for O = sum_i coeffs[i] L_i, evaluated matrix-free."""
    v = _state_vector(state)
    if v.shape[0] != basis.spec.N:
        raise LatticeError(f"state length {v.shape[0]} != {basis.spec.N}")
    ov = basis.apply_sum(coeffs, v)
    val = np.vdot(v, ov)
    return float(val.real)


def state_fluctuation(basis: LocalBasis, coeffs: np.ndarray, state) -> float:
    """<O^2> - <O>^2 evaluated as |Ov - <O>v|^2 (exactly nonnegative).

    This is the squared component of Ov orthogonal to v, so it vanishes to
    (residual)^2 when v is an eigenstate of O -- far below what the
    cancellation-prone <O^2> - <O>^2 evaluation could resolve.
    """
    v = _state_vector(state)
    ov = basis.apply_sum(coeffs, v)
    mean = np.vdot(v, ov)
    perp = ov - mean * v
    return float(np.vdot(perp, perp).real)


def fluctuation(coeffs: np.ndarray, mat: CorrelationMatrix) -> float:
    """Quadratic form w^T M w: the variance of O = sum_i w_i L_i in the source state."""
    w = np.asarray(coeffs, dtype=float)
    return float(w @ mat.entries @ w)


def build_pure(state, basis: LocalBasis, source_id: str = "", budget: int = CACHE_BUDGET) -> CorrelationMatrix:
    """Connected-correlation matrix of a normalized pure state."""
    v = _state_vector(state)
    if v.shape[0] != basis.spec.N:
        raise LatticeError(f"state length {v.shape[0]} != {basis.spec.N}")
    nrm = np.linalg.norm(v)
    if abs(nrm - 1.0) > 1e-10:
        raise LatticeError(f"state is not normalized: |v| = {nrm}")
    gram, t = _gram_moments(basis, v[:, None], budget=budget)
    entries = gram - np.outer(t, t)
    return CorrelationMatrix(basis=basis, entries=entries, variant="anticommutator", source_id=source_id)


def _region_local_basis(rho: DensityMatrix, basis: LocalBasis) -> LocalBasis:
    """Map a basis onto rho's region, rejecting operators outside it.

    Accepts either a basis already built on a lattice of the region's size
    (used as-is) or a full-system basis whose operators all fit inside the
    region (sites are shifted to region-local labels).
    """
    m = len(rho.region)
    if basis.spec.n == m and basis.spec.local_dim == rho.local_dim:
        return basis
    if basis.spec.local_dim != rho.local_dim:
        raise LatticeError("local dimension mismatch between basis and density matrix")
    region = set(rho.region)
    offset = rho.region[0]
    ops = []
    labels = []
    from .basis import LatticeSpec, LocalOp  # local import to avoid cycle noise

    sub_spec = LatticeSpec(n=m, local_dim=rho.local_dim, k=basis.spec.k, boundary="open")
    for op, lab in zip(basis.ops, basis.labels):
        if not set(op.support) <= region:
            raise LatticeError(
                f"basis operator with label {lab} acts outside region {rho.region}"
            )
        if isinstance(op, PauliString):
            letters = tuple((s - offset, a) for s, a in op.letters)
            ops.append(PauliString(n=m, letters=letters, phase=op.phase))
        else:
            sites = tuple(s - offset for s in op.sites)
            ops.append(LocalOp(n=m, local_dim=op.local_dim, sites=sites, window=op.window))
        labels.append(lab)
    return LocalBasis(spec=sub_spec, ops=tuple(ops), labels=tuple(labels))


def _rho_factor(rho: DensityMatrix) -> np.ndarray:
    vals, vecs = np.linalg.eigh(rho.matrix)
    vals = np.clip(vals, 0.0, None)
    keep = vals > 1e-16
    return vecs[:, keep] * np.sqrt(vals[keep])


def build_mixed_expectation(rho: DensityMatrix, basis: LocalBasis, source_id: str = "") -> CorrelationMatrix:
    """M_ij = (1/2)Tr(rho {L_i, L_j}) - Tr(rho L_i) Tr(rho L_j)."""
    local = _region_local_basis(rho, basis)
    cols = _rho_factor(rho)
    gram, t = _gram_moments(local, cols)
    entries = gram - np.outer(t, t)
    return CorrelationMatrix(basis=basis, entries=entries, variant="anticommutator", source_id=source_id)


def build_rho_commutator(rho: DensityMatrix, basis: LocalBasis, source_id: str = "") -> CorrelationMatrix:
    """Gram matrix of commutators: (1/2)Tr([rho, L_i]^dag [rho, L_j]).

    The kernel contains every local operator commuting with rho; for a Gibbs
    state of a local Hamiltonian that is generically the Hamiltonian itself.
    """
    local = _region_local_basis(rho, basis)
    d = rho.dim
    S = local.S
    eye = np.eye(d, dtype=complex)
    chunk = max(1, CACHE_BUDGET // (2 * d * d))
    entries = np.empty((S, S))
    blocks = [(s, min(s + chunk, S)) for s in range(0, S, chunk)]

    def comms(i0, i1):
        out = np.empty((i1 - i0, d * d), dtype=complex)
        for i in range(i0, i1):
            dense_i = local.apply_op(i, eye)
            out[i - i0] = (rho.matrix @ dense_i - dense_i @ rho.matrix).reshape(-1)
        return out

    for bi, (i0, i1) in enumerate(blocks):
        left = comms(i0, i1)
        for j0, j1 in blocks[bi:]:
            right = left if j0 == i0 else comms(j0, j1)
            block = 0.5 * (left.conj() @ right.T).real
            entries[i0:i1, j0:j1] = block
            entries[j0:j1, i0:i1] = block.T
    entries = 0.5 * (entries + entries.T)
    return CorrelationMatrix(basis=basis, entries=entries, variant="rho_commutator", source_id=source_id)


def build_h_commutator(ham: LocalHamiltonian, basis: LocalBasis | None = None, source_id: str = "") -> CorrelationMatrix:
    """Gram matrix of Heisenberg derivatives: (1/2N)Tr([H, L_i]^dag [H, L_j]).

    For qubit chains the commutators are expanded symbolically in Pauli
    strings, so no dense matrix is formed; the kernel consists of the local
    operators commuting with H.
    """
    basis = basis if basis is not None else ham.basis
    if basis.spec != ham.basis.spec:
        raise LatticeError("basis and Hamiltonian live on different lattices")
    if basis.spec.local_dim == 2:
        derivs = []
        for op in basis.ops:
            acc: dict = {}
            for c, term in zip(ham.coeffs, ham.basis.ops):
                if c == 0.0:
                    continue
                prod = term * op
                back = op * term
                # [term, op] = prod - back; strings are equal up to phase
                coeff = c * (prod.phase - back.phase)
                if coeff != 0:
                    key = prod.letters
                    acc[key] = acc.get(key, 0.0) + coeff
            derivs.append({k: v for k, v in acc.items() if v != 0.0})
        S = basis.S
        entries = np.zeros((S, S))
        for i in range(S):
            di = derivs[i]
            for j in range(i, S):
                dj = derivs[j]
                if len(di) <= len(dj):
                    val = sum(np.conjugate(a) * dj[key] for key, a in di.items() if key in dj)
                else:
                    val = sum(np.conjugate(di[key]) * b for key, b in dj.items() if key in di)
                entries[i, j] = entries[j, i] = 0.5 * complex(val).real
        return CorrelationMatrix(basis=basis, entries=entries, variant="h_commutator", source_id=source_id)
    # generic dense fallback for qudits
    dense_h = ham.dense()
    N = basis.spec.N
    S = basis.S
    comms = np.empty((S, N * N), dtype=complex)
    eye = np.eye(N, dtype=complex)
    for i, op in enumerate(basis.ops):
        dense_i = op.apply(eye)
        comms[i] = (dense_h @ dense_i - dense_i @ dense_h).reshape(-1)
    entries = 0.5 * (comms.conj() @ comms.T).real / N
    entries = 0.5 * (entries + entries.T)
    return CorrelationMatrix(basis=basis, entries=entries, variant="h_commutator", source_id=source_id)


def correlation_spectrum(mat: CorrelationMatrix, zero_tolerance: float = DEFAULT_ZERO_TOL) -> CorrelationSpectrum:
    """Ascending eigenvalues and eigen-operators; kernel counted below tol * lambda_max.

    lambda_1 is reported raw (possibly slightly negative), never floored.
    """
    vals, vecs = np.linalg.eigh(mat.entries)
    thresh = zero_tolerance * vals[-1]
    kernel_dim = int(np.sum(vals < thresh))
    return CorrelationSpectrum(
        eigenvalues=vals,
        eigen_operators=vecs,
        zero_tolerance=zero_tolerance,
        kernel_dim=kernel_dim,
    )


@dataclass(frozen=True)
class FluctuationDecomposition:
    total: float
    per_region: tuple
    ratio: float


def region_fluctuation_decomposition(state, ham: LocalHamiltonian, partition) -> FluctuationDecomposition:
    """Total fluctuation of O = sum_A O_A versus the per-region sum.

    Terms are assigned to regions by anchor site; the partition must cover
    all sites disjointly.  For an exact eigenstate with O = H the total
    vanishes while the per-region sum stays finite (long-range energy
    correlations cannot all decay).
    """
    basis = ham.basis
    n = basis.spec.n
    regions = [tuple(int(s) for s in r) for r in partition]
    seen: set = set()
    for r in regions:
        if sorted(r) != list(range(r[0], r[0] + len(r))):
            raise LatticeError(f"region {r} is not contiguous")
        if seen & set(r):
            raise LatticeError("partition regions overlap")
        seen |= set(r)
    if seen != set(range(n)):
        raise LatticeError("partition does not cover every site exactly once")
    v = _state_vector(state)
    total = state_fluctuation(basis, ham.coeffs, v)
    per_region = []
    anchors = basis.anchors
    for r in regions:
        mask = np.isin(anchors, r)
        per_region.append(state_fluctuation(basis, np.where(mask, ham.coeffs, 0.0), v))
    ratio = float(sum(per_region) / max(total, _FLUCT_FLOOR))
    return FluctuationDecomposition(total=total, per_region=tuple(per_region), ratio=ratio)
