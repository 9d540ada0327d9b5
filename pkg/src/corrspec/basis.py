"""Pauli-string algebra and the orthonormal basis of range-k local operators.

The local-operator space is spanned by Hermitian products of single-site
operators supported on k contiguous sites.  For qubits these are Pauli
strings; for larger local dimension, tensor products of generalized
Gell-Mann matrices are used (dense window matrices, slower generic path).

Basis bookkeeping convention: a string is assigned to the anchor whose
window [x, x+k-1] has the string's rightmost non-identity letter at site
x+k-1.  On a periodic chain every string of width <= k then appears exactly
once, giving 3*4^(k-1) operators per anchor (12n total for qubits at k=2,
matching the familiar sigma_a^x sigma_b^{x+1} parametrization with
a in 0..3, b in 1..3).  On an open chain the strings living entirely on
sites 0..k-2 have no such window; they are attached to anchor 0, giving
S = 12n - 9 for qubits at k=2.  Ordering is anchor-major, then lexicographic
in the window letter tuple; coefficient vectors are portable across runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

import numpy as np

from . import kernels

PAULI_LETTERS = "IXYZ"

_PAULI_DENSE = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

# sigma_a sigma_b = _PROD_PHASE[a][b] * sigma_{_PROD_LETTER[a][b]}
_PROD_LETTER = (
    (0, 1, 2, 3),
    (1, 0, 3, 2),
    (2, 3, 0, 1),
    (3, 2, 1, 0),
)
_PROD_PHASE = (
    (1, 1, 1, 1),
    (1, 1, 1j, -1j),
    (1, -1j, 1, 1j),
    (1, 1j, -1j, 1),
)

_ALLOWED_PHASES = (1 + 0j, -1 + 0j, 1j, -1j)


class LatticeError(ValueError):
    """Invalid lattice geometry or operator/state dimension mismatch."""


@dataclass(frozen=True)
class LatticeSpec:
    """1D chain geometry: site count, local dimension, range, boundary."""

    n: int
    local_dim: int = 2
    k: int = 2
    boundary: str = "periodic"

    def __post_init__(self):
        if self.n < 2:
            raise LatticeError(f"need at least 2 sites, got n={self.n}")
        if self.local_dim < 2:
            raise LatticeError(f"local_dim must be >= 2, got {self.local_dim}")
        if self.k < 1 or self.k > self.n:
            raise LatticeError(f"interaction range k={self.k} must satisfy 1 <= k <= n={self.n}")
        if self.boundary not in ("periodic", "open"):
            raise LatticeError(f"boundary must be 'periodic' or 'open', got {self.boundary!r}")
        if self.boundary == "periodic" and self.n < max(3, 2 * self.k - 1):
            # windows wrap onto themselves below this, double-counting strings
            raise LatticeError(
                f"periodic chains need n >= {max(3, 2 * self.k - 1)} for range k={self.k} "
                "to avoid double-counted bonds"
            )

    @property
    def N(self) -> int:
        return self.local_dim**self.n

    def to_dict(self) -> dict:
        return {"n": self.n, "local_dim": self.local_dim, "k": self.k, "boundary": self.boundary}

    @classmethod
    def from_dict(cls, d: dict) -> "LatticeSpec":
        return cls(n=int(d["n"]), local_dim=int(d["local_dim"]), k=int(d["k"]), boundary=str(d["boundary"]))


@dataclass(frozen=True)
class PauliString:
    """A phased product of single-site Pauli operators on an n-site chain.

    ``letters`` maps site -> letter index (1=X, 2=Y, 3=Z); identity sites are
    omitted.  ``phase`` is restricted to {1, -1, i, -i}; the string is
    Hermitian iff the phase is real.
    """

    n: int
    letters: tuple  # sorted ((site, letter), ...) with letter in 1..3
    phase: complex = 1 + 0j

    def __post_init__(self):
        if self.phase not in _ALLOWED_PHASES:
            raise ValueError(f"phase must be one of +-1, +-i, got {self.phase}")
        sites = [s for s, _ in self.letters]
        if sites != sorted(set(sites)):
            raise ValueError("letters must be sorted by site without repeats")
        for s, a in self.letters:
            if not (0 <= s < self.n):
                raise ValueError(f"site {s} outside chain of {self.n} sites")
            if a not in (1, 2, 3):
                raise ValueError(f"letter index must be 1..3, got {a}")

    @classmethod
    def from_label(cls, n: int, label: str, phase: complex = 1 + 0j) -> "PauliString":
        """Build from a string like 'XIZY' (site 0 first)."""
        if len(label) != n:
            raise ValueError("label length must equal n")
        letters = tuple((s, PAULI_LETTERS.index(c)) for s, c in enumerate(label) if c != "I")
        return cls(n=n, letters=letters, phase=phase)

    def label(self) -> str:
        out = ["I"] * self.n
        for s, a in self.letters:
            out[s] = PAULI_LETTERS[a]
        return "".join(out)

    @property
    def support(self) -> tuple:
        return tuple(s for s, _ in self.letters)

    @property
    def is_identity(self) -> bool:
        return not self.letters

    @property
    def is_hermitian(self) -> bool:
        return self.phase.imag == 0.0

    @cached_property
    def _masks(self):
        xflip = 0
        smask = 0
        ny = 0
        for s, a in self.letters:
            if a in (1, 2):
                xflip |= 1 << s
            if a in (2, 3):
                smask |= 1 << s
            if a == 2:
                ny += 1
        pref = self.phase * (1j**ny)
        return xflip, smask, pref

    def dagger(self) -> "PauliString":
        return PauliString(self.n, self.letters, self.phase.conjugate())

    def __mul__(self, other: "PauliString") -> "PauliString":
        if not isinstance(other, PauliString):
            return NotImplemented
        if self.n != other.n:
            raise LatticeError("cannot multiply strings on different chains")
        mine = dict(self.letters)
        phase = self.phase * other.phase
        for s, b in other.letters:
            a = mine.pop(s, 0)
            c = _PROD_LETTER[a][b]
            phase *= _PROD_PHASE[a][b]
            if c != 0:
                mine[s] = c
        letters = tuple(sorted(mine.items()))
        return PauliString(self.n, letters, phase)

    def commutes_with(self, other: "PauliString") -> bool:
        xa, za = self._masks[0], self._masks[1]
        # smask = Y|Z bits; zmask in the symplectic sense is smask
        xb, zb = other._masks[0], other._masks[1]
        return (bin(xa & zb).count("1") + bin(za & xb).count("1")) % 2 == 0

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """Matrix-free action on a state vector (or on columns of a 2D array)."""
        psi = np.asarray(psi)
        if psi.shape[0] != 2**self.n:
            raise LatticeError(f"state length {psi.shape[0]} != 2^{self.n}")
        xflip, smask, pref = self._masks
        return kernels.apply_pauli(psi, xflip, smask, pref)

    def dense(self) -> np.ndarray:
        """Dense matrix; intended for small n only."""
        dim = 2**self.n
        return self.apply(np.eye(dim, dtype=complex))


@dataclass(frozen=True)
class LocalOp:
    """Dense window operator for qudit chains: a matrix on contiguous sites.

    ``sites`` lists global sites in window order; ``window`` is the
    (d^w x d^w) matrix acting on them.  The generic fallback path when
    local_dim > 2.
    """

    n: int
    local_dim: int
    sites: tuple
    window: np.ndarray

    @property
    def support(self) -> tuple:
        return self.sites

    @property
    def is_hermitian(self) -> bool:
        return bool(np.allclose(self.window, self.window.conj().T, atol=1e-13))

    def apply(self, psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi, dtype=complex)
        d, n = self.local_dim, self.n
        if psi.shape[0] != d**n:
            raise LatticeError(f"state length {psi.shape[0]} != {d}^{n}")
        cols = psi.shape[1] if psi.ndim == 2 else 0
        tensor = psi.reshape((d,) * n + ((cols,) if cols else ()))
        # axis for site s is n-1-s (site 0 = least significant digit)
        axes = [n - 1 - s for s in self.sites]
        w = len(self.sites)
        moved = np.moveaxis(tensor, axes, range(w))
        shape = moved.shape
        flat = moved.reshape(d**w, -1)
        out = (self.window @ flat).reshape(shape)
        out = np.moveaxis(out, range(w), axes)
        return out.reshape(psi.shape)

    def dense(self) -> np.ndarray:
        dim = self.local_dim**self.n
        return self.apply(np.eye(dim, dtype=complex))


def gell_mann_basis(d: int) -> list:
    """Hermitian single-site basis [I, g_1, ..., g_{d^2-1}] with (1/d)Tr(g_a g_b) = delta_ab."""
    mats = [np.eye(d, dtype=complex)]
    scale = np.sqrt(d / 2.0)
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1.0
            mats.append(scale * m)
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = -1j
            m[k, j] = 1j
            mats.append(scale * m)
    for l in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        for j in range(l):
            m[j, j] = 1.0
        m[l, l] = -l
        m *= np.sqrt(d / (l * (l + 1.0)))
        mats.append(m)
    return mats


@dataclass(frozen=True)
class LocalBasis:
    """Ordered orthonormal basis of the range-k local-operator space.

    Operators are addressable as L_{x alpha}: ``anchors[i]`` gives the anchor
    site of op i and ``alphas[i]`` its within-anchor label index.  On
    periodic chains every anchor carries the same ``per_anchor`` labels.
    """

    spec: LatticeSpec
    ops: tuple
    labels: tuple  # (anchor, letter_0, ..., letter_{k-1}) per op

    @property
    def S(self) -> int:
        return len(self.ops)

    @cached_property
    def anchors(self) -> np.ndarray:
        return np.array([lab[0] for lab in self.labels], dtype=np.int64)

    @cached_property
    def alphas(self) -> np.ndarray:
        out = np.zeros(self.S, dtype=np.int64)
        counter = {}
        for i, lab in enumerate(self.labels):
            x = lab[0]
            out[i] = counter.get(x, 0)
            counter[x] = out[i] + 1
        return out

    @property
    def per_anchor(self) -> int:
        """Labels per anchor; uniform only on periodic chains."""
        if self.spec.boundary != "periodic":
            raise LatticeError("per_anchor is well-defined only for periodic chains")
        return self.S // self.spec.n

    @cached_property
    def _mask_arrays(self):
        xflips = np.array([op._masks[0] for op in self.ops], dtype=np.int64)
        smasks = np.array([op._masks[1] for op in self.ops], dtype=np.int64)
        prefs = np.array([op._masks[2] for op in self.ops], dtype=np.complex128)
        return xflips, smasks, prefs

    @cached_property
    def _index_by_key(self):
        return {op_key(op): i for i, op in enumerate(self.ops)}

    def index_of(self, op) -> int:
        """Index of a basis element equal to ``op`` up to sign; KeyError if absent."""
        return self._index_by_key[op_key(op)]

    def apply_op(self, i: int, psi: np.ndarray) -> np.ndarray:
        return self.ops[i].apply(psi)

    def apply_sum(self, coeffs: np.ndarray, psi: np.ndarray) -> np.ndarray:
        """Matrix-free action of sum_i coeffs[i] * L_i."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.S,):
            raise LatticeError(f"coefficient vector has length {coeffs.shape}, expected {self.S}")
        if self.spec.local_dim == 2:
            xflips, smasks, prefs = self._mask_arrays
            return kernels.apply_terms(psi, xflips, smasks, prefs * coeffs)
        out = np.zeros(np.asarray(psi).shape, dtype=complex)
        for c, op in zip(coeffs, self.ops):
            if c != 0.0:
                out += c * op.apply(psi)
        return out

    def to_descriptor(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "labels": [list(map(int, lab)) for lab in self.labels],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_descriptor(), indent=None, separators=(",", ":"))

    def __eq__(self, other):
        return (
            isinstance(other, LocalBasis)
            and self.spec == other.spec
            and self.labels == other.labels
        )

    def __hash__(self):
        return hash((self.spec, self.labels))


def op_key(op) -> tuple:
    """Canonical (sign-insensitive for Hermitian strings) identity of an operator."""
    if isinstance(op, PauliString):
        return op.letters
    return (op.sites, op.window.tobytes())


def _window_sites(spec: LatticeSpec, anchor: int):
    if spec.boundary == "periodic":
        return tuple((anchor + t) % spec.n for t in range(spec.k))
    return tuple(anchor + t for t in range(spec.k))


def _make_op(spec: LatticeSpec, sites, window_letters, site_basis=None):
    if spec.local_dim == 2:
        letters = tuple(sorted((s, a) for s, a in zip(sites, window_letters) if a != 0))
        return PauliString(n=spec.n, letters=letters)
    mat = None
    for a in window_letters:
        g = site_basis[a]
        mat = g if mat is None else np.kron(mat, g)
    # identity factors stay in the window matrix; labels remain window-aligned
    return LocalOp(n=spec.n, local_dim=spec.local_dim, sites=tuple(sites), window=mat)


def build_local_basis(spec: LatticeSpec) -> LocalBasis:
    """Construct the deterministic orthonormal basis of range-k local operators.

    Periodic qubits at k=2 give S = 12n; open chains give S = 12n - 9.
    """
    nletters = spec.local_dim**2
    site_basis = None if spec.local_dim == 2 else gell_mann_basis(spec.local_dim)
    entries = []  # (anchor, window_letters)
    if spec.boundary == "periodic":
        anchor_range = range(spec.n)
    else:
        anchor_range = range(spec.n - spec.k + 1)
        # strings confined to sites 0..k-2 have no window whose rightmost
        # slot they occupy; attach them to anchor 0
        for tup in product(range(nletters), repeat=spec.k - 1):
            if any(tup):
                entries.append((0, tup + (0,)))
    for x in anchor_range:
        for tup in product(range(nletters), repeat=spec.k - 1):
            for last in range(1, nletters):
                entries.append((x, tup + (last,)))
    entries.sort(key=lambda e: (e[0], e[1]))
    ops = []
    labels = []
    for anchor, tup in entries:
        sites = _window_sites(spec, anchor)
        ops.append(_make_op(spec, sites, tup, site_basis))
        labels.append((anchor,) + tup)
    return LocalBasis(spec=spec, ops=tuple(ops), labels=tuple(labels))


def apply_operator(op, state: np.ndarray) -> np.ndarray:
    """Apply a PauliString/LocalOp (or an iterable of (weight, op)) to a state."""
    state = np.asarray(state)
    if isinstance(op, (PauliString, LocalOp)):
        return op.apply(state)
    out = np.zeros(state.shape, dtype=complex)
    for w, term in op:
        out += w * term.apply(state)
    return out


def hs_inner(a, b, dim: int | None = None) -> float:
    """Hilbert-Schmidt inner product (1/N) Tr(a^dag b), real for Hermitian pairs.

    Accepts two PauliStrings or two dense ndarrays (square, same shape).
    """
    if isinstance(a, PauliString) and isinstance(b, PauliString):
        if a.n != b.n:
            raise LatticeError("operators live on different chains")
        if a.letters != b.letters:
            return 0.0
        val = a.phase.conjugate() * b.phase
        return float(val.real)
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise LatticeError(f"shape mismatch in hs_inner: {a.shape} vs {b.shape}")
    val = np.trace(a.conj().T @ b) / a.shape[0]
    return float(val.real)
