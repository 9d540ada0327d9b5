"""Hot kernels for Pauli-string action on state vectors.

Every Pauli string acts on the computational basis as a bit-flip permutation
times a sign pattern: with ``xflip`` the mask of sites carrying X or Y and
``smask`` the mask of sites carrying Y or Z,

    (P psi)[s ^ xflip] = pref * (-1)^popcount(s & smask) * psi[s],

where ``pref`` absorbs the string's phase and one factor of i per Y letter.
Site x maps to bit x of the basis index (little-endian), with bit value 0
meaning spin up.

Two implementations are provided: numba ``@njit`` kernels (default) and a
pure-numpy fallback.  Selection happens once at import from the environment
variable ``CORRSPEC_BACKEND`` (``numba`` | ``numpy``) and can be changed at
runtime with :func:`set_backend`.  Both paths must agree to machine
precision; ``benchmarks/bench_kernels.py`` compares their speed.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only on stripped installs
    HAS_NUMBA = False


_VALID_BACKENDS = ("numba", "numpy")


def _initial_backend() -> str:
    env = os.environ.get("CORRSPEC_BACKEND", "").strip().lower()
    if env:
        if env not in _VALID_BACKENDS:
            raise ValueError(
                f"CORRSPEC_BACKEND={env!r} not understood; use 'numba' or 'numpy'"
            )
        if env == "numba" and not HAS_NUMBA:
            raise ValueError("CORRSPEC_BACKEND=numba but numba is not importable")
        return env
    return "numba" if HAS_NUMBA else "numpy"


_BACKEND = _initial_backend()


def get_backend() -> str:
    return _BACKEND


def set_backend(name: str) -> None:
    """Switch kernel implementation at runtime ('numba' or 'numpy')."""
    global _BACKEND
    if name not in _VALID_BACKENDS:
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise ValueError("numba backend requested but numba is not importable")
    _BACKEND = name


# ---------------------------------------------------------------------------
# pure-numpy path
# ---------------------------------------------------------------------------

def _parity(x):
    """Elementwise parity of the popcount of a nonnegative int64 array."""
    x = x.copy()
    x ^= x >> 32
    x ^= x >> 16
    x ^= x >> 8
    x ^= x >> 4
    x ^= x >> 2
    x ^= x >> 1
    return (x & 1).astype(np.int64)


def _signed_coeff_np(dim, xflip, smask, pref):
    idx = np.arange(dim, dtype=np.int64)
    signs = 1.0 - 2.0 * _parity(idx & smask)
    return idx ^ xflip, signs * pref


def apply_pauli_numpy(psi, xflip, smask, pref):
    psi = np.asarray(psi)
    perm, coef = _signed_coeff_np(psi.shape[0], xflip, smask, pref)
    if psi.ndim == 1:
        return (coef * psi)[perm]
    return (coef[:, None] * psi)[perm]


def apply_terms_numpy(psi, xflips, smasks, prefs):
    psi = np.asarray(psi)
    out = np.zeros(psi.shape, dtype=np.complex128)
    for xflip, smask, pref in zip(xflips, smasks, prefs):
        out += apply_pauli_numpy(psi, int(xflip), int(smask), complex(pref))
    return out


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

if HAS_NUMBA:

    @numba.njit(cache=True)
    def _apply_pauli_nb(psi, out, xflip, smask, pref):
        dim = psi.shape[0]
        for s in range(dim):
            m = s & smask
            bits = 0
            while m:
                m &= m - 1
                bits += 1
            c = -pref if bits & 1 else pref
            out[s ^ xflip] = c * psi[s]

    @numba.njit(cache=True)
    def _apply_pauli_nb_2d(psi, out, xflip, smask, pref):
        dim = psi.shape[0]
        ncol = psi.shape[1]
        for s in range(dim):
            m = s & smask
            bits = 0
            while m:
                m &= m - 1
                bits += 1
            c = -pref if bits & 1 else pref
            t = s ^ xflip
            for r in range(ncol):
                out[t, r] = c * psi[s, r]

    @numba.njit(cache=True)
    def _apply_terms_nb(psi, out, xflips, smasks, prefs):
        dim = psi.shape[0]
        nterms = xflips.shape[0]
        for t in range(nterms):
            xflip = xflips[t]
            smask = smasks[t]
            pref = prefs[t]
            for s in range(dim):
                m = s & smask
                bits = 0
                while m:
                    m &= m - 1
                    bits += 1
                c = -pref if bits & 1 else pref
                out[s ^ xflip] += c * psi[s]

    def apply_pauli_numba(psi, xflip, smask, pref):
        psi = np.ascontiguousarray(psi, dtype=np.complex128)
        out = np.empty_like(psi)
        if psi.ndim == 1:
            _apply_pauli_nb(psi, out, np.int64(xflip), np.int64(smask), complex(pref))
        else:
            _apply_pauli_nb_2d(psi, out, np.int64(xflip), np.int64(smask), complex(pref))
        return out

    def apply_terms_numba(psi, xflips, smasks, prefs):
        psi = np.ascontiguousarray(psi, dtype=np.complex128)
        if psi.ndim != 1:
            out = np.zeros(psi.shape, dtype=np.complex128)
            for xflip, smask, pref in zip(xflips, smasks, prefs):
                out += apply_pauli_numba(psi, int(xflip), int(smask), complex(pref))
            return out
        out = np.zeros(psi.shape, dtype=np.complex128)
        _apply_terms_nb(
            psi,
            out,
            np.ascontiguousarray(xflips, dtype=np.int64),
            np.ascontiguousarray(smasks, dtype=np.int64),
            np.ascontiguousarray(prefs, dtype=np.complex128),
        )
        return out


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def apply_pauli(psi, xflip, smask, pref):
    """Apply one Pauli string (given by masks and prefactor) to a vector.

    ``psi`` may be 1D (a state) or 2D (columns processed in parallel, e.g.
    the columns of a density-matrix factor).  Cost O(dim * ncol), no dense
    matrix is materialized.
    """
    if _BACKEND == "numba":
        return apply_pauli_numba(psi, xflip, smask, pref)
    return apply_pauli_numpy(psi, int(xflip), int(smask), complex(pref))


def apply_terms(psi, xflips, smasks, prefs):
    """Apply a weighted sum of Pauli strings; ``prefs`` carry the weights."""
    if _BACKEND == "numba":
        return apply_terms_numba(psi, xflips, smasks, prefs)
    return apply_terms_numpy(psi, xflips, smasks, prefs)
