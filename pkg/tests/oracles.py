"""Independent dense-matrix oracles for cross-checking the fast kernels.

Everything here is built from explicit Kronecker products and dense algebra,
deliberately sharing no code with the package's bit-indexed paths.
"""

import numpy as np

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = [I2, SX, SY, SZ]


def site_op(n, site, mat, d=2):
    """mat acting on one site, identity elsewhere (site 0 = most significant? no:
    site 0 is the least significant factor, matching the package's bit order)."""
    out = np.array([[1.0 + 0j]])
    for s in range(n - 1, -1, -1):
        out = np.kron(out, mat if s == site else np.eye(d, dtype=complex))
    return out


def string_op(n, letters):
    """Dense matrix of a Pauli string given as ((site, letter), ...)."""
    out = np.eye(2**n, dtype=complex)
    for site, a in letters:
        out = out @ site_op(n, site, PAULI[a])
    return out


def dense_basis(n, boundary="periodic"):
    """Dense 12n (periodic) or 12n-9 (open) basis in the package's label order."""
    ops = []
    labels = []
    if boundary == "periodic":
        anchors = range(n)
    else:
        anchors = range(n - 1)
        for a in range(1, 4):
            ops.append(site_op(n, 0, PAULI[a]))
            labels.append((0, a, 0))
    for x in anchors:
        for a in range(4):
            for b in range(1, 4):
                ops.append(site_op(n, x, PAULI[a]) @ site_op(n, (x + 1) % n, PAULI[b]))
                labels.append((x, a, b))
    pairs = sorted(zip(labels, ops), key=lambda t: t[0])
    return [p[1] for p in pairs], [p[0] for p in pairs]


def dense_hamiltonian(coeffs, ops):
    out = np.zeros_like(ops[0])
    for c, op in zip(coeffs, ops):
        out += c * op
    return out


def corr_matrix(ops, v):
    """Connected-correlation matrix from dense operators and a state vector."""
    wv = np.array([op @ v for op in ops])
    expt = np.array([np.vdot(v, w).real for w in wv])
    gram = (wv.conj() @ wv.T).real
    gram = 0.5 * (gram + gram.T)
    return gram - np.outer(expt, expt)


def corr_matrix_mixed(ops, rho):
    """(1/2)Tr(rho {L_i, L_j}) - Tr(rho L_i)Tr(rho L_j) by direct dense products."""
    S = len(ops)
    out = np.zeros((S, S))
    expt = np.array([np.trace(rho @ op).real for op in ops])
    for i in range(S):
        for j in range(S):
            ac = ops[i] @ ops[j] + ops[j] @ ops[i]
            out[i, j] = 0.5 * np.trace(rho @ ac).real - expt[i] * expt[j]
    return 0.5 * (out + out.T)


def rho_commutator_matrix(ops, rho):
    """(1/2)Tr([rho, L_i]^dag [rho, L_j]) dense oracle."""
    comms = [rho @ op - op @ rho for op in ops]
    S = len(ops)
    out = np.zeros((S, S))
    for i in range(S):
        for j in range(S):
            out[i, j] = 0.5 * np.trace(comms[i].conj().T @ comms[j]).real
    return 0.5 * (out + out.T)


def h_commutator_matrix(ops, hmat):
    """(1/2N)Tr([H, L_i]^dag [H, L_j]) dense oracle."""
    N = hmat.shape[0]
    comms = [hmat @ op - op @ hmat for op in ops]
    S = len(ops)
    out = np.zeros((S, S))
    for i in range(S):
        for j in range(S):
            out[i, j] = 0.5 * np.trace(comms[i].conj().T @ comms[j]).real / N
    return 0.5 * (out + out.T)


def partial_trace(rho, n, keep, d=2):
    """Trace out all sites not in ``keep`` (contiguous ascending), bit order matching the package."""
    keep = list(keep)
    m = len(keep)
    tensor = rho.reshape((d,) * (2 * n))
    # row axis for site s is n-1-s; column axes follow after n
    row_axes = [n - 1 - s for s in reversed(keep)]
    col_axes = [2 * n - 1 - s for s in reversed(keep)]
    moved = np.moveaxis(tensor, row_axes + col_axes, list(range(m)) + list(range(n, n + m)))
    moved = moved.reshape(d**m, d ** (n - m), d**m, d ** (n - m))
    return np.einsum("arbr->ab", moved)
