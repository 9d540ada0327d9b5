"""Hamiltonian recovery from correlation-matrix kernels, with error analysis.

A unique zero eigenvalue hands back the Hamiltonian's coefficient vector; the
second-smallest eigenvalue controls how hard the recovery leans on the data.
First-order eigenvector perturbation and the Davis-Kahan sin(2 theta) bound
quantify the sensitivity, and principal angles translate the spectrum into
subspace geometry.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .correlation import (
    DEFAULT_ZERO_TOL,
    CorrelationMatrix,
    CorrelationSpectrum,
    correlation_spectrum,
)
from .hamiltonians import vector_angle

VERDICT_UNIQUE = "unique"
VERDICT_NON_UNIQUE = "non_unique"
VERDICT_NO_SOLUTION = "no_solution"


@dataclass(frozen=True)
class ReconstructionResult:
    """Verdict plus recovered unit vector(s) and conditioning data.

    ``recovered`` holds one column per kernel vector (the lambda_1
    eigen-operator, flagged best-effort, when the kernel is empty).
    """

    verdict: str
    recovered: np.ndarray
    lambda1: float
    lambda2: float
    kernel_dim: int
    zero_tolerance: float
    best_effort: bool = False
    angle_to_truth: float | None = None

    @property
    def vector(self) -> np.ndarray:
        """The single recovered coefficient vector (unique or best-effort)."""
        return self.recovered[:, 0]


def fix_sign(vec: np.ndarray) -> np.ndarray:
    """Canonical sign: the largest-magnitude coefficient is made positive."""
    vec = np.asarray(vec, dtype=float)
    i = int(np.argmax(np.abs(vec)))
    return -vec if vec[i] < 0 else vec.copy()


def subspace_angle(columns: np.ndarray, target: np.ndarray) -> float:
    """Angle between ``target`` and its projection onto span(columns)."""
    q, _ = np.linalg.qr(columns)
    t = np.asarray(target, dtype=float)
    t = t / np.linalg.norm(t)
    coef = q.T @ t
    perp = t - q @ coef
    return float(np.arctan2(np.linalg.norm(perp), np.linalg.norm(coef)))


def recover_from_spectrum(
    spectrum: CorrelationSpectrum,
    zero_tolerance: float,
    truth: np.ndarray | None = None,
) -> ReconstructionResult:
    vals = spectrum.eigenvalues
    kdim = spectrum.kernel_dim
    if kdim == 1:
        verdict = VERDICT_UNIQUE
        cols = spectrum.eigen_operators[:, :1]
        best_effort = False
    elif kdim == 0:
        verdict = VERDICT_NO_SOLUTION
        cols = spectrum.eigen_operators[:, :1]
        best_effort = True
    else:
        verdict = VERDICT_NON_UNIQUE
        cols = spectrum.eigen_operators[:, :kdim]
        best_effort = False
    recovered = np.column_stack([fix_sign(cols[:, j]) for j in range(cols.shape[1])])
    angle = None
    if truth is not None:
        if recovered.shape[1] == 1:
            angle = vector_angle(recovered[:, 0], truth)
        else:
            angle = subspace_angle(recovered, truth)
    return ReconstructionResult(
        verdict=verdict,
        recovered=recovered,
        lambda1=float(vals[0]),
        lambda2=float(vals[1]),
        kernel_dim=kdim,
        zero_tolerance=zero_tolerance,
        best_effort=best_effort,
        angle_to_truth=angle,
    )


def recover(
    mat: CorrelationMatrix,
    zero_tolerance: float = DEFAULT_ZERO_TOL,
    truth: np.ndarray | None = None,
) -> ReconstructionResult:
    """Kernel analysis of a correlation matrix.

    unique / non_unique / no_solution track a kernel dimension of 1 / >1 / 0;
    no_solution still reports the lambda_1 eigen-operator as a best-effort
    candidate.  Deterministic up to the fixed sign convention.
    """
    spectrum = correlation_spectrum(mat, zero_tolerance)
    return recover_from_spectrum(spectrum, zero_tolerance, truth)


@dataclass(frozen=True)
class Perturbation:
    """A symmetric direction matrix of unit operator norm, with scale epsilon."""

    epsilon: float
    delta_m: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.delta_m, dtype=float)
        scale = max(1.0, np.abs(d).max())
        if np.abs(d - d.T).max() > 1e-12 * scale:
            raise ValueError("perturbation direction must be symmetric")
        nrm = operator_norm(d)
        if abs(nrm - 1.0) > 1e-10:
            raise ValueError(f"perturbation direction must have unit operator norm, got {nrm}")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "delta_m", d)


def operator_norm(mat: np.ndarray) -> float:
    """Exact spectral norm of a symmetric matrix via eigen-decomposition."""
    return float(np.abs(np.linalg.eigvalsh(mat)).max())


def random_perturbation(size: int, rng, epsilon: float = 1.0) -> Perturbation:
    """GOE-style symmetric direction, normalized to unit operator norm."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    a = rng.standard_normal((size, size))
    d = 0.5 * (a + a.T)
    d /= operator_norm(d)
    return Perturbation(epsilon=epsilon, delta_m=d)


def perturbed_matrix(mat: CorrelationMatrix, pert: Perturbation) -> CorrelationMatrix:
    entries = mat.entries + pert.epsilon * pert.delta_m
    return CorrelationMatrix(
        basis=mat.basis,
        entries=entries,
        variant=mat.variant,
        source_id=f"{mat.source_id}+eps={pert.epsilon}",
    )


def predict_first_order(
    mat: CorrelationMatrix,
    spectrum: CorrelationSpectrum,
    pert: Perturbation,
) -> np.ndarray:
    """First-order perturbed kernel vector, normalized.

    Standard Rayleigh-Schroedinger correction for the lowest eigenvector:
    the i>1 eigen-operators enter with weight <O_i|dM|H> / (lambda_1 -
    lambda_i).  Agreement with exact recovery improves quadratically in
    epsilon.  Requires a unique kernel.
    """
    if spectrum.kernel_dim != 1:
        raise ValueError(
            f"first-order prediction needs a unique kernel, got dimension {spectrum.kernel_dim}"
        )
    vals = spectrum.eigenvalues
    vecs = spectrum.eigen_operators
    h = vecs[:, 0]
    dmh = pert.delta_m @ h
    coef = (vecs[:, 1:].T @ dmh) / (vals[0] - vals[1:])
    out = h + pert.epsilon * (vecs[:, 1:] @ coef)
    out /= np.linalg.norm(out)
    return fix_sign(out)


def davis_kahan_bound(lambda2: float, epsilon: float, delta_m_norm: float = 1.0) -> float:
    """Upper bound on (1/2) sin(2 theta): epsilon * |dM| / lambda_2."""
    if lambda2 <= 0:
        raise ValueError(f"Davis-Kahan bound needs lambda2 > 0, got {lambda2}")
    return float(epsilon * delta_m_norm / lambda2)


def half_sin_2theta(theta: float) -> float:
    return float(0.5 * np.sin(2.0 * theta))


def principal_angles(spectrum: CorrelationSpectrum) -> np.ndarray:
    """theta_i = arccos(1 - lambda_i^2), clamped (with a warning) outside [-1, 1]."""
    lam = np.asarray(spectrum.eigenvalues, dtype=float)
    arg = 1.0 - lam**2
    if np.any(arg < -1.0) or np.any(arg > 1.0):
        warnings.warn("principal-angle argument clamped to [-1, 1]", stacklevel=2)
    return np.arccos(np.clip(arg, -1.0, 1.0))


@dataclass(frozen=True)
class SensitivityRow:
    epsilon: float
    median_theta: float
    max_theta: float
    bound: float


def sensitivity_report(
    mat: CorrelationMatrix,
    epsilons,
    n_draws: int = 32,
    seed: int = 0,
    zero_tolerance: float = DEFAULT_ZERO_TOL,
) -> list:
    """Recovery angle statistics over an ensemble of random perturbations.

    Each draw gets its own bit stream spawned from the master seed, so rows
    are reproducible and draws are order-independent.
    """
    spectrum = correlation_spectrum(mat, zero_tolerance)
    if spectrum.kernel_dim != 1:
        raise ValueError(
            f"sensitivity analysis needs a unique kernel at epsilon=0, got {spectrum.kernel_dim}"
        )
    h = fix_sign(spectrum.eigen_operators[:, 0])
    lambda2 = float(spectrum.eigenvalues[1])
    streams = np.random.SeedSequence(seed).spawn(n_draws)
    directions = [random_perturbation(mat.S, np.random.default_rng(s)) for s in streams]
    rows = []
    for eps in epsilons:
        thetas = []
        for base in directions:
            pert = Perturbation(epsilon=float(eps), delta_m=base.delta_m)
            res = recover(perturbed_matrix(mat, pert), zero_tolerance)
            thetas.append(vector_angle(res.vector, h))
        rows.append(
            SensitivityRow(
                epsilon=float(eps),
                median_theta=float(np.median(thetas)),
                max_theta=float(np.max(thetas)),
                bound=davis_kahan_bound(lambda2, float(eps), 1.0) if eps > 0 else 0.0,
            )
        )
    return rows
