"""Dense complex-matrix kernel used by the optimizers.

Hermitian eigendecomposition, generalized Hermitian-definite eigenproblems,
PSD projection, and the complex-to-real symmetric embedding used by the
conic solver. All functions are pure and operate on plain numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

HERMITIAN_TOL = 1e-10
PD_FLOOR = 1e-12


class NotHermitian(ValueError):
    """Input matrix deviates from A = A^H beyond tolerance."""


class NotPositiveDefinite(ValueError):
    """Matrix required to be positive definite has an eigenvalue <= 0."""


class NoConvergence(RuntimeError):
    """Eigensolver failed to converge."""


@dataclass(frozen=True)
class EigResult:
    """Full spectral decomposition of a Hermitian matrix.

    ``eigenvalues`` are real and ascending; the columns of ``eigenvectors``
    are the matching unit-norm eigenvectors, each phase-normalized so its
    largest-magnitude entry is real nonnegative.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def check_hermitian(a, tol=HERMITIAN_TOL):
    """Raise :class:`NotHermitian` unless ``a`` is square with A = A^H.

    The tolerance is on the max elementwise deviation, scaled by the max
    magnitude of the matrix so that large well-conditioned matrices pass.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {a.shape}")
    scale = max(np.abs(a).max(), 1.0) if a.size else 1.0
    dev = np.abs(a - a.conj().T).max() if a.size else 0.0
    if dev > tol * scale:
        raise NotHermitian(f"max |A - A^H| = {dev:.3e} exceeds tolerance")
    return a


def _normalize_phases(v):
    """Make the largest-magnitude entry of each column real nonnegative."""
    idx = np.argmax(np.abs(v), axis=0)
    pivots = v[idx, np.arange(v.shape[1])]
    phases = np.where(np.abs(pivots) > 0, pivots / np.where(np.abs(pivots) > 0, np.abs(pivots), 1.0), 1.0)
    return v / phases


def herm_eig(a) -> EigResult:
    """Eigendecompose a Hermitian matrix.

    Returns ascending eigenvalues and orthonormal eigenvectors satisfying
    ``a == V diag(w) V^H`` up to roundoff.
    """
    a = check_hermitian(a)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NoConvergence(str(exc)) from exc
    return EigResult(w, _normalize_phases(v.astype(complex)))


def generalized_max_eigvec(a, b):
    """Leading eigenpair of the pencil (A, B) with B positive definite.

    Maximizes the generalized Rayleigh quotient v^H A v / v^H B v. Solved
    through a Cholesky factorization of B for numerical stability. Returns
    ``(lambda_max, v)`` with ``v`` unit Euclidean norm and phase-normalized.
    """
    a = check_hermitian(a)
    b = check_hermitian(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    min_eig = np.linalg.eigvalsh(b)[0]
    if min_eig <= 0:
        raise NotPositiveDefinite(f"smallest eigenvalue of B is {min_eig:.3e}")
    if min_eig <= PD_FLOOR:
        # Marginal PD check: regularize rather than fail.
        b = b + 1e-10 * np.eye(b.shape[0])
    ell = np.linalg.cholesky(b)
    # Reduce to a standard Hermitian problem: L^{-1} A L^{-H}.
    tmp = scipy.linalg.solve_triangular(ell, a, lower=True)
    reduced = scipy.linalg.solve_triangular(ell, tmp.conj().T, lower=True).conj().T
    reduced = 0.5 * (reduced + reduced.conj().T)
    w, v = np.linalg.eigh(reduced)
    x = scipy.linalg.solve_triangular(ell.conj().T, v[:, -1], lower=False)
    x = x / np.linalg.norm(x)
    x = _normalize_phases(x[:, None])[:, 0]
    return float(w[-1]), x


def psd_project(a):
    """Frobenius-nearest PSD matrix: clamp negative eigenvalues to zero."""
    res = herm_eig(a)
    w = np.clip(res.eigenvalues, 0.0, None)
    v = res.eigenvectors
    out = (v * w) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def real_embed(a):
    """Embed a Hermitian n x n matrix as [[Re A, -Im A], [Im A, Re A]].

    The 2n x 2n result is real symmetric, preserves PSD-ness, and carries
    each eigenvalue of ``a`` with doubled multiplicity.
    """
    a = check_hermitian(a)
    re, im = a.real, a.imag
    return np.block([[re, -im], [im, re]])
