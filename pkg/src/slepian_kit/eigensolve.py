"""Dense Hermitian baseline and the deflated dominant-eigenpair iteration.

The iterative path is a restarted Lanczos sweep on the deflated operator
P K P, where P projects onto the orthogonal complement of the already
accepted vectors.  The projection is applied inside every operator
application, not just at the start, and the Krylov basis is kept fully
reorthogonalized; subspace sizes stay small so the extra cost is noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


class ConvergenceError(RuntimeError):
    """Iteration budget exhausted; carries the best iterate found."""

    def __init__(self, message, value=None, vector=None, residual=None):
        super().__init__(message)
        self.value = value
        self.vector = vector
        self.residual = residual


class DegenerateInputError(ValueError):
    """Vector lies (numerically) inside the span it must be orthogonal to."""


@dataclass
class EigenPair:
    value: float
    vector: np.ndarray
    residual: float = 0.0


@dataclass
class Spectrum:
    """Eigenvalues sorted descending with matching orthonormal column vectors."""

    values: np.ndarray
    vectors: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    def pair(self, i: int) -> EigenPair:
        return EigenPair(value=float(self.values[i]), vector=self.vectors[:, i])


def full_hermitian_eig(K) -> Spectrum:
    """Complete spectrum of a Hermitian matrix, sorted descending."""
    A = K.matrix if hasattr(K, "matrix") else np.asarray(K)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    values, vectors = np.linalg.eigh(A)
    return Spectrum(values=values[::-1].copy(), vectors=vectors[:, ::-1].copy())


def concentration_ratio(apply_k: Callable, v: np.ndarray) -> float:
    """Rayleigh quotient v* K v / v* v; the imaginary residue is checked then dropped."""
    v = np.asarray(v).reshape(-1)
    nrm2 = float(np.real(np.vdot(v, v)))
    if nrm2 == 0.0:
        raise ValueError("concentration ratio of the zero vector")
    kv = np.asarray(apply_k(v)).reshape(-1)
    quad = np.vdot(v, kv)
    scale = max(float(np.linalg.norm(kv)) * float(np.sqrt(nrm2)), np.finfo(float).tiny)
    if abs(quad.imag) > 1e-12 * max(scale, abs(quad.real)):
        raise ArithmeticError(f"Rayleigh quotient has imaginary residue {quad.imag:.3e}")
    return float(quad.real) / nrm2


def orthogonalize(w: np.ndarray, basis: Sequence[np.ndarray]) -> np.ndarray:
    """Unit vector orthogonal to the basis; one pass per vector plus a full re-pass."""
    v = np.asarray(w, dtype=complex).reshape(-1).copy()
    norm_in = np.linalg.norm(v)
    if norm_in == 0.0:
        raise DegenerateInputError("cannot orthogonalize the zero vector")
    cols = [np.asarray(b).reshape(-1) for b in basis]
    for _ in range(2):
        for b in cols:
            v -= np.vdot(b, v) * b
    norm_out = np.linalg.norm(v)
    if norm_out <= 1e-12 * norm_in:
        raise DegenerateInputError("vector lies in the span of the basis")
    return v / norm_out


def _project_out(v: np.ndarray, Q: np.ndarray | None) -> np.ndarray:
    if Q is None or Q.shape[1] == 0:
        return v
    return v - Q @ (Q.conj().T @ v)


def top_eigenpair_deflated(
    apply_k: Callable,
    n: int,
    excluded: Sequence[np.ndarray] = (),
    tol: float = 1e-10,
    warm_start: np.ndarray | None = None,
    max_applies: int = 5000,
    krylov_dim: int = 120,
) -> EigenPair:
    """Dominant eigenpair of P K P, P the projector orthogonal to ``excluded``.

    The eigenvalue of largest magnitude is targeted.  Convergence means the
    residual ||P K P v - theta v|| is at most tol * |theta|.  When the
    budget runs out, or the restarts stop making progress (which happens
    against quasi-continuous eigenvalue plunges, where no Krylov polynomial
    of modest degree can separate the top), a ConvergenceError carrying the
    best iterate and its residual is raised.
    """
    Q = None
    if len(excluded):
        Q = np.column_stack([np.asarray(b).reshape(-1) for b in excluded])

    applies = 0

    def op(v: np.ndarray) -> np.ndarray:
        nonlocal applies
        applies += 1
        return _project_out(np.asarray(apply_k(_project_out(v, Q))).reshape(-1), Q)

    if warm_start is not None:
        v0 = _project_out(np.asarray(warm_start, dtype=complex).reshape(-1), Q)
    else:
        v0 = np.zeros(n, dtype=complex)
    if np.linalg.norm(v0) <= 1e-14:
        # Deterministic fallback start with broad spectral content.
        rng = np.random.default_rng(0)
        v0 = _project_out(rng.standard_normal(n) + 0.0j, Q)
        if np.linalg.norm(v0) == 0.0:
            raise DegenerateInputError("no direction left outside the excluded span")
    v0 = v0 / np.linalg.norm(v0)

    best = EigenPair(value=0.0, vector=v0, residual=np.inf)
    stagnant = 0
    while applies < max_applies:
        m = min(krylov_dim, n - (0 if Q is None else Q.shape[1]), max_applies - applies)
        if m < 1:
            break
        V = np.zeros((n, m), dtype=complex)
        alpha = np.zeros(m)
        beta = np.zeros(max(m - 1, 0))
        V[:, 0] = v0
        steps = 0
        for j in range(m):
            w = op(V[:, j])
            a = np.real(np.vdot(V[:, j], w))
            alpha[j] = a
            w -= a * V[:, j]
            if j > 0:
                w -= beta[j - 1] * V[:, j - 1]
            # Full reorthogonalization keeps the small basis clean.
            w -= V[:, : j + 1] @ (V[:, : j + 1].conj().T @ w)
            steps = j + 1
            if j + 1 < m:
                b = np.linalg.norm(w)
                if b <= 1e-14 * max(1.0, abs(a)):
                    break  # invariant subspace reached
                beta[j] = b
                V[:, j + 1] = w / b
        T = np.diag(alpha[:steps]) + np.diag(beta[: steps - 1], 1) + np.diag(beta[: steps - 1], -1)
        theta_all, y_all = np.linalg.eigh(T)
        pick = int(np.argmax(np.abs(theta_all)))
        theta = float(theta_all[pick])
        x = V[:, :steps] @ y_all[:, pick]
        x = _project_out(x, Q)
        nx = np.linalg.norm(x)
        if nx == 0.0:
            raise ConvergenceError("iterate collapsed into the excluded span",
                                   value=best.value, vector=best.vector, residual=best.residual)
        x /= nx
        resid = float(np.linalg.norm(op(x) - theta * x))
        if resid < 0.9 * best.residual:
            stagnant = 0
        else:
            stagnant += 1
        if resid < best.residual:
            best = EigenPair(value=theta, vector=x, residual=resid)
        if resid <= tol * max(abs(theta), np.finfo(float).tiny):
            return best
        if stagnant >= 3:
            raise ConvergenceError(
                f"restarts stagnated at residual {best.residual:.3e} (value {best.value:.6e})",
                value=best.value, vector=best.vector, residual=best.residual,
            )
        v0 = x
    raise ConvergenceError(
        f"no convergence within {max_applies} operator applications "
        f"(best residual {best.residual:.3e} at value {best.value:.6e})",
        value=best.value, vector=best.vector, residual=best.residual,
    )


@dataclass(frozen=True)
class Certificate:
    """Projection-error certificate: measured error vs the spectral-gap bound."""

    bound: float
    measured: float
    applicable: bool
    precondition_gap: float

    @property
    def ok(self) -> bool:
        return self.applicable and self.measured <= self.bound * (1.0 + 1e-10)


def projection_error_certificate(spectrum: Spectrum, w: np.ndarray, eta: float, m: int) -> Certificate:
    """Check ||w - Proj_{span v_1..v_m} w||^2 against eta / (lambda_1 - lambda_{m+1}).

    The precondition |w* K w - lambda_1| <= eta is verified from the
    spectral expansion; when it fails the certificate is inapplicable.
    """
    v = np.asarray(w, dtype=complex).reshape(-1)
    v = v / np.linalg.norm(v)
    coeffs = spectrum.vectors.conj().T @ v
    weights = np.abs(coeffs) ** 2
    rayleigh = float(np.sum(spectrum.values * weights))
    lam1 = float(spectrum.values[0])
    gap_pre = abs(rayleigh - lam1)
    applicable = gap_pre <= eta * (1.0 + 1e-12)
    measured = float(max(0.0, 1.0 - np.sum(weights[:m])))
    if m >= len(spectrum):
        bound = np.inf
    else:
        denom = lam1 - float(spectrum.values[m])
        bound = eta / denom if denom > 0 else np.inf
    return Certificate(bound=bound, measured=measured, applicable=applicable, precondition_gap=gap_pre)
