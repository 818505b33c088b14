"""Analytic references: Hermite/Gaussian closed forms, the splitting product,
quasimode order, commuting quadric operators, the DPSS tridiagonal and the
translation/affine eigenpair maps.

The assembled concentration matrix is the unit-spacing discretization of the
problem written in lattice coordinates x/dx (frequency band [-pi, pi]), so
closed forms are compared in that frame: a Gaussian space mask with
coefficient gamma on [-1,1] acts like coefficient gamma*dx^2 on the lattice,
a binary Fourier radius r acts like a space-side radius r/dx.
``effective_gaussian_parameters`` and ``effective_fourier_radius_scale``
spell the mapping out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .geometry import Grid
from .operator import apply_fast, kernel_samples


class ResolutionError(ValueError):
    """The grid cannot resolve the requested mode."""


# ---------------------------------------------------------------------------
# Hermite functions and the Gaussian closed form


def hermite_eval(n: int, x) -> np.ndarray | float:
    """L2-normalized Hermite function phi_n(x) by upward recurrence.

    phi_0 = pi^(-1/4) exp(-x^2/2); the recurrence keeps the Gaussian factor
    inside each term, which is stable far beyond the orders used here.
    """
    if n < 0:
        raise ValueError("Hermite order must be >= 0")
    t = np.asarray(x, dtype=float)
    h_prev = np.pi ** -0.25 * np.exp(-0.5 * t * t)
    if n == 0:
        return h_prev if h_prev.shape else float(h_prev)
    h = math.sqrt(2.0) * t * h_prev
    for k in range(1, n):
        h_prev, h = h, math.sqrt(2.0 / (k + 1)) * t * h - math.sqrt(k / (k + 1)) * h_prev
    return h if h.shape else float(h)


def hermite_basis(n_max: int, x: np.ndarray) -> np.ndarray:
    """Columns phi_0..phi_{n_max} evaluated at x."""
    return np.column_stack([hermite_eval(n, x) for n in range(n_max + 1)])


def gaussian_eigenvalue(alpha: float, beta: float, n: int) -> float:
    """Closed-form eigenvalue exp(-arcsinh(sqrt(alpha*beta)) (2n+1))."""
    return math.exp(-math.asinh(math.sqrt(alpha * beta)) * (2 * n + 1))


def gaussian_mode_exponent(alpha: float, beta: float) -> float:
    """mu^2 = sqrt(alpha (1 + alpha beta) / beta); modes are phi_n(mu x)."""
    return math.sqrt(alpha * (1.0 + alpha * beta) / beta)


def gaussian_eigenpairs(alpha: float, beta: float, n: int, grid: Grid):
    """(lambda_n, psi_n) for masks exp(-alpha x^2/2), exp(-beta xi^2/2).

    alpha and beta are understood in the grid's lattice frame; psi_n is
    sampled at the lattice nodes (tensorized over dimensions) and
    renormalized to a unit discrete norm.
    """
    if alpha <= 0 or beta <= 0:
        raise ValueError("Gaussian parameters must be positive")
    mu2 = gaussian_mode_exponent(alpha, beta)
    mu = math.sqrt(mu2)
    x = grid.lattice_axis()
    # Nyquist: mode frequency content reaches ~ mu*sqrt(2n+1), band edge is pi.
    if mu * math.sqrt(2 * n + 1) > 0.5 * math.pi:
        raise ResolutionError(f"mode {n} is not resolved: mu={mu:.3g} too large for the lattice")
    if math.sqrt(2 * n + 1) / mu > 0.5 * grid.N:
        raise ResolutionError(f"mode {n} does not fit the grid extent")
    profile = hermite_eval(n, mu * x)
    psi = profile
    for _ in range(grid.d - 1):
        psi = np.multiply.outer(psi, profile)
    psi = psi.reshape(-1)
    lam = gaussian_eigenvalue(alpha, beta, n) ** grid.d
    return lam, psi / np.linalg.norm(psi)


def effective_gaussian_parameters(gamma_space: float, gamma_fourier: float, grid: Grid):
    """Lattice-frame (alpha, beta) of Gaussian masks sampled on the physical grids."""
    return gamma_space * grid.dx ** 2, gamma_fourier


# ---------------------------------------------------------------------------
# Splitting representation


def splitting_apply(V_samples: np.ndarray, H_samples: np.ndarray, f: np.ndarray, grid: Grid) -> np.ndarray:
    """Apply exp(-V/2) exp(-H) exp(-V/2) with the middle factor diagonal in frequency.

    V is sampled on the space grid, H on the Fourier grid; the frequency
    factor uses the same midpoint transform as the assembled operator, so
    for masks exp(-V/2), exp(-H/2) this is the identical operator computed
    along an independent path.
    """
    V = np.asarray(V_samples, dtype=float).reshape((grid.N,) * grid.d)
    H = np.asarray(H_samples, dtype=float).reshape((grid.M,) * grid.d)
    if np.any(V < 0) or np.any(H < 0):
        raise ValueError("V and H samples must be nonnegative")
    N, M, d = grid.N, grid.M, grid.d
    g = np.exp(-0.5 * V) * np.asarray(f).reshape((N,) * d)

    # Analysis transform E: modulation by the midpoint phase, then FFT.
    k = np.arange(N, dtype=float)
    mod = np.exp(1j * (math.pi - 0.5 * grid.dxi) * k)
    pad = np.zeros((M,) * d, dtype=complex)
    blk = g.astype(complex)
    for axis in range(d):
        shape = [1] * d
        shape[axis] = N
        blk = blk * mod.reshape(shape)
    pad[(slice(0, N),) * d] = blk
    spec = np.fft.fftn(pad)

    spec *= np.exp(-H)

    back = np.fft.ifftn(spec)[(slice(0, N),) * d]
    for axis in range(d):
        shape = [1] * d
        shape[axis] = N
        back = back * np.conj(mod).reshape(shape)
    out = np.exp(-0.5 * V) * back
    return out.reshape(np.asarray(f).shape)


def quasimode_residual(eps: float, n: int, grid: Grid, sigma: float = 0.2) -> float:
    """||K_eps psi_n - exp(-eps omega) psi_n|| for the harmonic pair V=x^2, H=xi^2.

    The oracle coordinate x is mapped onto the lattice with sampling step
    sigma (x = sigma * lattice node, xi = lattice frequency / sigma), which
    leaves T = -Laplacian + x^2 and omega = 2n+1 unchanged while letting the
    grid resolve phi_n.  psi_n is discretely normalized.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if sigma * math.sqrt(2 * n + 1) > 0.5 * math.pi:
        raise ResolutionError("sampling step sigma too coarse for this mode")
    if math.sqrt(2 * n + 1) / sigma > 0.4 * grid.N:
        raise ResolutionError("mode does not fit the grid extent at this sigma")
    x = sigma * grid.lattice_axis()
    xi = grid.fourier_axis() / sigma
    if grid.d != 1:
        raise ResolutionError("the quasimode oracle is one-dimensional")
    mask_s = np.exp(-0.5 * eps * x ** 2)
    mask_f = np.exp(-0.5 * eps * xi ** 2)
    kernel = kernel_samples(mask_f, grid)
    psi = hermite_eval(n, x)
    psi = psi / np.linalg.norm(psi)
    omega = 2 * n + 1
    r = apply_fast(mask_s, kernel, psi.astype(complex)) - math.exp(-eps * omega) * psi
    return float(np.linalg.norm(r))


def quasimode_order(n: int, grid: Grid, eps_values=(0.2, 0.1, 0.05), sigma: float = 0.2) -> float:
    """Least-squares slope of log residual vs log eps, after removing the
    known exp(-eps omega) prefactor (which is order-irrelevant but bends the
    fit at the larger eps values)."""
    eps = np.asarray(eps_values, dtype=float)
    omega = 2 * n + 1
    res = np.array([quasimode_residual(e, n, grid, sigma) for e in eps])
    comp = res * np.exp(eps * omega)
    return float(np.polyfit(np.log(eps), np.log(comp), 1)[0])


# ---------------------------------------------------------------------------
# Commuting quadric operators


@dataclass(frozen=True)
class QuadricOperator:
    """Second-order commuting operator assembled by conservative differences.

    ``matrix`` is the full N^d x N^d real symmetric matrix (rows/columns of
    nodes outside the space quadric are zero); ``interior`` flags the nodes
    inside, ``a_field``/``c_field`` are the coefficient fields at the nodes.
    """

    matrix: np.ndarray
    interior: np.ndarray
    a_field: np.ndarray
    c_field: np.ndarray

    def interior_spectrum(self):
        """Eigen-decomposition restricted to the interior nodes, ascending,
        embedded back into full-length vectors."""
        idx = np.flatnonzero(self.interior)
        sub = self.matrix[np.ix_(idx, idx)]
        vals, vecs = np.linalg.eigh(sub)
        full = np.zeros((self.matrix.shape[0], len(idx)))
        full[idx, :] = vecs
        return vals, full


def _quadric_scalar_field(points: np.ndarray, a: np.ndarray, b: float) -> np.ndarray:
    return np.sum(a * points ** 2, axis=-1) - b


def quadric_commuting_operator(space_quadric, fourier_quadric, grid: Grid) -> QuadricOperator:
    """Assemble P = div(A grad) + C for centered quadric domains.

    ``space_quadric`` is (a, b) with the space domain {sum a_n x_n^2 <= b};
    ``fourier_quadric`` is (alpha, beta) for the Fourier domain.  The
    coefficient fields are A_m(x) = alpha_m (sum a_n x_n^2 - b) and
    C(x) = beta * sum a_n x_n^2; fluxes use A at half nodes with Dirichlet
    truncation outside the space domain, which keeps P exactly symmetric.
    """
    a, b = space_quadric
    alpha, beta = fourier_quadric
    a = np.atleast_1d(np.asarray(a, dtype=float))
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if a.size != grid.d or alpha.size != grid.d:
        raise ValueError("quadric coefficient length must equal the dimension")

    N, d = grid.N, grid.d
    axis = grid.space_axis()
    pts = grid.space_points()
    scalar = _quadric_scalar_field(pts, a, b)  # sum a x^2 - b at nodes
    interior = scalar <= 0.0
    c_field = beta * np.sum(a * pts ** 2, axis=-1)

    n = N ** d
    P = np.zeros((n, n))
    inv_dx2 = 1.0 / grid.dx ** 2
    strides = [N ** (d - 1 - ax) for ax in range(d)]
    half = 0.5 * (axis[:-1] + axis[1:])
    for ax in range(d):
        # A_m at half nodes along axis ax; other coordinates at nodes.
        for flat in range(n):
            if not interior[flat]:
                continue
            multi = np.unravel_index(flat, (N,) * d)
            if multi[ax] + 1 >= N:
                continue
            nb = flat + strides[ax]
            if not interior[nb]:
                continue
            x_half = pts[flat].copy()
            x_half[ax] = half[multi[ax]]
            A_val = alpha[ax] * (float(np.sum(a * x_half ** 2)) - b)
            w = A_val * inv_dx2
            # flux pair of d/dx(A d/dx): quadratic form sum A |Dv|^2 with sign
            P[flat, flat] += -w
            P[nb, nb] += -w
            P[flat, nb] += w
            P[nb, flat] += w
    diag = np.where(interior, c_field, 0.0)
    P[np.arange(n), np.arange(n)] += diag
    return QuadricOperator(matrix=P, interior=interior, a_field=scalar, c_field=c_field)


def general_quadric_operator(M_space, v_space, c_space, M_fourier, v_fourier, c_fourier, grid: Grid) -> QuadricOperator:
    """Commuting operator for domains {x^T M x + v^T x + c <= 0}.

    Each quadric is reduced to centered axis form via M = U Lambda U^T and
    w = -Lambda^{-1} U^T v / 2.  Exactly diagonal matrices with v = 0
    delegate to the centered assembler (bit-identical to calling it
    directly); otherwise the operator is assembled in the original frame
    with the rotated coefficient tensor B(x) = U A(y(x)) U^T and a
    symmetric centered-difference stencil.
    """
    def reduce(Mq, vq, cq):
        Mq = np.asarray(Mq, dtype=float)
        vq = np.asarray(vq, dtype=float)
        if Mq.shape != (grid.d, grid.d):
            raise ValueError("quadric matrix has wrong shape")
        if abs(np.linalg.det(Mq)) < 1e-300:
            raise ValueError("quadric matrix is singular")
        if np.any(Mq - np.diag(np.diag(Mq)) != 0.0):
            lam_, U = np.linalg.eigh(Mq)
            if np.any(np.abs(lam_) < 1e-300):
                raise ValueError("quadric matrix is singular")
        else:
            lam_, U = np.diag(Mq).copy(), np.eye(grid.d)
        w = -0.5 * (U.T @ vq) / lam_
        b = float(np.sum(lam_ * w ** 2) - cq)
        return lam_, U, w, b

    a, U_s, w_s, b = reduce(M_space, v_space, c_space)
    alpha, U_f, w_f, beta = reduce(M_fourier, v_fourier, c_fourier)
    axis_aligned = (np.array_equal(U_s, np.eye(grid.d))
                    and np.array_equal(U_f, np.eye(grid.d))
                    and np.all(w_s == 0.0) and np.all(w_f == 0.0))
    if axis_aligned:
        return quadric_commuting_operator((a, b), (alpha, beta), grid)

    # Original-frame coefficient fields: y(x) = U_s^T x - w_s, scalar field
    # s(x) = sum a_n y_n^2 - b, diag A_m = alpha_m s, rotated B = U A U^T,
    # potential C = beta * y . diag(a) y.
    N, d = grid.N, grid.d
    pts = grid.space_points()
    y = pts @ U_s - w_s
    scalar = np.sum(a * y ** 2, axis=-1) - b
    interior = scalar <= 0.0
    c_field = beta * np.sum(a * y ** 2, axis=-1)
    B = np.einsum("im,pm,jm->pij", U_s, (alpha[None, :] * scalar[:, None]), U_s)

    n = N ** d
    inv_2dx = 1.0 / (2.0 * grid.dx)
    strides = [N ** (d - 1 - ax) for ax in range(d)]

    def centered_diff(ax):
        G = np.zeros((n, n))
        for flat in range(n):
            multi = np.unravel_index(flat, (N,) * d)
            if multi[ax] + 1 < N:
                G[flat, flat + strides[ax]] += inv_2dx
            if multi[ax] - 1 >= 0:
                G[flat, flat - strides[ax]] -= inv_2dx
        return G

    G = [centered_diff(ax) for ax in range(d)]
    mask = interior.astype(float)
    P = np.zeros((n, n))
    for m in range(d):
        for nn in range(d):
            Bmn = B[:, m, nn] * mask
            P += -G[m].T @ (Bmn[:, None] * G[nn])
    P = 0.5 * (P + P.T)
    P *= np.outer(mask, mask)
    P[np.arange(n), np.arange(n)] += np.where(interior, c_field, 0.0)
    return QuadricOperator(matrix=P, interior=interior, a_field=scalar, c_field=c_field)


def effective_fourier_radius_scale(grid: Grid) -> float:
    """Factor mapping a Fourier-side length onto the lattice frame (1/dx)."""
    return 1.0 / grid.dx


def commutation_residual(P: QuadricOperator, K) -> float:
    """||PK - KP||_F / (||P||_F ||K||_F) on the dense matrices."""
    A = K.matrix if hasattr(K, "matrix") else np.asarray(K)
    B = P.matrix
    if A.shape != B.shape:
        raise ValueError("operator sizes do not match")
    C = B @ A - A @ B
    return float(np.linalg.norm(C) / (np.linalg.norm(B) * np.linalg.norm(A)))


# ---------------------------------------------------------------------------
# DPSS


def dpss_tridiagonal(N: int, W: float) -> np.ndarray:
    """The classical symmetric tridiagonal commuting with the index/band
    concentration problem; eigenvectors ordered by decreasing eigenvalue are
    the discrete prolate spheroidal sequences."""
    if not 0.0 < W < 0.5:
        raise ValueError("bandwidth fraction W must lie in (0, 1/2)")
    k = np.arange(N, dtype=float)
    diag = ((N - 1) / 2.0 - k) ** 2 * math.cos(2 * math.pi * W)
    off = (k[1:]) * (N - k[1:]) / 2.0
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


def dpss_vectors(N: int, W: float, n_vectors: int) -> np.ndarray:
    """First ``n_vectors`` DPSS as columns (most concentrated first)."""
    k = np.arange(N, dtype=float)
    diag = ((N - 1) / 2.0 - k) ** 2 * math.cos(2 * math.pi * W)
    off = (k[1:]) * (N - k[1:]) / 2.0
    if not 0.0 < W < 0.5:
        raise ValueError("bandwidth fraction W must lie in (0, 1/2)")
    _, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(N - n_vectors, N - 1))
    return vecs[:, ::-1]


# ---------------------------------------------------------------------------
# Translation / affine eigenpair maps


class AlignmentError(ValueError):
    """Translation is not representable exactly on the sampled grid."""


def equivalence_map(kind: str, psi: np.ndarray, p, grid: Grid) -> np.ndarray:
    """Map an eigenvector between translated/scaled mask problems.

    kinds (all in lattice coordinates):
      - 'space-translation': samples shifted by p lattice steps (p integer),
        zero fill; the shifted vector is an eigenpair of the p-shifted
        space-mask operator.
      - 'fourier-translation': multiply by exp(-i p . x) at the lattice
        nodes; maps an eigenvector of the p-shifted Fourier-mask operator to
        one of the centered operator.
      - 'affine': resample psi(x/s) on the lattice by linear interpolation.
    """
    v = np.asarray(psi).reshape((grid.N,) * grid.d)
    if kind == "space-translation":
        shift = np.atleast_1d(np.asarray(p, dtype=float))
        out = v
        for ax in range(grid.d):
            s = shift[ax] if shift.size > 1 else shift[0]
            si = int(round(s))
            if abs(s - si) > 1e-12:
                raise AlignmentError(f"space translation {s} is not an integer lattice step")
            rolled = np.zeros_like(out)
            if si == 0:
                rolled = out.copy()
            elif si > 0:
                sl_to = [slice(None)] * grid.d
                sl_from = [slice(None)] * grid.d
                sl_to[ax] = slice(si, None)
                sl_from[ax] = slice(0, grid.N - si)
                rolled[tuple(sl_to)] = out[tuple(sl_from)]
            else:
                sl_to = [slice(None)] * grid.d
                sl_from = [slice(None)] * grid.d
                sl_to[ax] = slice(0, grid.N + si)
                sl_from[ax] = slice(-si, None)
                rolled[tuple(sl_to)] = out[tuple(sl_from)]
            out = rolled
        return out.reshape(np.asarray(psi).shape)
    if kind == "fourier-translation":
        shift = np.atleast_1d(np.asarray(p, dtype=float))
        x = grid.lattice_axis()
        out = v.astype(complex)
        for ax in range(grid.d):
            s = shift[ax] if shift.size > 1 else shift[0]
            shape = [1] * grid.d
            shape[ax] = grid.N
            out = out * np.exp(-1j * s * x).reshape(shape)
        return out.reshape(np.asarray(psi).shape)
    if kind == "affine":
        s = float(np.atleast_1d(np.asarray(p, dtype=float))[0])
        if s == 1.0:
            return np.asarray(psi).copy()
        if grid.d != 1:
            raise NotImplementedError("affine resampling is implemented for d=1")
        x = grid.lattice_axis()
        vals = np.asarray(psi).reshape(-1)
        out = np.interp(x / s, x, vals.real, left=0.0, right=0.0).astype(complex)
        if np.iscomplexobj(vals):
            out += 1j * np.interp(x / s, x, vals.imag, left=0.0, right=0.0)
        return out.reshape(np.asarray(psi).shape)
    raise ValueError(f"unknown equivalence kind {kind!r}")
