"""The discrete concentration matrix K = D* B D and its fast application.

B is the block-Toeplitz factor built from the difference-grid kernel

    kappa(u) = (1/M^d) * sum_l |mhat_F(xi_l)|^2 exp(i xi_l . u),

u in [-(N-1), N-1]^d, M = 2N-1, and D is the diagonal of space-mask
samples.  The midpoint phase exp(i(-pi + dxi/2) 1.u) is folded into kappa,
which keeps the kernel real (and K real symmetric) whenever |mhat_F|^2 is
even on the grid.  kappa is M-periodic by construction, so circulant
products of size M are exact, not an embedding approximation.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .geometry import Grid


class DimensionError(ValueError):
    """Input length or shape does not match the grid."""


def _shaped(values: np.ndarray, side: int, d: int, what: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.size != side ** d:
        raise DimensionError(f"{what} has {arr.size} entries, expected {side}^{d}")
    return arr.reshape((side,) * d)


def _reverse_all(arr: np.ndarray) -> np.ndarray:
    return arr[(slice(None, None, -1),) * arr.ndim]


@dataclass(frozen=True)
class KernelSamples:
    """Kernel kappa(u) on the centered difference grid plus its circulant spectrum.

    ``centered`` has shape (2N-1,)*d; index u + (N-1) per axis holds kappa(u).
    ``circulant_spectrum`` is the (real) eigenvalue grid of the periodic
    convolution, i.e. |mhat_F|^2 rolled so that apply() is a single
    forward/inverse FFT pair.
    """

    d: int
    N: int
    centered: np.ndarray
    circulant_spectrum: np.ndarray

    @property
    def M(self) -> int:
        return 2 * self.N - 1

    def at(self, u) -> complex:
        """kappa at a difference multi-index u in [-(N-1), N-1]^d."""
        idx = tuple(int(ui) + self.N - 1 for ui in np.atleast_1d(u))
        return complex(self.centered[idx])

    @classmethod
    def from_centered(cls, centered: np.ndarray, d: int, N: int) -> "KernelSamples":
        kfft = np.fft.ifftshift(centered)
        spectrum = np.fft.fftn(kfft).real
        return cls(d=d, N=N, centered=centered, circulant_spectrum=spectrum)


def kernel_samples(fourier_mask_samples: np.ndarray, grid: Grid) -> KernelSamples:
    """Kernel of the Fourier factor from mask samples on the Fourier grid.

    The input is the sampled Fourier mask; its magnitude is squared here.
    One inverse FFT of size (2N-1)^d produces kappa; the result is
    symmetrized so that kappa(-u) == conj(kappa(u)) holds bit-exactly, and
    the imaginary part is dropped when the squared mask is even on the grid
    (it is then zero in exact arithmetic).
    """
    w = _shaped(fourier_mask_samples, grid.M, grid.d, "fourier mask samples")
    w = np.abs(np.asarray(w, dtype=complex)) ** 2 if np.iscomplexobj(w) else np.asarray(w, dtype=float) ** 2
    M, N, d = grid.M, grid.N, grid.d

    kfft = np.fft.ifftn(w).astype(complex)
    # Midpoint phase exp(i(-pi + dxi/2) u) per axis, periodic since M is odd.
    u = np.arange(M, dtype=float)
    phase = np.exp(1j * (-np.pi + grid.dxi / 2.0) * u)
    for axis in range(d):
        shape = [1] * d
        shape[axis] = M
        kfft = kfft * phase.reshape(shape)

    centered = np.fft.fftshift(kfft)
    centered = 0.5 * (centered + np.conj(_reverse_all(centered)))

    even = all(np.array_equal(w, np.flip(w, axis=a)) for a in range(d))
    if even:
        centered = centered.real.astype(complex)

    spectrum = np.roll(w, -(N - 1), axis=tuple(range(d))).astype(float)
    return KernelSamples(d=d, N=N, centered=centered, circulant_spectrum=spectrum)


@dataclass(frozen=True)
class ConcentrationMatrix:
    """Dense Hermitian K together with its factors (mask samples and kernel)."""

    matrix: np.ndarray
    mask: np.ndarray
    kernel: KernelSamples

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def assemble_dense(space_mask_samples: np.ndarray, kernel: KernelSamples) -> ConcentrationMatrix:
    """Dense K with K[j,k] = conj(m_j) kappa(j-k) m_k, Hermitian bit-exactly."""
    d, N = kernel.d, kernel.N
    m = _shaped(space_mask_samples, N, d, "space mask samples").reshape(-1)
    idx = np.arange(N)
    diff = np.subtract.outer(idx, idx) + (N - 1)  # (N, N), values in [0, 2N-2]
    index = []
    for axis in range(d):
        shape = [1] * (2 * d)
        shape[axis] = N
        shape[d + axis] = N
        index.append(diff.reshape(shape))
    n = N ** d
    lookup = kernel.centered[tuple(index)].reshape(n, n)
    K = np.outer(np.conj(m), m) * lookup
    return ConcentrationMatrix(matrix=K, mask=np.asarray(m, dtype=complex), kernel=kernel)


def apply_fast(space_mask_samples: np.ndarray, kernel: KernelSamples, v: np.ndarray) -> np.ndarray:
    """K v in O(N^d log N): mask, exact cyclic convolution with kappa, mask."""
    d, N, M = kernel.d, kernel.N, kernel.M
    m = _shaped(space_mask_samples, N, d, "space mask samples")
    vv = _shaped(v, N, d, "input vector")
    g = np.zeros((M,) * d, dtype=complex)
    g[(slice(0, N),) * d] = m * vv
    h = np.fft.ifftn(np.fft.fftn(g) * kernel.circulant_spectrum)
    out = np.conj(m) * h[(slice(0, N),) * d]
    return out.reshape(np.asarray(v).shape)


class FastOperator:
    """Callable handle applying K(mask, kernel) to flat vectors."""

    def __init__(self, space_mask_samples: np.ndarray, kernel: KernelSamples):
        self.mask = np.asarray(space_mask_samples).reshape(-1)
        self.kernel = kernel
        self.n = kernel.N ** kernel.d

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return apply_fast(self.mask, self.kernel, np.asarray(v).reshape(-1))


@dataclass(frozen=True)
class StructureReport:
    """Residuals of the structural identities of an assembled matrix."""

    hermitian_max: float
    frobenius_rel_residual: float
    eigenvalue_min: float
    eigenvalue_max: float
    psd_ok: bool
    sorted_ok: bool

    @property
    def ok(self) -> bool:
        return (
            self.hermitian_max == 0.0
            and self.frobenius_rel_residual <= 1e-10
            and self.psd_ok
            and self.sorted_ok
        )

    def lines(self) -> list[str]:
        return [
            f"hermitian max |K - K*|      : {self.hermitian_max:.3e}",
            f"frobenius identity residual : {self.frobenius_rel_residual:.3e}",
            f"eigenvalue range            : [{self.eigenvalue_min:.6e}, {self.eigenvalue_max:.6e}]",
            f"positive semidefinite       : {'ok' if self.psd_ok else 'FAILED'}",
            f"descending order            : {'ok' if self.sorted_ok else 'FAILED'}",
        ]


def hilbert_schmidt_checks(K: ConcentrationMatrix, spectrum) -> StructureReport:
    """Check Hermiticity, the Frobenius/eigenvalue-sum identity and PSD.

    Failures are reported in the returned record, never raised.
    """
    A = K.matrix
    values = np.asarray(spectrum.values, dtype=float)
    herm = float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0
    fro2 = float(np.sum(np.abs(A) ** 2))
    sum2 = float(np.sum(values ** 2))
    rel = abs(sum2 - fro2) / fro2 if fro2 > 0 else abs(sum2 - fro2)
    lam_max = float(values[0]) if values.size else 0.0
    lam_min = float(values[-1]) if values.size else 0.0
    return StructureReport(
        hermitian_max=herm,
        frobenius_rel_residual=rel,
        eigenvalue_min=lam_min,
        eigenvalue_max=lam_max,
        psd_ok=lam_min >= -1e-10 * max(lam_max, 0.0),
        sorted_ok=bool(np.all(np.diff(values) <= 0)),
    )


# ---------------------------------------------------------------------------
# Binary dumps: 8 little-endian int64 header + complex128 payload.

MAGIC = 0x534C504B  # "SLPK"
DUMP_VERSION = 1
KIND_KERNEL = 0
KIND_MATRIX = 1

_HEADER = struct.Struct("<8q")


def _write_dump(path, d: int, N: int, kind: int, payload: np.ndarray) -> None:
    data = np.ascontiguousarray(payload, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, DUMP_VERSION, d, N, kind, 0, 0, 0))
        fh.write(data.tobytes())


def _read_dump(path, expect_kind: int):
    with open(path, "rb") as fh:
        header = _HEADER.unpack(fh.read(_HEADER.size))
        magic, version, d, N, kind = header[:5]
        if magic != MAGIC:
            raise DimensionError(f"bad dump magic {magic:#x} in {path}")
        if version != DUMP_VERSION:
            raise DimensionError(f"unsupported dump version {version} in {path}")
        if kind != expect_kind:
            raise DimensionError(f"dump kind {kind} in {path}, expected {expect_kind}")
        payload = np.frombuffer(fh.read(), dtype="<c16").astype(complex)
    return d, N, payload


def write_kernel_dump(path, kernel: KernelSamples) -> None:
    _write_dump(path, kernel.d, kernel.N, KIND_KERNEL, kernel.centered)


def read_kernel_dump(path) -> KernelSamples:
    d, N, payload = _read_dump(path, KIND_KERNEL)
    M = 2 * N - 1
    centered = payload.reshape((M,) * d)
    return KernelSamples.from_centered(centered, d=d, N=N)


def write_matrix_dump(path, K: ConcentrationMatrix) -> None:
    _write_dump(path, K.kernel.d, K.kernel.N, KIND_MATRIX, K.matrix)


def read_matrix_dump(path):
    """Return (matrix, d, N) from a matrix dump."""
    d, N, payload = _read_dump(path, KIND_MATRIX)
    n = N ** d
    return payload.reshape(n, n), d, N
