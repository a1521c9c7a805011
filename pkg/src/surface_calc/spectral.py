"""Periodic grids and 2D Fourier transforms on the parameter square [0, 2pi)^2.

Scalar fields are plain ``(N, N)`` float64 arrays indexed ``[l, k]`` where
``k`` is the u index (fastest) and ``l`` the v index, so ``values.ravel()``
gives the linear index ``l*N + k``.  Spectra are ``(N, N)`` complex arrays in
standard FFT layout: axis 1 carries the u mode ``m``, axis 0 the v mode ``n``,
both running ``0, 1, ..., (N-1)/2, -(N-1)/2, ..., -1``.

The forward transform carries the normalization ``1/N^2`` so that the
coefficient of the constant function is its mean; the inverse is the bare
exponential sum.  Only odd ``N`` is supported: the mode range is then the
symmetric set ``-(N-1)/2 .. (N-1)/2`` with no sign-ambiguous Nyquist mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as _fft

__all__ = [
    "Grid",
    "dft2_forward",
    "dft2_inverse",
    "apply_mode_symbol",
    "mean_value",
    "mode_coefficient",
]

# Largest tolerated ratio max|imag| / max|real| when casting an inverse
# transform back to a real field.
_IMAG_RESIDUE_RTOL = 1e-11


@dataclass(frozen=True)
class Grid:
    """Uniform N x N periodic grid on [0, 2pi)^2 with odd N.

    Parameters
    ----------
    n : int
        Number of points per direction; must be odd and >= 3.
    """

    n: int

    def __post_init__(self) -> None:
        if self.n < 3 or self.n % 2 == 0:
            raise ValueError(f"grid size must be odd and >= 3, got {self.n}")

    @property
    def spacing(self) -> float:
        """Node spacing h = 2pi/N."""
        return 2.0 * np.pi / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        """1D node coordinates k*h, k = 0..N-1."""
        return np.arange(self.n) * self.spacing

    @cached_property
    def u_mesh(self) -> np.ndarray:
        """(N, N) array of u values, varying along axis 1."""
        return np.broadcast_to(self.nodes[None, :], (self.n, self.n)).copy()

    @cached_property
    def v_mesh(self) -> np.ndarray:
        """(N, N) array of v values, varying along axis 0."""
        return np.broadcast_to(self.nodes[:, None], (self.n, self.n)).copy()

    @cached_property
    def modes(self) -> np.ndarray:
        """Integer modes in FFT layout: 0..(N-1)/2, -(N-1)/2..-1."""
        return np.fft.fftfreq(self.n, 1.0 / self.n).astype(np.int64)

    @cached_property
    def mode_u(self) -> np.ndarray:
        """u modes m, shape (1, N), broadcastable over a spectrum."""
        return self.modes[None, :]

    @cached_property
    def mode_v(self) -> np.ndarray:
        """v modes n, shape (N, 1), broadcastable over a spectrum."""
        return self.modes[:, None]

    @cached_property
    def mode_sq(self) -> np.ndarray:
        """(N, N) array of m^2 + n^2."""
        return self.mode_u**2 + self.mode_v**2

    def zeros(self) -> np.ndarray:
        """A zero scalar field on this grid."""
        return np.zeros((self.n, self.n))


def dft2_forward(values: np.ndarray) -> np.ndarray:
    """Forward 2D transform with 1/N^2 normalization.

    coeff(m, n) = (1/N^2) sum_{k,l} f(u_k, v_l) exp(-i(m u_k + n v_l)).
    """
    values = np.asarray(values)
    n = values.shape[-1]
    return _fft.fft2(values) / n**2


def dft2_inverse(coeffs: np.ndarray, check_residue: bool = True) -> np.ndarray:
    """Inverse transform of a conjugate-symmetric spectrum to a real field.

    values(k, l) = sum_{m,n} coeff(m, n) exp(+i(m u_k + n v_l)).

    The imaginary part of the exponential sum is discarded after checking it
    is negligible; a large residue means the spectrum was not conjugate
    symmetric, i.e. it does not represent a real field.

    Raises
    ------
    ValueError
        If max|imag| exceeds 1e-11 of max|real| and ``check_residue`` is set.
    """
    coeffs = np.asarray(coeffs)
    n = coeffs.shape[-1]
    out = _fft.ifft2(coeffs) * n**2
    if check_residue:
        imag_max = np.abs(out.imag).max()
        real_max = np.abs(out.real).max()
        if imag_max > _IMAG_RESIDUE_RTOL * max(real_max, np.finfo(float).tiny):
            raise ValueError(
                "spectrum is not conjugate symmetric: imaginary residue "
                f"{imag_max:.3e} vs real magnitude {real_max:.3e}"
            )
    return np.ascontiguousarray(out.real)


def apply_mode_symbol(values: np.ndarray, symbol: np.ndarray) -> np.ndarray:
    """Apply a Fourier-diagonal operator: inverse(symbol * forward(values)).

    Parameters
    ----------
    values : (N, N) real array
    symbol : array broadcastable to (N, N), the multiplier sigma(m, n) laid
        out like a spectrum (u mode along axis 1, v mode along axis 0).
        Build symbols from ``grid.mode_u`` / ``grid.mode_v``, e.g. the
        u derivative is ``1j * grid.mode_u``.
    """
    return dft2_inverse(dft2_forward(values) * symbol)


def mean_value(values: np.ndarray) -> float:
    """Plain grid mean (1/N^2) sum(values); equals coeff(0, 0)."""
    return float(np.mean(values))


def mode_coefficient(coeffs: np.ndarray, m: int, n: int) -> complex:
    """Coefficient of mode (m, n) from an FFT-layout spectrum."""
    size = coeffs.shape[-1]
    half = (size - 1) // 2
    if abs(m) > half or abs(n) > half:
        raise ValueError(f"mode ({m}, {n}) outside range +-{half}")
    return complex(coeffs[n % size, m % size])
