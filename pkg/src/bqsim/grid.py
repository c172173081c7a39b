"""Periodic spectral grid with precomputed wavenumber multipliers.

Fields live on the torus [0, L1) x [0, L2) x [0, L3) sampled on an
n1 x n2 x n3 collocation lattice.  Spectral coefficients follow the
expansion f(x) = sum_k f_hat(k) exp(i k.x) with k on the integer lattice
scaled by 2*pi/L per axis, in FFT ordering (0, 1, ..., n/2-1, -n/2, ..., -1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["SpectralGrid", "make_grid"]


@dataclass(frozen=True)
class SpectralGrid:
    """Immutable grid descriptor plus derived multiplier arrays.

    Parameters
    ----------
    shape : tuple of int
        Points per axis (n1, n2, n3); each even and >= 8.
    lengths : tuple of float
        Box lengths per axis; positive.

    Derived arrays (set in ``__post_init__``) broadcast against full
    (n1, n2, n3) spectral arrays:

    - ``kx, ky, kz`` : wavenumber along each axis
    - ``k2``         : |k|^2, ``kh2`` : k1^2 + k2^2
    - ``kmag, khmag``: |k|, |k_h|
    - ``inv_k2``     : 1/|k|^2 with the k=0 mode zeroed
    - ``inv_kh2``    : 1/|k_h|^2 with the k_h=0 fiber zeroed
    - ``disp``       : |k_h|/|k| with 0/0 -> 0 (linear dispersion symbol)
    - ``dealias_mask``: True where every axis index m satisfies |m| <= floor(n/3)
    """

    shape: tuple[int, int, int]
    lengths: tuple[float, float, float]

    kx: np.ndarray = field(init=False, repr=False, compare=False)
    ky: np.ndarray = field(init=False, repr=False, compare=False)
    kz: np.ndarray = field(init=False, repr=False, compare=False)
    k2: np.ndarray = field(init=False, repr=False, compare=False)
    kh2: np.ndarray = field(init=False, repr=False, compare=False)
    kmag: np.ndarray = field(init=False, repr=False, compare=False)
    khmag: np.ndarray = field(init=False, repr=False, compare=False)
    inv_k2: np.ndarray = field(init=False, repr=False, compare=False)
    inv_kh2: np.ndarray = field(init=False, repr=False, compare=False)
    disp: np.ndarray = field(init=False, repr=False, compare=False)
    dealias_mask: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for n in self.shape:
            if n < 8 or n % 2 != 0:
                raise ValueError(f"grid size {n} must be even and >= 8")
        for length in self.lengths:
            if not length > 0:
                raise ValueError(f"box length {length} must be positive")

        axes_k = []
        axes_int = []
        for n, length in zip(self.shape, self.lengths):
            ints = np.fft.fftfreq(n, d=1.0 / n)  # 0, 1, ..., n/2-1, -n/2, ..., -1
            axes_int.append(ints)
            axes_k.append(ints * (2.0 * np.pi / length))

        kx = axes_k[0][:, None, None]
        ky = axes_k[1][None, :, None]
        kz = axes_k[2][None, None, :]
        k2 = kx**2 + ky**2 + kz**2
        kh2 = kx**2 + ky**2

        with np.errstate(divide="ignore", invalid="ignore"):
            inv_k2 = np.where(k2 > 0, 1.0 / np.where(k2 > 0, k2, 1.0), 0.0)
            inv_kh2 = np.where(kh2 > 0, 1.0 / np.where(kh2 > 0, kh2, 1.0), 0.0)
            disp = np.sqrt(kh2 * inv_k2)

        keep = []
        for n, ints in zip(self.shape, axes_int):
            keep.append(np.abs(ints) <= n // 3)
        mask = keep[0][:, None, None] & keep[1][None, :, None] & keep[2][None, None, :]

        object.__setattr__(self, "kx", kx)
        object.__setattr__(self, "ky", ky)
        object.__setattr__(self, "kz", kz)
        object.__setattr__(self, "k2", k2)
        object.__setattr__(self, "kh2", kh2)
        object.__setattr__(self, "kmag", np.sqrt(k2))
        object.__setattr__(self, "khmag", np.sqrt(kh2))
        object.__setattr__(self, "inv_k2", inv_k2)
        object.__setattr__(self, "inv_kh2", inv_kh2)
        object.__setattr__(self, "disp", disp)
        object.__setattr__(self, "dealias_mask", mask)

    @property
    def volume(self) -> float:
        l1, l2, l3 = self.lengths
        return l1 * l2 * l3

    @property
    def npoints(self) -> int:
        n1, n2, n3 = self.shape
        return n1 * n2 * n3

    @property
    def min_spacing(self) -> float:
        return min(length / n for n, length in zip(self.shape, self.lengths))

    def wavenumber_axis(self, axis: int) -> np.ndarray:
        """1D wavenumber array along ``axis`` (1, 2 or 3) in FFT order."""
        if axis not in (1, 2, 3):
            raise ValueError(f"axis must be 1, 2 or 3, got {axis}")
        n = self.shape[axis - 1]
        length = self.lengths[axis - 1]
        return np.fft.fftfreq(n, d=1.0 / n) * (2.0 * np.pi / length)

    def collocation_axis(self, axis: int) -> np.ndarray:
        if axis not in (1, 2, 3):
            raise ValueError(f"axis must be 1, 2 or 3, got {axis}")
        n = self.shape[axis - 1]
        length = self.lengths[axis - 1]
        return np.arange(n) * (length / n)

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x1 = self.collocation_axis(1)
        x2 = self.collocation_axis(2)
        x3 = self.collocation_axis(3)
        return np.meshgrid(x1, x2, x3, indexing="ij")


def make_grid(n1: int, n2: int, n3: int, box_length=2.0 * np.pi) -> SpectralGrid:
    """Build a :class:`SpectralGrid`.

    ``box_length`` is a scalar (cubic box) or a length-3 sequence.
    """
    if np.isscalar(box_length):
        lengths = (float(box_length),) * 3
    else:
        lengths = tuple(float(v) for v in box_length)
        if len(lengths) != 3:
            raise ValueError("box_length must be a scalar or length-3 sequence")
    return SpectralGrid(shape=(int(n1), int(n2), int(n3)), lengths=lengths)
