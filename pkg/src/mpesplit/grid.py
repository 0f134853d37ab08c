"""Periodic uniform grids, Fourier transforms, and the exact linear propagator.

The linear half of every model here is u_t = nu * Laplacian(u) on a periodic
box, solved exactly in Fourier space: each coefficient is multiplied by
exp(-tau * nu * lambda) where lambda = (2*pi*p/L)**2 + (2*pi*q/L)**2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as _fft


class SpectralGrid:
    """Uniform periodic grid on [0, L)^dim with precomputed Fourier symbols.

    Wavenumber layout per axis follows the standard FFT order
    0, 1, ..., N/2-1, -N/2, -N/2+1, ..., -1 (the Nyquist slot holds -N/2).
    The Laplacian symbol treats Nyquist like any other mode; the first
    derivative multiplier zeroes it (odd operator on an even grid).
    """

    def __init__(self, dim: int, n_per_axis: int, length: float):
        if dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {dim}")
        if n_per_axis < 2 or n_per_axis % 2 != 0:
            raise ValueError(f"n_per_axis must be even and >= 2, got {n_per_axis}")
        if not (length > 0):
            raise ValueError(f"length must be positive, got {length}")
        self.dim = dim
        self.n = int(n_per_axis)
        self.length = float(length)
        self.h = self.length / self.n
        k1 = 2.0 * math.pi / self.length * np.fft.fftfreq(self.n, d=1.0 / self.n)
        kd = k1.copy()
        kd[self.n // 2] = 0.0
        if dim == 1:
            self._lam = k1**2
            self._deriv = (1j * kd,)
        else:
            self._lam = (k1**2)[:, None] + (k1**2)[None, :]
            self._deriv = (1j * kd[:, None], 1j * kd[None, :])

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def laplacian_symbols(self):
        return self._lam

    def axis_points(self) -> np.ndarray:
        """Nodes of one axis, starting at 0."""
        return self.h * np.arange(self.n)

    def nodes(self):
        """Meshgrid of node coordinates, ij indexing, origin at 0."""
        x = self.axis_points()
        if self.dim == 1:
            return (x,)
        return np.meshgrid(x, x, indexing="ij")

    def forward(self, values: np.ndarray) -> np.ndarray:
        """Unnormalized forward DFT."""
        return _fft.fftn(values)

    def inverse(self, spectrum: np.ndarray) -> np.ndarray:
        """Inverse DFT carrying the 1/N^dim factor."""
        return _fft.ifftn(spectrum)

    def integrate(self, values: np.ndarray) -> float | complex:
        """Rectangle rule h^dim * sum, spectrally accurate for periodic data."""
        return self.h**self.dim * values.sum()

    def gradient(self, values: np.ndarray):
        """Spectral first derivatives along each axis, Nyquist zeroed."""
        spec = self.forward(values)
        out = []
        for mult in self._deriv:
            g = self.inverse(mult * spec)
            out.append(g.real if np.isrealobj(values) else g)
        return tuple(out)

    def __eq__(self, other):
        return (
            isinstance(other, SpectralGrid)
            and self.dim == other.dim
            and self.n == other.n
            and self.length == other.length
        )

    def __repr__(self):
        return f"SpectralGrid(dim={self.dim}, n={self.n}, length={self.length})"


def make_grid(dim: int, n_per_axis: int, length: float) -> SpectralGrid:
    return SpectralGrid(dim, n_per_axis, length)


@dataclass
class Field:
    grid: SpectralGrid
    values: np.ndarray
    scalar_kind: str = "real"  # "real" | "complex"

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}"
            )
        if self.scalar_kind not in ("real", "complex"):
            raise ValueError(f"bad scalar_kind {self.scalar_kind!r}")


def laplacian_symbol(grid: SpectralGrid, index) -> float:
    """Symbol lambda at a signed wavenumber multi-index.

    Valid single-axis indices run from -N/2 to N/2-1.
    """
    if grid.dim == 1 and isinstance(index, int):
        index = (index,)
    index = tuple(index)
    if len(index) != grid.dim:
        raise ValueError(f"index {index} has wrong dimension for {grid}")
    half = grid.n // 2
    for p in index:
        if not (-half <= p <= half - 1):
            raise ValueError(f"wavenumber {p} out of range [-{half}, {half - 1}]")
    return float(sum((2.0 * math.pi * p / grid.length) ** 2 for p in index))


def _as_values(x):
    return x.values if isinstance(x, Field) else x


def _like(x, values, scalar_kind=None):
    if isinstance(x, Field):
        kind = scalar_kind or x.scalar_kind
        return Field(x.grid, values, kind)
    return values


def linear_propagate(field, nu: complex, tau: float, grid: SpectralGrid | None = None,
                     allow_backward: bool = False):
    """Apply exp(tau * nu * Laplacian) via the Fourier multiplier exp(-tau*nu*lambda).

    For real nu > 0 a negative tau grows every mode without bound, so it is
    rejected unless allow_backward is set (the negative-coefficient scheme
    needs it, and accepts the consequences).
    """
    if isinstance(field, Field):
        grid = field.grid
    if grid is None:
        raise ValueError("grid required when propagating a bare array")
    nu = complex(nu)
    if tau < 0 and nu.real > 0 and nu.imag == 0 and not allow_backward:
        raise ValueError("backward step with dissipative nu requires allow_backward")
    values = _as_values(field)
    if nu.imag == 0 and np.isrealobj(values):
        mult = np.exp(-tau * nu.real * grid._lam)
        out = _fft.ifftn(mult * _fft.fftn(values)).real
        return _like(field, out)
    mult = np.exp(-tau * nu * grid._lam)
    out = _fft.ifftn(mult * _fft.fftn(values).astype(np.complex128))
    return _like(field, out, scalar_kind="complex")


# ---------------------------------------------------------------------------
# serialization: flat little-endian binary + JSON sidecar, and CSV export

def save_field(field: Field, basepath: str) -> None:
    """Write <basepath>.bin (LE float64, re/im interleaved when complex) and
    <basepath>.json with {dim, n, length, scalar_kind}."""
    v = field.values
    if field.scalar_kind == "complex":
        flat = np.empty(2 * v.size, dtype="<f8")
        flat[0::2] = v.ravel().real
        flat[1::2] = v.ravel().imag
    else:
        flat = np.ascontiguousarray(v.ravel().real, dtype="<f8")
    with open(basepath + ".bin", "wb") as fh:
        fh.write(flat.tobytes())
    sidecar = {
        "dim": field.grid.dim,
        "n": field.grid.n,
        "length": field.grid.length,
        "scalar_kind": field.scalar_kind,
    }
    with open(basepath + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=1)
        fh.write("\n")


def load_field(basepath: str) -> Field:
    with open(basepath + ".json") as fh:
        meta = json.load(fh)
    grid = make_grid(meta["dim"], meta["n"], meta["length"])
    raw = np.fromfile(basepath + ".bin", dtype="<f8")
    if meta["scalar_kind"] == "complex":
        values = (raw[0::2] + 1j * raw[1::2]).reshape(grid.shape)
    else:
        values = raw.reshape(grid.shape)
    return Field(grid, values, meta["scalar_kind"])


def field_to_csv(field: Field, path: str) -> None:
    """Node table for plotting: x[,y] columns then value (re/im for complex)."""
    coords = field.grid.nodes()
    cols = [c.ravel() for c in coords]
    names = ["x", "y"][: field.grid.dim]
    v = field.values.ravel()
    if field.scalar_kind == "complex":
        names += ["value_re", "value_im"]
        cols += [v.real, v.imag]
    else:
        names += ["value"]
        cols += [v.real]
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for row in zip(*cols):
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
