"""Grid, the sigmoid-minus-step gap, and its continuous-transform approximation.

Conventions: forward transform integral(g(z) exp(-ikz) dz) with no 1/(2pi);
the inverse carries 1/(2L) per bin, i.e. (1/2pi) * dk with dk = pi/L.  On the
lattice z_j = -L + j*dz this pair reduces to an FFT with a (-1)^n phase and is
exactly invertible, so round trips hold to machine precision.

Only the gap is ever transformed.  The bare step is not integrable on the
line; the gap decays like exp(-|z|) so truncation at |z| = L contributes at
most exp(-L).
"""

import csv
from dataclasses import dataclass

import numpy as np

from .activations import sigmoid, step


class SpectrumSymmetryError(ValueError):
    """Raised when a spectrum claimed to describe a real field is asymmetric."""


class GridError(ValueError):
    """Raised on invalid grid parameters or mismatched grids."""


@dataclass
class Grid:
    """Uniform lattice of the activation argument and its wavenumbers.

    z_j = -L + j*dz for j in [0, N) with dz = 2L/N; k_n = pi*n/L for
    n in [-N/2, N/2).  N must be a power of two.
    """

    half_width: float
    n_points: int

    def __post_init__(self):
        if self.half_width <= 0:
            raise GridError("half_width must be positive")
        n = self.n_points
        if n <= 0 or (n & (n - 1)) != 0:
            raise GridError("n_points must be a positive power of two")
        self.dz = 2.0 * self.half_width / n
        self.z = -self.half_width + self.dz * np.arange(n)
        self._n_index = np.arange(-(n // 2), n // 2)
        self.k = np.pi * self._n_index / self.half_width

    def same_as(self, other: "Grid") -> bool:
        return self.half_width == other.half_width and self.n_points == other.n_points

    def require_same(self, other: "Grid"):
        if not self.same_as(other):
            raise GridError(
                f"grid mismatch: ({self.half_width}, {self.n_points}) vs "
                f"({other.half_width}, {other.n_points})"
            )


@dataclass
class ModeSpectrum:
    """Complex mode amplitudes on a grid's wavenumber lattice."""

    grid: Grid
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.grid.n_points,):
            raise GridError(
                f"expected {self.grid.n_points} amplitudes, got {self.amplitudes.shape}"
            )

    def conjugate_symmetry_defect(self) -> float:
        """Max deviation from amplitude(-k) = conj(amplitude(k)).

        The n = -N/2 Nyquist entry has no partner and must be real, as must
        the k = 0 entry.
        """
        a = self.amplitudes
        half = self.grid.n_points // 2
        paired = a[half + 1:]                      # n = 1 .. N/2-1
        partners = a[1:half][::-1]                 # n = -1 .. -(N/2-1)
        defect = float(np.max(np.abs(paired - np.conj(partners)))) if paired.size else 0.0
        return max(defect, abs(a[half].imag), abs(a[0].imag))


def gap(z):
    """Sigmoid minus step: g(z) = -sign(z)/(1+exp(|z|)), 0 at z = 0.

    Odd, bounded by 1/2, decays like exp(-|z|); carries a unit jump at the
    origin.  Computed via exp(-|z|) so large arguments underflow gracefully.
    """
    z = np.asarray(z, dtype=float)
    e = np.exp(-np.abs(z))
    out = -np.sign(z) * e / (1.0 + e)
    return out if out.ndim else float(out)


def sigmoid_samples(grid: Grid) -> np.ndarray:
    return sigmoid(grid.z)


def step_samples(grid: Grid) -> np.ndarray:
    return step(grid.z)


def gap_samples(grid: Grid) -> np.ndarray:
    return gap(grid.z)


def transform_samples(grid: Grid, samples) -> ModeSpectrum:
    """Rectangle-rule approximation of the continuous transform of samples.

    dz * sum_j f(z_j) exp(-i k_n z_j); the -L lattice offset folds into a
    (-1)^n phase on the plain FFT.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (grid.n_points,):
        raise GridError("sample count does not match the grid")
    phase = np.where(grid._n_index % 2 == 0, 1.0, -1.0)
    amplitudes = grid.dz * phase * np.fft.fftshift(np.fft.fft(samples))
    return ModeSpectrum(grid, amplitudes)


def transform_gap(grid: Grid) -> ModeSpectrum:
    """Mode content of the gap on the grid's wavenumber lattice."""
    return transform_samples(grid, gap_samples(grid))


def inverse_transform(spectrum: ModeSpectrum, symmetry_tol: float = 1e-6) -> np.ndarray:
    """Real samples whose forward transform reproduces the spectrum exactly.

    Refuses spectra that are not conjugate-symmetric (the field would not be
    real); the discarded imaginary residue is checked against 1e-9.
    """
    defect = spectrum.conjugate_symmetry_defect()
    if defect > symmetry_tol:
        raise SpectrumSymmetryError(
            f"conjugate symmetry violated by {defect:.3e} (tolerance {symmetry_tol:.1e})"
        )
    grid = spectrum.grid
    phase = np.where(grid._n_index % 2 == 0, 1.0, -1.0)
    rec = np.fft.ifft(np.fft.ifftshift(spectrum.amplitudes * phase / grid.dz))
    residue = float(np.max(np.abs(rec.imag)))
    if residue > 1e-9:
        raise SpectrumSymmetryError(f"imaginary reconstruction residue {residue:.3e}")
    return rec.real


def analytic_gap_spectrum(k):
    """Closed-form continuous transform of the gap: i*(1/k - pi/sinh(pi*k)).

    Equals 2i * integral_0^inf sin(kz)/(exp(z)+1) dz.  Near k = 0 the two
    terms cancel catastrophically, so |k| < 1e-4 switches to the Taylor
    branch i*(pi^2 k/6 - 7 pi^4 k^3/360); for pi|k| > 700 the sinh term has
    underflowed past double precision and is dropped.
    """
    k = np.asarray(k, dtype=float)
    out = np.zeros(k.shape, dtype=complex)
    small = np.abs(k) < 1e-4
    ks = k[small]
    out[small] = 1j * (np.pi**2 * ks / 6.0 - 7.0 * np.pi**4 * ks**3 / 360.0)
    big = ~small
    kb = k[big]
    sinh_term = np.zeros_like(kb)
    safe = np.abs(kb) * np.pi < 700.0
    sinh_term[safe] = np.pi / np.sinh(np.pi * kb[safe])
    out[big] = 1j * (1.0 / kb - sinh_term)
    return out if out.ndim else complex(out)


def parseval_check(spectrum: ModeSpectrum, samples) -> float:
    """Normalized defect between sample energy and spectral energy.

    |dz*sum|f|^2 - (1/2L)*sum|F|^2| / (dz*sum|f|^2); 0 by convention for the
    zero function.
    """
    samples = np.asarray(samples, dtype=float)
    grid = spectrum.grid
    if samples.shape != (grid.n_points,):
        raise GridError("sample count does not match the grid")
    sample_energy = grid.dz * float(np.sum(samples**2))
    if sample_energy == 0.0:
        return 0.0
    spectral_energy = float(np.sum(np.abs(spectrum.amplitudes) ** 2)) / (2.0 * grid.half_width)
    return abs(sample_energy - spectral_energy) / sample_energy


def write_spectrum_csv(path, spectrum: ModeSpectrum):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "re", "im"])
        for kk, a in zip(spectrum.grid.k, spectrum.amplitudes):
            w.writerow([repr(float(kk)), repr(float(a.real)), repr(float(a.imag))])


def read_spectrum_csv(path, grid: Grid) -> ModeSpectrum:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["k", "re", "im"]:
        raise ValueError(f"unexpected spectrum CSV header: {rows[0]}")
    amps = np.array([complex(float(r[1]), float(r[2])) for r in rows[1:]])
    return ModeSpectrum(grid, amps)
