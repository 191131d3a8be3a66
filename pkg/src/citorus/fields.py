"""Periodic field arithmetic on the 3-torus [-pi, pi]^3.

Every field is stored as complex Fourier coefficients c(xi) with integer
frequencies xi in FFT order (0, 1, ..., m/2-1, -m/2, ..., -1) per axis and
the convention

    f(x) = sum_xi c(xi) exp(i xi . x).

The Nyquist planes (|xi_i| = m/2) are kept identically zero, so every field
is a trigonometric polynomial of one-sided band m/2 - 1.  Products are formed
on zero-padded grids large enough to hold the full product band, which makes
all quadratic and cubic expressions exact in floating point.  That exactness
is what the algebraic-identity checks in the rest of the package rely on.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import fft as sfft

# Component order for symmetric 3x3 tensors.
SYM_PAIRS = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
RANK_NCOMP = {"scalar": 1, "vector": 3, "sym": 6}

_fft_workers = 1


def set_fft_workers(n: int) -> None:
    """Set the worker count for scipy FFT calls (results are bit-identical
    for any worker count; this only affects speed)."""
    global _fft_workers
    _fft_workers = max(1, int(n))


def fftn(a: np.ndarray) -> np.ndarray:
    return sfft.fftn(a, axes=(-3, -2, -1), workers=_fft_workers)


def ifftn(a: np.ndarray) -> np.ndarray:
    return sfft.ifftn(a, axes=(-3, -2, -1), workers=_fft_workers)


@dataclass(frozen=True)
class Grid:
    """Collocation setup: n modes per dimension on T^3, uniform time grid."""

    n: int
    t_samples: int = 2
    horizon: float = 1.0

    def __post_init__(self):
        if self.n < 4 or self.n % 2 != 0:
            raise ValueError(f"n must be an even integer >= 4, got {self.n}")
        if self.t_samples < 2:
            raise ValueError(f"t_samples must be >= 2, got {self.t_samples}")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")

    @property
    def dt(self) -> float:
        return self.horizon / (self.t_samples - 1)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.t_samples)

    @property
    def band(self) -> int:
        """Largest representable one-sided frequency (Nyquist excluded)."""
        return self.n // 2 - 1


def freq_1d(m: int) -> np.ndarray:
    """Integer frequencies in FFT order for an m-point axis."""
    return np.fft.fftfreq(m, d=1.0 / m).astype(np.int64)


_freq_cache: dict[int, tuple[np.ndarray, ...]] = {}


def freq_grids(m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(xi1, xi2, xi3, |xi|^2) broadcastable arrays for an m^3 cube."""
    if m not in _freq_cache:
        f = freq_1d(m).astype(np.float64)
        x1 = f[:, None, None]
        x2 = f[None, :, None]
        x3 = f[None, None, :]
        _freq_cache[m] = (x1, x2, x3, x1 * x1 + x2 * x2 + x3 * x3)
    return _freq_cache[m]


def _zero_nyquist(coeffs: np.ndarray) -> np.ndarray:
    m = coeffs.shape[-1]
    ny = m // 2
    coeffs[..., ny, :, :] = 0.0
    coeffs[..., :, ny, :] = 0.0
    coeffs[..., :, :, ny] = 0.0
    return coeffs


def _pad_spectrum(c: np.ndarray, m_to: int) -> np.ndarray:
    """Exact zero-padding of FFT-ordered coefficients to a finer grid."""
    m = c.shape[-1]
    if m_to == m:
        return c
    if m_to < m:
        raise ValueError("use _crop_spectrum to reduce resolution")
    out = np.zeros(c.shape[:-3] + (m_to, m_to, m_to), dtype=np.complex128)
    h = m // 2
    sl = (slice(0, h), slice(m_to - h, m_to))
    src = (slice(0, h), slice(m - h, m))
    for a, sa in zip(sl, src):
        for b, sb in zip(sl, src):
            for cdim, sc in zip(sl, src):
                out[..., a, b, cdim] = c[..., sa, sb, sc]
    return out


def _crop_spectrum(c: np.ndarray, m_to: int) -> np.ndarray:
    """Keep only modes representable on an m_to grid (a spectral projection)."""
    m = c.shape[-1]
    if m_to == m:
        return c.copy()
    if m_to > m:
        raise ValueError("use _pad_spectrum to increase resolution")
    out = np.zeros(c.shape[:-3] + (m_to, m_to, m_to), dtype=np.complex128)
    h = m_to // 2
    sl = (slice(0, h), slice(m_to - h, m_to))
    src = (slice(0, h), slice(m - h, m))
    for a, sa in zip(sl, src):
        for b, sb in zip(sl, src):
            for cdim, sc in zip(sl, src):
                out[..., a, b, cdim] = c[..., sa, sb, sc]
    return _zero_nyquist(out)


@dataclass
class SpectralField:
    """A scalar / vector / symmetric-tensor trigonometric polynomial on T^3.

    ``coeffs`` has shape (ncomp, m, m, m); ``m`` may be smaller than the
    grid's n when the field's band allows it (the representation is exact
    either way).  Fields are treated as immutable values.
    """

    grid: Grid
    rank: str
    coeffs: np.ndarray
    time: float | None = None

    def __post_init__(self):
        if self.rank not in RANK_NCOMP:
            raise ValueError(f"unknown rank {self.rank!r}")
        if self.coeffs.ndim != 4 or self.coeffs.shape[0] != RANK_NCOMP[self.rank]:
            raise ValueError("coeffs shape does not match rank")
        if self.coeffs.shape[1] % 2 != 0:
            raise ValueError("storage resolution must be even")

    # -- basic structure ---------------------------------------------------

    @property
    def m(self) -> int:
        return self.coeffs.shape[-1]

    @property
    def band(self) -> int:
        return self.m // 2 - 1

    @property
    def ncomp(self) -> int:
        return RANK_NCOMP[self.rank]

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.rank, self.coeffs.copy(), self.time)

    def with_coeffs(self, coeffs: np.ndarray) -> "SpectralField":
        return SpectralField(self.grid, self.rank, coeffs, self.time)

    @classmethod
    def zero(cls, grid: Grid, rank: str, m: int | None = None,
             time: float | None = None) -> "SpectralField":
        m = m if m is not None else grid.n
        return cls(grid, rank,
                   np.zeros((RANK_NCOMP[rank], m, m, m), dtype=np.complex128),
                   time)

    @classmethod
    def from_samples(cls, grid: Grid, rank: str, samples: np.ndarray,
                     time: float | None = None) -> "SpectralField":
        """Interpolating trigonometric polynomial of real samples on an
        m^3 collocation cube (Nyquist content is discarded)."""
        if samples.ndim == 3:
            samples = samples[None]
        m = samples.shape[-1]
        coeffs = fftn(samples.astype(np.complex128)) / m**3
        return cls(grid, rank, _zero_nyquist(coeffs), time)

    def resample(self, m_to: int) -> "SpectralField":
        """Exact re-representation on another dyadic cube (pad or project)."""
        if m_to == self.m:
            return self
        if m_to > self.m:
            return self.with_coeffs(_pad_spectrum(self.coeffs, m_to))
        return self.with_coeffs(_crop_spectrum(self.coeffs, m_to))

    def samples(self, m: int | None = None) -> np.ndarray:
        """Real collocation values on an m^3 cube (exact for m >= storage)."""
        m = m if m is not None else self.m
        c = self.coeffs if m == self.m else _pad_spectrum(self.coeffs, m)
        return np.real(ifftn(c) * m**3)

    def compact(self, margin: int = 0) -> "SpectralField":
        """Shrink storage to the smallest cube holding the actual content."""
        b = self.content_band() + margin
        m_to = 2 * (b + 1)
        m_to = max(4, min(self.m, m_to + (m_to % 2)))
        if m_to >= self.m:
            return self
        return self.resample(m_to)

    def content_band(self) -> int:
        """Largest |xi|_inf with a nonzero coefficient."""
        x1, x2, x3, _ = freq_grids(self.m)
        mask = np.any(self.coeffs != 0, axis=0)
        if not mask.any():
            return 0
        amax = np.maximum(np.abs(x1), np.maximum(np.abs(x2), np.abs(x3)))
        return int(np.max(amax[mask]))

    # -- pointwise algebra ---------------------------------------------------

    def _binary(self, other: "SpectralField", op) -> "SpectralField":
        if self.rank != other.rank:
            raise ValueError("rank mismatch")
        m = max(self.m, other.m)
        a = self.resample(m).coeffs
        b = other.resample(m).coeffs
        return SpectralField(self.grid, self.rank, op(a, b), self.time)

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, scalar: float):
        return self.with_coeffs(self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_coeffs(-self.coeffs)

    # -- diagnostics ---------------------------------------------------------

    def mean_mode(self) -> np.ndarray:
        return self.coeffs[:, 0, 0, 0]

    def conjugate_symmetry_error(self) -> float:
        c = self.coeffs
        rev = np.conj(np.roll(c[:, ::-1, ::-1, ::-1], 1, axis=(1, 2, 3)))
        scale = np.max(np.abs(c)) or 1.0
        return float(np.max(np.abs(c - rev)) / scale)

    def divergence_error(self) -> float:
        """Relative size of sum_j xi_j c_j(xi) for a vector field."""
        if self.rank != "vector":
            raise ValueError("divergence_error needs a vector field")
        x1, x2, x3, _ = freq_grids(self.m)
        d = x1 * self.coeffs[0] + x2 * self.coeffs[1] + x3 * self.coeffs[2]
        scale = np.max(np.abs(self.coeffs)) * self.m or 1.0
        return float(np.max(np.abs(d)) / scale)

    def l2_norm(self) -> float:
        """Unnormalized L^2(T^3) norm (Parseval, exact)."""
        return float(np.sqrt((2.0 * np.pi) ** 3 * np.sum(np.abs(self.coeffs) ** 2)))

    def integral(self) -> np.ndarray:
        """Componentwise integral over T^3."""
        return (2.0 * np.pi) ** 3 * np.real(self.mean_mode())

    def pointwise_magnitude(self, m: int | None = None) -> np.ndarray:
        """|f(x)| on the collocation cube: abs, Euclidean, or Frobenius norm."""
        s = self.samples(m)
        if self.rank == "scalar":
            return np.abs(s[0])
        if self.rank == "vector":
            return np.sqrt(s[0] ** 2 + s[1] ** 2 + s[2] ** 2)
        diag = s[0] ** 2 + s[1] ** 2 + s[2] ** 2
        off = s[3] ** 2 + s[4] ** 2 + s[5] ** 2
        return np.sqrt(diag + 2.0 * off)


# -- products (exact, via zero-padded grids) ----------------------------------


def _product_m(*fields: SpectralField) -> int:
    """Storage size whose band holds the full product of the given fields."""
    band = sum(f.band for f in fields)
    m = 2 * (band + 1)
    return m + (m % 2)


def _mul_samples(f: SpectralField, g: SpectralField, m: int):
    return f.samples(m), g.samples(m)


def multiply(f: SpectralField, g: SpectralField,
             out_band: int | None = None) -> SpectralField:
    """Pointwise product of two scalar fields (exact; optional projection)."""
    if f.rank != "scalar" or g.rank != "scalar":
        raise ValueError("multiply expects scalar fields")
    m = _product_m(f, g)
    a, b = _mul_samples(f, g, m)
    out = SpectralField.from_samples(f.grid, "scalar", a * b, f.time)
    return project_band(out, out_band)


def scale_field(a: SpectralField, v: SpectralField,
                out_band: int | None = None) -> SpectralField:
    """Scalar field times vector or symmetric-tensor field (exact)."""
    if a.rank != "scalar":
        raise ValueError("first argument must be scalar")
    m = _product_m(a, v)
    s, w = _mul_samples(a, v, m)
    out = SpectralField.from_samples(v.grid, v.rank, s[0] * w, v.time)
    return project_band(out, out_band)


def dot(u: SpectralField, v: SpectralField,
        out_band: int | None = None) -> SpectralField:
    """Pointwise inner product of two vector fields."""
    m = _product_m(u, v)
    a, b = _mul_samples(u, v, m)
    out = SpectralField.from_samples(u.grid, "scalar",
                                     a[0] * b[0] + a[1] * b[1] + a[2] * b[2],
                                     u.time)
    return project_band(out, out_band)


def cross(u: SpectralField, v: SpectralField,
          out_band: int | None = None) -> SpectralField:
    """Pointwise cross product of two vector fields."""
    m = _product_m(u, v)
    a, b = _mul_samples(u, v, m)
    w = np.stack([a[1] * b[2] - a[2] * b[1],
                  a[2] * b[0] - a[0] * b[2],
                  a[0] * b[1] - a[1] * b[0]])
    out = SpectralField.from_samples(u.grid, "vector", w, u.time)
    return project_band(out, out_band)


def tensor_sym(u: SpectralField, v: SpectralField,
               out_band: int | None = None) -> SpectralField:
    """Symmetric part (u x v + v x u)/2 of the tensor product."""
    m = _product_m(u, v)
    a, b = _mul_samples(u, v, m)
    comps = []
    for (i, j) in SYM_PAIRS:
        comps.append(0.5 * (a[i] * b[j] + a[j] * b[i]))
    out = SpectralField.from_samples(u.grid, "sym", np.stack(comps), u.time)
    return project_band(out, out_band)


def matvec(s: SpectralField, v: SpectralField,
           out_band: int | None = None) -> SpectralField:
    """Pointwise S v for a symmetric-tensor field S and vector field v."""
    m = _product_m(s, v)
    a, b = _mul_samples(s, v, m)
    sxx, syy, szz, sxy, sxz, syz = a
    w = np.stack([sxx * b[0] + sxy * b[1] + sxz * b[2],
                  sxy * b[0] + syy * b[1] + syz * b[2],
                  sxz * b[0] + syz * b[1] + szz * b[2]])
    out = SpectralField.from_samples(v.grid, "vector", w, v.time)
    return project_band(out, out_band)


def project_band(f: SpectralField, band: int | None,
                 ball: bool = False) -> SpectralField:
    """Spectral projection onto |xi|_inf <= band (or the Euclidean ball)."""
    if band is None:
        return f
    if ball:
        x1, x2, x3, sq = freq_grids(f.m)
        mask = sq <= band * band
        return f.with_coeffs(np.where(mask, f.coeffs, 0.0))
    m_to = 2 * (band + 1)
    m_to += m_to % 2
    if m_to >= f.m:
        return f
    return f.resample(m_to)


def const_field(grid: Grid, rank: str, values, m: int = 4,
                time: float | None = None) -> SpectralField:
    """Spatially constant field with the given component values."""
    f = SpectralField.zero(grid, rank, m, time)
    f.coeffs[:, 0, 0, 0] = np.asarray(values, dtype=np.complex128)
    return f


def identity_times(a: SpectralField) -> SpectralField:
    """The symmetric-tensor field a(x) * Id for scalar a."""
    c = np.zeros((6,) + a.coeffs.shape[1:], dtype=np.complex128)
    c[0] = a.coeffs[0]
    c[1] = a.coeffs[0]
    c[2] = a.coeffs[0]
    return SpectralField(a.grid, "sym", c, a.time)


def trace(s: SpectralField) -> SpectralField:
    if s.rank != "sym":
        raise ValueError("trace needs a symmetric-tensor field")
    return SpectralField(s.grid, "scalar",
                         (s.coeffs[0] + s.coeffs[1] + s.coeffs[2])[None], s.time)


def trace_free(s: SpectralField) -> SpectralField:
    """Remove the pointwise trace part: S - (tr S / 3) Id."""
    t = (s.coeffs[0] + s.coeffs[1] + s.coeffs[2]) / 3.0
    c = s.coeffs.copy()
    c[0] -= t
    c[1] -= t
    c[2] -= t
    return SpectralField(s.grid, "sym", c, s.time)


def traceless_pair(u: SpectralField, v: SpectralField,
                   out_band: int | None = None) -> SpectralField:
    """Trace-free symmetrized tensor product: (u ox v + v ox u) - trace part."""
    return trace_free(2.0 * tensor_sym(u, v, out_band))


# -- differential operators (exact Fourier multipliers) -----------------------


def grad(f: SpectralField) -> SpectralField:
    if f.rank != "scalar":
        raise ValueError("grad expects a scalar field")
    x1, x2, x3, _ = freq_grids(f.m)
    c = f.coeffs[0]
    out = np.stack([1j * x1 * c, 1j * x2 * c, 1j * x3 * c])
    return SpectralField(f.grid, "vector", out, f.time)


def div(v: SpectralField) -> SpectralField:
    """Divergence: vector -> scalar, symmetric tensor -> vector (row-wise)."""
    x1, x2, x3, _ = freq_grids(v.m)
    if v.rank == "vector":
        c = 1j * (x1 * v.coeffs[0] + x2 * v.coeffs[1] + x3 * v.coeffs[2])
        return SpectralField(v.grid, "scalar", c[None], v.time)
    if v.rank == "sym":
        sxx, syy, szz, sxy, sxz, syz = v.coeffs
        out = np.stack([
            1j * (x1 * sxx + x2 * sxy + x3 * sxz),
            1j * (x1 * sxy + x2 * syy + x3 * syz),
            1j * (x1 * sxz + x2 * syz + x3 * szz),
        ])
        return SpectralField(v.grid, "vector", out, v.time)
    raise ValueError("div expects a vector or symmetric-tensor field")


def curl(v: SpectralField) -> SpectralField:
    if v.rank != "vector":
        raise ValueError("curl expects a vector field")
    x1, x2, x3, _ = freq_grids(v.m)
    c1, c2, c3 = v.coeffs
    out = np.stack([1j * (x2 * c3 - x3 * c2),
                    1j * (x3 * c1 - x1 * c3),
                    1j * (x1 * c2 - x2 * c1)])
    return SpectralField(v.grid, "vector", out, v.time)


def apply_multiplier(f: SpectralField, mult: np.ndarray) -> SpectralField:
    """Multiply every component's coefficients by a (broadcastable) array."""
    return f.with_coeffs(f.coeffs * mult)


# -- time series ---------------------------------------------------------------


@dataclass
class TimeSeriesField:
    """Ordered snapshots at t_j = j T / (t_samples - 1), linear in between."""

    grid: Grid
    rank: str
    snapshots: list = dc_field(default_factory=list)

    def __post_init__(self):
        if len(self.snapshots) != self.grid.t_samples:
            raise ValueError("snapshot count must equal grid.t_samples")
        for f in self.snapshots:
            if f.rank != self.rank:
                raise ValueError("snapshot rank mismatch")

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    def __getitem__(self, j: int) -> SpectralField:
        return self.snapshots[j]

    def __len__(self) -> int:
        return len(self.snapshots)

    @classmethod
    def build(cls, grid: Grid, rank: str, maker) -> "TimeSeriesField":
        times = grid.times
        snaps = [maker(j, float(t)) for j, t in enumerate(times)]
        for f, t in zip(snaps, times):
            f.time = float(t)
        return cls(grid, rank, snaps)

    @classmethod
    def zero(cls, grid: Grid, rank: str, m: int | None = None) -> "TimeSeriesField":
        return cls.build(grid, rank,
                         lambda j, t: SpectralField.zero(grid, rank, m, t))

    def map(self, fn) -> "TimeSeriesField":
        out = [fn(f) for f in self.snapshots]
        for f, t in zip(out, self.times):
            f.time = float(t)
        return TimeSeriesField(self.grid, out[0].rank, out)

    def __add__(self, other: "TimeSeriesField") -> "TimeSeriesField":
        snaps = [a + b for a, b in zip(self.snapshots, other.snapshots)]
        return TimeSeriesField(self.grid, self.rank, snaps)

    def __sub__(self, other: "TimeSeriesField") -> "TimeSeriesField":
        snaps = [a - b for a, b in zip(self.snapshots, other.snapshots)]
        return TimeSeriesField(self.grid, self.rank, snaps)

    def __mul__(self, s: float) -> "TimeSeriesField":
        return self.map(lambda f: f * s)

    __rmul__ = __mul__

    def scale_by(self, weights: np.ndarray) -> "TimeSeriesField":
        """Multiply snapshot j by the scalar weights[j]."""
        snaps = [f * float(w) for f, w in zip(self.snapshots, weights)]
        return TimeSeriesField(self.grid, self.rank, snaps)

    def at_time(self, t: float) -> SpectralField:
        """Piecewise-linear interpolation in coefficients."""
        times = self.times
        t = float(np.clip(t, times[0], times[-1]))
        j = int(np.clip(np.searchsorted(times, t) - 1, 0, len(times) - 2))
        t0, t1 = times[j], times[j + 1]
        w = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
        out = self.snapshots[j] * (1.0 - w) + self.snapshots[j + 1] * w
        out.time = t
        return out

    def time_derivative(self) -> "TimeSeriesField":
        """Second-order centered differences, one-sided at the endpoints."""
        dt = self.grid.dt
        snaps = []
        nt = len(self.snapshots)
        for j in range(nt):
            if j == 0:
                f = (-1.5 * self.snapshots[0] + 2.0 * self.snapshots[1]
                     - 0.5 * self.snapshots[2]) * (1.0 / dt)
            elif j == nt - 1:
                f = (1.5 * self.snapshots[-1] - 2.0 * self.snapshots[-2]
                     + 0.5 * self.snapshots[-3]) * (1.0 / dt)
            else:
                f = (self.snapshots[j + 1] - self.snapshots[j - 1]) * (0.5 / dt)
            snaps.append(f)
        out = TimeSeriesField(self.grid, self.rank, snaps)
        for f, t in zip(out.snapshots, self.times):
            f.time = float(t)
        return out

    def apply_weight_matrix(self, w: np.ndarray) -> "TimeSeriesField":
        """New series with snapshots_out[j] = sum_i w[j, i] snapshots[i]."""
        m = max(f.m for f in self.snapshots)
        snaps = []
        for j in range(w.shape[0]):
            acc = SpectralField.zero(self.grid, self.rank, m)
            for i in np.nonzero(w[j])[0]:
                acc = acc + self.snapshots[int(i)] * float(w[j, i])
            snaps.append(acc)
        out = TimeSeriesField(self.grid, self.rank, snaps)
        for f, t in zip(out.snapshots, self.times):
            f.time = float(t)
        return out


def series_map2(a: TimeSeriesField, b: TimeSeriesField, fn) -> TimeSeriesField:
    snaps = [fn(x, y) for x, y in zip(a.snapshots, b.snapshots)]
    out = TimeSeriesField(a.grid, snaps[0].rank, snaps)
    for f, t in zip(out.snapshots, a.times):
        f.time = float(t)
    return out


# -- snapshot file format -------------------------------------------------------

_MAGIC = b"CITF"
_RANK_CODE = {"scalar": 0, "vector": 1, "sym": 2}
_CODE_RANK = {v: k for k, v in _RANK_CODE.items()}


def write_snapshot(path, f: SpectralField) -> None:
    """CITF snapshot: magic, u32 version, u32 n, u8 rank, f64 time, then each
    component as n^3 little-endian complex128 in FFT order, xi_1 slowest."""
    n = f.grid.n
    c = f.resample(n).coeffs if f.m != n else f.coeffs
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IIBd", 1, n, _RANK_CODE[f.rank],
                             0.0 if f.time is None else float(f.time)))
        fh.write(np.ascontiguousarray(c, dtype="<c16").tobytes())


def read_snapshot(path, grid: Grid | None = None) -> SpectralField:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise IOError(f"{path}: not a CITF snapshot")
        version, n, rank_code, time = struct.unpack("<IIBd", fh.read(17))
        if version != 1:
            raise IOError(f"{path}: unsupported CITF version {version}")
        rank = _CODE_RANK[rank_code]
        count = RANK_NCOMP[rank] * n**3
        data = np.frombuffer(fh.read(count * 16), dtype="<c16").astype(np.complex128)
    coeffs = data.reshape(RANK_NCOMP[rank], n, n, n)
    g = grid if grid is not None else Grid(n)
    if g.n != n:
        raise IOError(f"{path}: snapshot n={n} does not match grid n={g.n}")
    return SpectralField(g, rank, _zero_nyquist(coeffs.copy()), time)
