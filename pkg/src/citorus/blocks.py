"""Spatial building blocks (intermittent jets and Mikado pipes), their
incompressibility correctors, and temporal concentration profiles.

The concentration profiles are periodized band-limited bumps; the planar
profile pair is linked exactly by phi = -r^2 Laplace(Phi) in profile modes,
which makes the curl-curl corrector identities hold to machine precision on
the grid.  Blocks are normalized so the cell average of W (x) W equals
k1 (x) k1 exactly; that normalization is what the amplitude-layer algebra
rests on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fields import Grid, SpectralField, cross, curl, freq_grids, grad, multiply
from .geometry import GeometrySet, WaveFrame
from .params import LevelParams, RegimeError


class AliasingError(ValueError):
    """The requested block does not fit on the grid; carries the minimum
    resolution that would."""

    def __init__(self, msg: str, required_n: int):
        super().__init__(msg)
        self.required_n = required_n


# -- scalar bump machinery -------------------------------------------------------


def bump(u):
    u = np.asarray(u, dtype=np.float64)
    inside = np.abs(u) < 1.0
    w = np.where(inside, 1.0 - u * u, 1.0)
    return np.where(inside, np.exp(-1.0 / w), 0.0)


def bump_d1(u):
    u = np.asarray(u, dtype=np.float64)
    inside = np.abs(u) < 1.0
    w = np.where(inside, 1.0 - u * u, 1.0)
    return np.where(inside, bump(u) * (-2.0 * u) / w**2, 0.0)


def bump_d2(u):
    u = np.asarray(u, dtype=np.float64)
    inside = np.abs(u) < 1.0
    w = np.where(inside, 1.0 - u * u, 1.0)
    term = 4.0 * u * u / w**4 - 2.0 / w**2 - 8.0 * u * u / w**3
    return np.where(inside, bump(u) * term, 0.0)


# -- periodized band-limited profiles --------------------------------------------


@dataclass(frozen=True)
class LineProfile:
    """1-D mean-zero profile on T with coefficients psi_hat[-J..J] (centered
    index), unit normalized power: sum |psi_hat|^2 = 1."""

    r: float
    j_modes: int
    psi_hat: np.ndarray

    def eval(self, y: np.ndarray, deriv: int = 0) -> np.ndarray:
        j = np.arange(-self.j_modes, self.j_modes + 1)
        phase = np.exp(1j * np.outer(y, j))
        return np.real(phase @ ((1j * j) ** deriv * self.psi_hat))

    def power(self) -> float:
        return float(np.sum(np.abs(self.psi_hat) ** 2))

    def lp_norm(self, p: float, deriv: int = 0, quad: int = 4096) -> float:
        """L^p norm on T with the normalized measure."""
        y = np.linspace(0.0, 2.0 * np.pi, quad, endpoint=False)
        vals = np.abs(self.eval(y, deriv))
        if np.isinf(p):
            return float(np.max(vals))
        return float(np.mean(vals**p) ** (1.0 / p))


@dataclass(frozen=True)
class PlaneProfile:
    """2-D profile pair on T^2: a potential Phi and phi = -r^2 Laplace(Phi),
    stored as centered coefficient squares, with sum |phi_hat|^2 = 1."""

    r: float
    j_modes: int
    phi_hat: np.ndarray
    pot_hat: np.ndarray

    def eval(self, y1: np.ndarray, y2: np.ndarray, da: int = 0, db: int = 0,
             which: str = "phi") -> np.ndarray:
        j = np.arange(-self.j_modes, self.j_modes + 1)
        c = self.phi_hat if which == "phi" else self.pot_hat
        c = ((1j * j[:, None]) ** da * (1j * j[None, :]) ** db) * c
        e1 = np.exp(1j * np.outer(y1, j))
        e2 = np.exp(1j * np.outer(y2, j))
        return np.real(np.einsum("ai,ij,bj->ab", e1, c, e2))

    def power(self) -> float:
        return float(np.sum(np.abs(self.phi_hat) ** 2))

    def lp_norm_grouped(self, p: float, n_order: int, quad: int = 512,
                        which: str = "phi") -> float:
        """L^p (normalized measure on T^2) of the pointwise Euclidean norm of
        the full order-n_order derivative tensor of the profile."""
        y = np.linspace(0.0, 2.0 * np.pi, quad, endpoint=False)
        total = np.zeros((quad, quad))
        for a in range(n_order + 1):
            b = n_order - a
            w = math.comb(n_order, a)
            vals = self.eval(y, y, a, b, which)
            total += w * vals * vals
        mag = np.sqrt(total)
        if np.isinf(p):
            return float(np.max(mag))
        return float(np.mean(mag**p) ** (1.0 / p))


@lru_cache(maxsize=64)
def line_profile(r: float, j_modes: int) -> LineProfile:
    """Periodized 1-D profile: derivative-of-bump at width r, band-limited to
    |j| <= j_modes (sampled with 4x oversampling), mean-zero, unit power."""
    if not (0 < r <= 1.0):
        raise ValueError("concentration scale must lie in (0, 1]")
    dense = max(512, 8 * j_modes)
    y = np.linspace(-np.pi, np.pi, dense, endpoint=False)
    vals = bump_d1(y / r)
    c = np.fft.fft(np.fft.ifftshift(vals)) / dense
    j = np.arange(-j_modes, j_modes + 1)
    psi_hat = c[j % dense].copy()
    psi_hat[j_modes] = 0.0  # exact zero mean
    power = np.sum(np.abs(psi_hat) ** 2)
    if power <= 0:
        raise ValueError("degenerate line profile")
    return LineProfile(r, j_modes, psi_hat / np.sqrt(power))


@lru_cache(maxsize=64)
def plane_profile(r: float, j_modes: int) -> PlaneProfile:
    """Periodized 2-D bump potential and its profile phi = -r^2 Lap(Phi),
    band-limited to |m|_inf <= j_modes and normalized to unit phi power."""
    if not (0 < r <= 1.0):
        raise ValueError("concentration scale must lie in (0, 1]")
    dense = max(256, 8 * j_modes)
    y = np.linspace(-np.pi, np.pi, dense, endpoint=False)
    rad = np.sqrt(y[:, None] ** 2 + y[None, :] ** 2)
    vals = bump(rad / r)
    c = np.fft.fft2(np.fft.ifftshift(vals)) / dense**2
    j = np.arange(-j_modes, j_modes + 1)
    pot = c[np.ix_(j % dense, j % dense)].copy()
    lap = j[:, None] ** 2 + j[None, :] ** 2
    phi = (r * r) * lap * pot
    power = np.sum(np.abs(phi) ** 2)
    if power <= 0:
        raise ValueError("degenerate plane profile")
    s = 1.0 / np.sqrt(power)
    return PlaneProfile(r, j_modes, phi * s, pot * s)


# -- 3-D realization on the grid --------------------------------------------------


def _int_vec(frac_vec, scale: int) -> np.ndarray:
    out = []
    for x in frac_vec:
        y = x * scale
        if y.denominator != 1:
            raise ValueError("frame does not scale to integers")
        out.append(int(y))
    return np.array(out, dtype=np.int64)


@dataclass
class BlockField:
    """One realized building block for a direction frame: the block W, its
    potential W^c, and (for jets) the corrector companion.

    kind is "jet" (traveling, concentrated in all three directions) or
    "mikado" (steady pipe).  Fields are exact trigonometric polynomials on
    the block's mode lattice."""

    kind: str
    frame: WaveFrame
    grid: Grid
    params: LevelParams
    n_lambda: int
    plane: PlaneProfile
    line: LineProfile | None
    m_store: int

    def __post_init__(self):
        self._K = _int_vec(self.frame.k, self.n_lambda)
        self._K1 = _int_vec(self.frame.k1, self.n_lambda)
        self._K2 = _int_vec(self.frame.k2, self.n_lambda)
        self._kfac = self.params.lam_r_perp
        self._k1f = np.array([float(x) for x in self.frame.k1])

    # mode bookkeeping ---------------------------------------------------

    @property
    def lam_r_n(self) -> int:
        """lambda r_perp N_Lambda: the fundamental lattice frequency."""
        return self._kfac * self.n_lambda

    def mu_phase_rate(self) -> float:
        """Time frequency of profile mode j is j * lambda r_perp N mu."""
        return self._kfac * self.n_lambda * self.params.mu

    def _lattice(self, with_line: bool):
        jj = (np.arange(-self.line.j_modes, self.line.j_modes + 1)
              if with_line else np.array([0]))
        mm = np.arange(-self.plane.j_modes, self.plane.j_modes + 1)
        return jj, mm

    def _fill(self, weights, vectors, with_line: bool) -> SpectralField:
        """Dense cube from lattice data: weights[j, m1, m2] (complex) and
        vectors[j, m1, m2, 3] (or a constant vector)."""
        jj, mm = self._lattice(with_line)
        xi = (self._kfac * (jj[:, None, None, None] * self._K1
                            + mm[None, :, None, None] * self._K
                            + mm[None, None, :, None] * self._K2))
        m = self.m_store
        idx = xi % m
        w = np.asarray(weights, dtype=np.complex128)
        if np.ndim(vectors) == 1:
            vec = np.broadcast_to(np.asarray(vectors, dtype=np.complex128),
                                  w.shape + (3,))
        else:
            vec = np.asarray(vectors, dtype=np.complex128)
        out = SpectralField.zero(self.grid, "vector", m)
        flat_idx = (idx[..., 0] * m + idx[..., 1]) * m + idx[..., 2]
        for comp in range(3):
            np.add.at(out.coeffs[comp].reshape(-1), flat_idx.ravel(),
                      (w * vec[..., comp]).ravel())
        return out

    def _weights(self, t: float, line_deriv_phase: int = 0) -> np.ndarray:
        """psi_hat(t) (x) phi_hat lattice weights (phi_hat only for mikado)."""
        if self.kind == "mikado":
            return self.plane.phi_hat[None, :, :]
        jj, _ = self._lattice(True)
        phase = np.exp(1j * jj * self.mu_phase_rate() * t)
        psi_t = self.line.psi_hat * phase
        if line_deriv_phase:
            psi_t = psi_t * (1j * jj * self.mu_phase_rate()) ** line_deriv_phase
        return psi_t[:, None, None] * self.plane.phi_hat[None, :, :]

    def _pot_weights(self, t: float) -> np.ndarray:
        if self.kind == "mikado":
            return self.plane.pot_hat[None, :, :]
        jj, _ = self._lattice(True)
        phase = np.exp(1j * jj * self.mu_phase_rate() * t)
        return (self.line.psi_hat * phase)[:, None, None] * \
            self.plane.pot_hat[None, :, :]

    # realized fields ------------------------------------------------------

    def w_at(self, t: float = 0.0) -> SpectralField:
        """The block W = psi phi k1 (jet) or phi k1 (mikado)."""
        f = self._fill(self._weights(t), self._k1f, self.kind == "jet")
        f.time = t
        return f

    def wc_at(self, t: float = 0.0) -> SpectralField:
        """The curl-curl potential W^c."""
        scale = 1.0 / (float(self.params.lambda_q1) ** 2 * self.n_lambda**2)
        f = self._fill(self._pot_weights(t), self._k1f,
                       self.kind == "jet") * scale
        f.time = t
        return f

    def wc_tilde_at(self, t: float = 0.0) -> SpectralField:
        """Corrector making W + Wc_tilde divergence-free (jets; zero for
        mikado blocks, which are divergence-free outright)."""
        if self.kind == "mikado":
            f = SpectralField.zero(self.grid, "vector", 4)
            f.time = t
            return f
        scale = 1.0 / (float(self.params.lambda_q1) ** 2 * self.n_lambda**2)
        jj, _ = self._lattice(True)
        phase = np.exp(1j * jj * self.mu_phase_rate() * t)
        psi_t = self.line.psi_hat * phase
        # psi depends only on k1 . x, so grad(psi) lives on the line lattice
        # (plane index pinned to m = 0) and points along k1
        line_only = np.zeros_like(self.plane.pot_hat)
        line_only[self.plane.j_modes, self.plane.j_modes] = 1.0
        grad_psi = self._fill(
            (1j * jj * self._kfac * self.n_lambda * psi_t)[:, None, None]
            * line_only[None, :, :], self._k1f, True)
        pot_vec = self._fill(self.plane.pot_hat[None, :, :], self._k1f, False)
        f = cross(grad_psi, curl(pot_vec)) * scale
        f.time = t
        return f

    def psi_phi_scalar_at(self, t: float = 0.0) -> SpectralField:
        """Scalar psi phi (jets) or phi (mikado): W = this scalar times k1."""
        w = self._fill(self._weights(t), np.array([1.0, 0.0, 0.0]),
                       self.kind == "jet")
        out = SpectralField(self.grid, "scalar", w.coeffs[:1], t)
        return out

    def mean_ww(self) -> np.ndarray:
        """Cell average of W (x) W over T^3 (exact, = k1 (x) k1 by the
        profile normalization)."""
        p = self.plane.power() * (self.line.power() if self.kind == "jet"
                                  else 1.0)
        return p * np.outer(self._k1f, self._k1f)

    def traveling_time_derivative(self, f: SpectralField) -> SpectralField:
        """d/dt of a field whose time dependence rides on the traveling
        phase (k1 . x + mu t): exactly mu times the k1-directional
        derivative."""
        if self.kind != "jet":
            raise RegimeError("mikado blocks are steady")
        x1, x2, x3, _ = freq_grids(f.m)
        k1 = self._k1f
        mult = 1j * (k1[0] * x1 + k1[1] * x2 + k1[2] * x3) * self.params.mu
        return f.with_coeffs(f.coeffs * mult)


def _max_lattice_band(frame: WaveFrame, n_lambda: int, kfac: int,
                      j_line: int, j_plane: int) -> int:
    ks = [_int_vec(frame.k1, n_lambda), _int_vec(frame.k, n_lambda),
          _int_vec(frame.k2, n_lambda)]
    comp_max = (j_line * np.abs(ks[0]) + j_plane * np.abs(ks[1])
                + j_plane * np.abs(ks[2]))
    return int(kfac * np.max(comp_max))


def block_mode_budget(geom: GeometrySet, params: LevelParams, band: int,
                      kind: str | None = None) -> int:
    """Largest profile mode count J that keeps every lattice frequency of
    every frame within |xi|_inf <= band."""
    kind = kind or ("jet" if params.regime == "S1" else "mikado")
    j = 0
    while True:
        jn = j + 1
        j_line = jn if kind == "jet" else 0
        ok = all(_max_lattice_band(f, geom.n_lambda, params.lam_r_perp,
                                   j_line, jn) <= band for f in geom.frames)
        if not ok:
            return j
        j = jn
        if j > 4096:
            return j


def make_block(kind: str, frame: WaveFrame, geom: GeometrySet,
               params: LevelParams, grid: Grid, band: int | None = None,
               j_modes: int | None = None) -> BlockField:
    """Realize a building block on the grid.  Raises AliasingError with the
    minimum grid size when not even one profile harmonic fits."""
    if kind not in ("jet", "mikado"):
        raise ValueError("kind must be 'jet' or 'mikado'")
    if kind == "jet" and params.regime != "S1":
        raise RegimeError("intermittent jets belong to regime S1")
    if kind == "mikado" and params.regime != "S2":
        raise RegimeError("mikado flows belong to regime S2")
    band = band if band is not None else grid.band
    if j_modes is None:
        j_modes = block_mode_budget(geom, params, band, kind)
    j_line = j_modes if kind == "jet" else 0
    if j_modes < 1:
        need = 2 * (_max_lattice_band(frame, geom.n_lambda,
                                      params.lam_r_perp,
                                      1 if kind == "jet" else 0, 1) + 1)
        raise AliasingError(
            f"block lattice does not fit in band {band}; need n >= {2 * need}",
            required_n=2 * need)
    used_band = _max_lattice_band(frame, geom.n_lambda, params.lam_r_perp,
                                  j_line, j_modes)
    if used_band > band:
        raise AliasingError(
            f"profile modes j={j_modes} exceed band {band}",
            required_n=2 * (used_band + 1))
    m_store = 2 * (used_band + 1)
    m_store += m_store % 2
    m_store = max(4, m_store)
    plane = plane_profile(params.r_perp, j_modes)
    line = line_profile(params.r_par, j_modes) if kind == "jet" else None
    return BlockField(kind, frame, grid, params, geom.n_lambda, plane, line,
                      m_store)


def jet(frame: WaveFrame, geom: GeometrySet, params: LevelParams, grid: Grid,
        band: int | None = None, j_modes: int | None = None) -> BlockField:
    return make_block("jet", frame, geom, params, grid, band, j_modes)


def mikado(frame: WaveFrame, geom: GeometrySet, params: LevelParams,
           grid: Grid, band: int | None = None,
           j_modes: int | None = None) -> BlockField:
    return make_block("mikado", frame, geom, params, grid, band, j_modes)


# -- temporal building blocks ------------------------------------------------


@dataclass
class TemporalProfile:
    """Per-direction oscillation profiles g_(k) and their correctors h_(k):
    a narrow unit-power pulse, rescaled by tau, periodized, and compressed by
    the integer factor sigma.  Pulses of distinct directions have disjoint
    supports at every time."""

    tau: float
    sigma: int
    horizon: float = 1.0
    n_dirs: int = 6
    support_frac: float | None = None
    align_dt: float | None = None
    _table_n: int = 8193

    def __post_init__(self):
        if self.tau < 1.0:
            raise ValueError("tau must be >= 1")
        if self.sigma < 1 or int(self.sigma) != self.sigma:
            raise ValueError("sigma must be a positive integer")
        if self.support_frac is None:
            self.support_frac = 1.0 / (2 * self.n_dirs)
        T = self.horizon
        self._width = self.support_frac * T
        u = np.linspace(0.0, 1.0, self._table_n)
        vals = bump(2.0 * u - 1.0)
        du = u[1] - u[0]
        mass2 = np.trapezoid(vals**2, dx=du) * self._width
        self._amp = np.sqrt(T / mass2)
        cum = np.concatenate([[0.0], np.cumsum(
            0.5 * (vals[1:] ** 2 + vals[:-1] ** 2) * du)])
        self._cum = cum / cum[-1]  # normalized cumulative of pulse^2
        self._u = u
        self._alphas = self._place_pulses()

    def _place_pulses(self) -> np.ndarray:
        """Disjoint pulse offsets alpha_k inside [0, T].  When align_dt is
        given, pulse centers are snapped onto the sample lattice (all of them
        if that preserves disjointness; otherwise a common shift aligning the
        first pulse), so coarse time grids still see the pulses."""
        T = self.horizon
        nat = np.array([k * T / self.n_dirs for k in range(self.n_dirs)])
        if not self.align_dt:
            return nat
        st = self.sigma * self.tau
        dt = self.align_dt
        centers = (nat + 0.5 * self._width) / st

        def snap(c):
            return np.round(c / dt) * dt
        snapped = snap(centers) * st - 0.5 * self._width
        ok = np.all(snapped >= 0) and np.all(
            snapped + self._width <= T) and np.all(
            np.diff(snapped) > self._width)
        if ok:
            return snapped
        shift = (snap(centers[0]) - centers[0]) * st
        shifted = nat + shift
        if shifted[0] >= 0 and shifted[-1] + self._width <= T:
            return shifted
        return nat

    def _pulse(self, s: np.ndarray, deriv: int = 0) -> np.ndarray:
        """Base pulse (and derivatives) as a function of s in [0, width]."""
        u = 2.0 * s / self._width - 1.0
        du = 2.0 / self._width
        fn = (bump, bump_d1, bump_d2)[deriv]
        return self._amp * fn(u) * du**deriv

    def alpha_shift(self, idx: int) -> float:
        return float(self._alphas[idx % self.n_dirs])

    def g(self, idx: int, t, deriv: int = 0) -> np.ndarray:
        """g_(k)(t) (and time derivatives) for direction index idx."""
        t = np.asarray(t, dtype=np.float64)
        T = self.horizon
        u = (self.sigma * t) % T          # position in the tau-scaled period
        s = self.tau * u - self.alpha_shift(idx)
        inside = (s >= 0) & (s <= self._width)
        rate = (self.sigma * self.tau) ** deriv
        vals = np.where(inside, self._pulse(np.where(inside, s, 0.0), deriv),
                        0.0)
        return np.sqrt(self.tau) * rate * vals

    def h(self, idx: int, t) -> np.ndarray:
        """h_(k)(t) = int_0^{.} (g_{k,tau}^2 - 1) evaluated at sigma t."""
        t = np.asarray(t, dtype=np.float64)
        T = self.horizon
        u = (self.sigma * t) % T
        s = self.tau * u - self.alpha_shift(idx)
        frac = np.interp(np.clip(s / self._width, 0.0, 1.0), self._u,
                         self._cum)
        return T * frac - u

    def dh_dt(self, idx: int, t) -> np.ndarray:
        """Exact identity d h_(k) / dt = sigma (g_(k)^2 - 1)."""
        return self.sigma * (self.g(idx, t) ** 2 - 1.0)

    def power_check(self, idx: int = 0, quad: int = 200001) -> float:
        """(1/T) int_0^T g_(k)^2 dt by dense quadrature (should be 1)."""
        t = np.linspace(0.0, self.horizon, quad)
        return float(np.trapezoid(self.g(idx, t) ** 2, t) / self.horizon)

    def lgamma_norm(self, gamma: float, deriv: int = 0) -> float:
        """||d^deriv g / dt^deriv||_{L^gamma[0, T]}, computed exactly from
        the base-pulse quadrature and the scaling factorization."""
        s = np.linspace(0.0, self._width, 20001)
        vals = np.abs(self._pulse(s, deriv))
        rate = (self.sigma * self.tau) ** deriv
        amp = np.sqrt(self.tau) * rate
        if np.isinf(gamma):
            return float(amp * np.max(vals))
        base = np.trapezoid(vals**gamma, s)
        # sigma identical pulses, each compressed by sigma tau in time
        total = self.sigma * base / (self.sigma * self.tau)
        return float(amp * total ** (1.0 / gamma))

    def h_sup(self, idx: int = 0, quad: int = 100001) -> float:
        t = np.linspace(0.0, self.horizon, quad)
        return float(np.max(np.abs(self.h(idx, t))))


def temporal_profile(params: LevelParams, horizon: float = 1.0,
                     n_dirs: int = 6) -> TemporalProfile:
    return TemporalProfile(tau=params.tau, sigma=params.sigma,
                           horizon=horizon, n_dirs=n_dirs)


def temporal_g(profile: TemporalProfile, idx: int, t):
    return profile.g(idx, t)


def temporal_h(profile: TemporalProfile, idx: int, t):
    return profile.h(idx, t)


# -- scaling verification ---------------------------------------------------------


def block_norm_profile_space(kind: str, p: float, n_grad: int, m_time: int,
                             params: LevelParams, geom: GeometrySet,
                             j_modes: int | None = None,
                             quad: int = 384) -> float:
    """||grad^N d_t^M W||_{C_t L^p(T^3)} computed in profile coordinates.

    The orthonormal frame turns the norm into profile-torus quadratures: for
    p = 2 the grouped combination below is exact; for other p it is a fixed
    (lambda-independent) constant away from the tensor norm, which is all the
    slope checks need."""
    scale_space = params.lam_r_perp * geom.n_lambda
    if kind == "mikado":
        if m_time > 0:
            return 0.0
        plane = plane_profile(params.r_perp,
                              j_modes or max(8, int(6 / params.r_perp)))
        val = plane.lp_norm_grouped(p, n_grad, quad)
        return (2 * np.pi) ** (3.0 / p if not np.isinf(p) else 0.0) * \
            float(scale_space) ** n_grad * val
    plane = plane_profile(params.r_perp,
                          j_modes or max(8, int(6 / params.r_perp)))
    line = line_profile(params.r_par,
                        j_modes or max(8, int(6 / params.r_par)))
    rate_t = scale_space * params.mu
    total_sq = 0.0
    for c in range(n_grad + 1):
        w = math.comb(n_grad, c)
        t_line = line.lp_norm(p, deriv=c + m_time)
        t_plane = plane.lp_norm_grouped(p, n_grad - c, quad)
        total_sq += w * (t_line * t_plane) ** 2
    pref = (2 * np.pi) ** (3.0 / p if not np.isinf(p) else 0.0)
    return pref * float(scale_space) ** n_grad * float(rate_t) ** m_time * \
        np.sqrt(total_sq)


def predicted_slope(kind: str, p: float, n_grad: int, m_time: int,
                    eps: float, alpha: float) -> float:
    """Log-log slope in lambda predicted by the block estimates."""
    ip = 0.0 if np.isinf(p) else 1.0 / p
    if kind == "jet":
        return ((2 * ip - 1) * (-1 + 2 * eps)
                + (ip - 0.5) * (-1 + 4 * eps)
                + n_grad + m_time * 2 * alpha)
    if kind == "mikado":
        return (2 * ip - 1) * (1 - alpha - 8 * eps) + n_grad
    raise ValueError(f"unknown kind {kind!r}")


def predicted_temporal_slope(gamma: float, m_time: int,
                             vary: str = "tau") -> float:
    ig = 0.0 if np.isinf(gamma) else 1.0 / gamma
    if vary == "tau":
        return m_time + 0.5 - ig
    if vary == "sigma":
        return float(m_time)
    raise ValueError("vary must be 'tau' or 'sigma'")


def _ols_slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc = x - x.mean()
    slope = float(np.sum(xc * y) / np.sum(xc * xc))
    resid = y - y.mean() - slope * xc
    return slope, float(np.sqrt(np.mean(resid**2)))


def verify_block_scaling(kind: str, p: float, n_grad: int, m_time: int,
                         lambdas, eps: float, alpha: float,
                         geom: GeometrySet, grid: Grid | None = None) -> dict:
    """Measure ||grad^N d_t^M W|| over a ladder of block frequencies and
    regress the log-norm on log-lambda.

    Norms are evaluated in profile coordinates with exact power-law scales
    (no grid rounding), so the observed slope isolates the concentration
    exponents; when a grid is supplied, each lambda must fit its band."""
    from .params import synthetic_params
    lambdas = list(lambdas)
    if len(lambdas) < 3:
        raise ValueError("need at least 3 lambda values for a slope")
    regime = "S1" if kind == "jet" else "S2"
    norms = []
    for lam in lambdas:
        prm = synthetic_params(float(lam), eps, alpha, regime=regime)
        if grid is not None:
            if geom.n_lambda * max(1, round(lam * prm.r_perp)) > grid.band:
                raise AliasingError(
                    f"lambda={lam} lattice exceeds grid band", required_n=0)
        norms.append(block_norm_profile_space(kind, p, n_grad, m_time, prm,
                                              geom))
    slope, resid = _ols_slope(np.log(np.asarray(lambdas, dtype=float)),
                              np.log(np.asarray(norms)))
    return {
        "kind": kind, "p": p, "N": n_grad, "M": m_time,
        "lambdas": lambdas, "norms": norms,
        "observed_slope": slope,
        "predicted_slope": predicted_slope(kind, p, n_grad, m_time, eps,
                                           alpha),
        "residual": resid,
    }


def verify_temporal_scaling(gamma: float, m_time: int, values, vary: str,
                            fixed: float, horizon: float = 1.0) -> dict:
    """Slope of ||d_t^M g||_{L^gamma} against tau (sigma frozen) or sigma."""
    values = list(values)
    if len(values) < 3:
        raise ValueError("need at least 3 parameter values for a slope")
    norms = []
    for v in values:
        tau, sigma = (float(v), int(fixed)) if vary == "tau" \
            else (float(fixed), int(v))
        prof = TemporalProfile(tau=tau, sigma=sigma, horizon=horizon)
        norms.append(prof.lgamma_norm(gamma, deriv=m_time))
    slope, resid = _ols_slope(np.log(np.asarray(values, dtype=float)),
                              np.log(np.asarray(norms)))
    return {
        "kind": f"temporal-{vary}", "gamma": gamma, "M": m_time,
        "values": values, "norms": norms,
        "observed_slope": slope,
        "predicted_slope": predicted_temporal_slope(gamma, m_time, vary),
        "residual": resid,
    }
