"""Amplitude fields, velocity-perturbation components, and their balances.

The assembly keeps a strict derivative discipline so the relaxed-system
residual closes exactly on the time grid:

* time derivatives of assembled velocity components use the same centered
  finite differences as the residual checker;
* inside the oscillation balances, block phases are differentiated through
  the exact traveling-wave multiplier and squared amplitudes through finite
  differences of the stored series, term by term (never by differencing an
  assembled product where an identity must cancel).

Products of stored fields are exact (zero-padded grids); where a result
exceeds the grid band it is projected back, and both sides of every identity
go through the same projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blocks import BlockField, TemporalProfile, make_block, temporal_profile
from .fields import (Grid, SpectralField, TimeSeriesField, multiply,
                     project_band, scale_field, trace_free)
from .geometry import GeometrySet
from .operators import _expstep, leray_project, project_nonzero
from .params import LevelParams


class AmplitudeGuardError(RuntimeError):
    """The rescaled stress left the positivity ball of the geometry."""


# -- pointwise cutoffs -----------------------------------------------------------


def chi(z):
    """Smooth rescaling cutoff: 1 on [0,1], the identity on [2,inf), a
    C^inf monotone blend in between staying inside [z/2, 2z]."""
    z = np.asarray(z, dtype=np.float64)
    s = _expstep(z - 1.0)
    return 1.0 + s * (z - 1.0)


def theta_cutoff(t, varsigma: float):
    """Initial-time ramp: 0 for t <= varsigma/2, 1 for t >= varsigma, with
    max slope 4 / varsigma."""
    t = np.asarray(t, dtype=np.float64)
    return _expstep((t - 0.5 * varsigma) / (0.5 * varsigma))


# -- helpers for constant-direction fields ---------------------------------------


def scalar_times_vec(s: SpectralField, vec: np.ndarray) -> SpectralField:
    c = np.stack([s.coeffs[0] * vec[i] for i in range(3)])
    return SpectralField(s.grid, "vector", c, s.time)


def scalar_times_sym(s: SpectralField, mat: np.ndarray) -> SpectralField:
    from .fields import SYM_PAIRS
    c = np.stack([s.coeffs[0] * mat[i, j] for (i, j) in SYM_PAIRS])
    return SpectralField(s.grid, "sym", c, s.time)


def const_mat_times_vec(mat: np.ndarray, v: SpectralField) -> SpectralField:
    c = np.stack([mat[i, 0] * v.coeffs[0] + mat[i, 1] * v.coeffs[1]
                  + mat[i, 2] * v.coeffs[2] for i in range(3)])
    return SpectralField(v.grid, "vector", c, v.time)


def grad_of(s: SpectralField) -> SpectralField:
    from .fields import grad
    return grad(s)


def fd_weights(j: int, nt: int) -> list[tuple[int, float]]:
    """Second-order finite-difference stencil (index, weight/dt) used by
    every time derivative in the package (one-sided at the endpoints)."""
    if nt < 3:
        raise ValueError("need at least 3 time samples")
    if j == 0:
        return [(0, -1.5), (1, 2.0), (2, -0.5)]
    if j == nt - 1:
        return [(nt - 1, 1.5), (nt - 2, -2.0), (nt - 3, 0.5)]
    return [(j - 1, -0.5), (j + 1, 0.5)]


# -- amplitudes -------------------------------------------------------------------


def amplitude_samples(r_ell: SpectralField, delta_q1: float,
                      geom: GeometrySet, m_eval: int | None = None,
                      guard: bool = True):
    """Pointwise rho and a_k at the collocation nodes.

    rho = 2 eps_u^-1 delta chi(|R|/delta) and a_k = rho^(1/2)
    gamma_k(Id - R/rho); raises when Id - R/rho leaves the positivity ball,
    which is exactly what the chi rescaling is there to prevent."""
    m_eval = m_eval or max(r_ell.m, r_ell.grid.n)
    s = r_ell.samples(m_eval)  # (6, m, m, m) in (xx,yy,zz,xy,xz,yz) order
    frob = np.sqrt(s[0] ** 2 + s[1] ** 2 + s[2] ** 2
                   + 2.0 * (s[3] ** 2 + s[4] ** 2 + s[5] ** 2))
    rho = (2.0 / geom.eps_u) * delta_q1 * chi(frob / delta_q1)
    ratio = frob / rho
    worst = float(np.max(ratio))
    if guard and worst >= geom.eps_u:
        raise AmplitudeGuardError(
            f"|R_ell|/rho reached {worst:.3e} >= eps_u = {geom.eps_u:.3e}")
    a = np.empty((geom.size,) + rho.shape)
    for i in range(geom.size):
        d = geom.dual_matrix(i)
        pairing = (d[0, 0] * s[0] + d[1, 1] * s[1] + d[2, 2] * s[2]
                   + 2.0 * (d[0, 1] * s[3] + d[0, 2] * s[4] + d[1, 2] * s[5]))
        gamma_sq = geom.gamma_sq(np.eye(3), i) - pairing / rho
        if guard and np.min(gamma_sq) <= 0:
            raise AmplitudeGuardError(
                f"gamma_{i}^2 lost positivity (min {np.min(gamma_sq):.3e})")
        a[i] = np.sqrt(rho) * np.sqrt(np.maximum(gamma_sq, 0.0))
    return rho, a, worst


def amplitude_identity_residual(r_ell: SpectralField, delta_q1: float,
                                geom: GeometrySet,
                                m_eval: int | None = None) -> float:
    """Pointwise relative residual of sum_k a_k^2 k1 (x) k1 = rho Id - R."""
    m_eval = m_eval or max(r_ell.m, r_ell.grid.n)
    rho, a, _ = amplitude_samples(r_ell, delta_q1, geom, m_eval)
    s = r_ell.samples(m_eval)
    target = np.stack([rho - s[0], rho - s[1], rho - s[2],
                       -s[3], -s[4], -s[5]])
    acc = np.zeros_like(target)
    from .fields import SYM_PAIRS
    for i, fr in enumerate(geom.frames):
        _, k1, _ = fr.as_arrays()
        a2 = a[i] ** 2
        for c, (p, q) in enumerate(SYM_PAIRS):
            acc[c] += a2 * (k1[p] * k1[q])
    scale = float(np.max(np.abs(target)))
    return float(np.max(np.abs(acc - target)) / (scale or 1.0))


@dataclass
class AmplitudeField:
    """Band-limited amplitude layer: rho-tilde, the per-direction amplitudes
    a_k, and their exact squares A_k = a_k * a_k (as grid fields)."""

    rho: TimeSeriesField
    a: list
    a_sq: list
    band_a: int
    ball_excursion: float


def amplitudes(r_ell: TimeSeriesField, delta_q1: float, geom: GeometrySet,
               band_a: int, band_grid: int | None = None,
               guard: bool = True) -> AmplitudeField:
    """Evaluate the amplitude layer on the whole time grid: pointwise values
    projected onto the amplitude band (a deliberate extra mollification at
    desk scale; the geometric closure defect it creates is folded into the
    stress, so nothing is lost)."""
    grid = r_ell.grid
    band_grid = band_grid if band_grid is not None else grid.band
    m_eval = grid.n
    rho_snaps, a_snaps = [], [[] for _ in range(geom.size)]
    worst = 0.0
    for f in r_ell.snapshots:
        rho, a, w = amplitude_samples(f, delta_q1, geom, m_eval, guard)
        worst = max(worst, w)
        rho_f = SpectralField.from_samples(grid, "scalar", rho[None], f.time)
        rho_snaps.append(project_band(rho_f, band_grid))
        for i in range(geom.size):
            af = SpectralField.from_samples(grid, "scalar", a[i][None], f.time)
            a_snaps[i].append(project_band(af, band_a))
    rho_series = TimeSeriesField(grid, "scalar", rho_snaps)
    a_series = [TimeSeriesField(grid, "scalar", sn) for sn in a_snaps]
    a_sq = [TimeSeriesField(grid, "scalar",
                            [multiply(f, f) for f in s.snapshots])
            for s in a_series]
    return AmplitudeField(rho_series, a_series, a_sq, band_a, worst)


# -- the level construction context ----------------------------------------------


class _Cache:
    def __init__(self, maker, size: int = 4):
        self.maker = maker
        self.size = size
        self.store: dict[int, SpectralField] = {}
        self.order: list[int] = []

    def at(self, j: int) -> SpectralField:
        if j not in self.store:
            self.store[j] = self.maker(j)
            self.order.append(j)
            if len(self.order) > self.size:
                self.store.pop(self.order.pop(0))
        return self.store[j]


@dataclass
class LevelContext:
    """Everything the perturbation and stress layers share at one level."""

    grid: Grid
    geom: GeometrySet
    params: LevelParams
    blocks: list
    temporal: TemporalProfile
    amps: AmplitudeField
    r_ell: TimeSeriesField
    band_grid: int

    def __post_init__(self):
        self.regime = self.params.regime
        self.nt = self.grid.t_samples
        self.dt = self.grid.dt
        ts = self.grid.times
        self.theta = theta_cutoff(ts, self.params.varsigma_q)
        self.theta_sq = self.theta**2
        self._k1 = [np.array([float(x) for x in f.k1])
                    for f in self.geom.frames]
        self._mean_ww = [b.mean_ww() for b in self.blocks]
        self._wp = _Cache(self._make_wp)
        self._wc = _Cache(self._make_wc)
        self._wt = _Cache(self._make_wt)
        self._wo = _Cache(self._make_wo)
        self._wpc_cut = _Cache(lambda j: (self._wp.at(j) + self._wc.at(j))
                               * float(self.theta[j]))
        self._wto_cut = _Cache(lambda j: (self._wt.at(j) + self._wo.at(j))
                               * float(self.theta_sq[j]))
        self._w_total = _Cache(lambda j: self._wpc_cut.at(j)
                               + self._wto_cut.at(j))

    # temporal factors -----------------------------------------------------

    def g_val(self, k: int, j: int, deriv: int = 0) -> float:
        return float(self.temporal.g(k, self.grid.times[j], deriv))

    def g_sq_dt(self, k: int, j: int) -> float:
        """d/dt of g_(k)^2, analytic."""
        t = self.grid.times[j]
        return float(2.0 * self.temporal.g(k, t) * self.temporal.g(k, t, 1))

    def h_val(self, k: int, j: int) -> float:
        return float(self.temporal.h(k, self.grid.times[j]))

    def active_dirs(self, j: int):
        return [k for k in range(len(self.blocks))
                if self.g_val(k, j) != 0.0]

    # finite differences of stored series -----------------------------------

    def fd_series(self, series_at, j: int) -> SpectralField:
        """Centered-difference time derivative of any j-indexed field."""
        acc = None
        for idx, w in fd_weights(j, self.nt):
            term = series_at(idx) * (w / self.dt)
            acc = term if acc is None else acc + term
        return acc

    def a_sq_at(self, k: int, j: int) -> SpectralField:
        return self.amps.a_sq[k][j]

    def fd_a_sq(self, k: int, j: int) -> SpectralField:
        return self.fd_series(lambda i: self.amps.a_sq[k][i], j)

    # perturbation components ------------------------------------------------

    def _make_wp(self, j: int) -> SpectralField:
        t = float(self.grid.times[j])
        acc = SpectralField.zero(self.grid, "vector", 4, t)
        for k in self.active_dirs(j):
            gw = self.blocks[k].w_at(t) * self.g_val(k, j)
            acc = acc + scale_field(self.amps.a[k][j], gw)
        return acc

    def _make_wc(self, j: int) -> SpectralField:
        from .fields import cross, curl, grad
        t = float(self.grid.times[j])
        acc = SpectralField.zero(self.grid, "vector", 4, t)
        for k in self.active_dirs(j):
            b: BlockField = self.blocks[k]
            g = self.g_val(k, j)
            ga = grad(self.amps.a[k][j])
            wc = b.wc_at(t)
            term = curl(cross(ga, wc)) + cross(ga, curl(wc))
            if b.kind == "jet":
                term = term + scale_field(self.amps.a[k][j], b.wc_tilde_at(t))
            acc = acc + term * g
        return acc

    def psi_phi_sq(self, k: int, t: float) -> SpectralField:
        """The scalar (psi phi)^2 carried by W (x) W along k1 (x) k1."""
        s = self.blocks[k].psi_phi_scalar_at(t)
        return multiply(s, s)

    def _make_wt(self, j: int) -> SpectralField:
        t = float(self.grid.times[j])
        if self.regime != "S1":
            return SpectralField.zero(self.grid, "vector", 4, t)
        acc = SpectralField.zero(self.grid, "vector", 4, t)
        for k in self.active_dirs(j):
            g2 = self.g_val(k, j) ** 2
            prod = multiply(self.a_sq_at(k, j), self.psi_phi_sq(k, t))
            acc = acc + scalar_times_vec(prod, self._k1[k]) * g2
        out = leray_project(project_nonzero(acc)) * (-1.0 / self.params.mu)
        out.time = t
        return out

    def _make_wo(self, j: int) -> SpectralField:
        from .fields import grad
        t = float(self.grid.times[j])
        acc = SpectralField.zero(self.grid, "vector", 4, t)
        for k in range(len(self.blocks)):
            h = self.h_val(k, j)
            if h == 0.0:
                continue
            vec = const_mat_times_vec(self._mean_ww[k],
                                      grad(self.a_sq_at(k, j)))
            acc = acc + vec * h
        out = leray_project(project_nonzero(acc)) * \
            (-1.0 / float(self.params.sigma))
        out.time = t
        return out

    # public accessors -------------------------------------------------------

    def w_p(self, j: int) -> SpectralField:
        return self._wp.at(j)

    def w_c(self, j: int) -> SpectralField:
        return self._wc.at(j)

    def w_t(self, j: int) -> SpectralField:
        return self._wt.at(j)

    def w_o(self, j: int) -> SpectralField:
        return self._wo.at(j)

    def w_tilde_pc(self, j: int) -> SpectralField:
        return self._wpc_cut.at(j)

    def w_tilde_to(self, j: int) -> SpectralField:
        return self._wto_cut.at(j)

    def w_total(self, j: int) -> SpectralField:
        return self._w_total.at(j)

    # balance-layer derivatives ----------------------------------------------

    def leibniz_dt_wt(self, j: int) -> SpectralField:
        """d/dt w^(t) with finite differences on A = a^2, analytic g^2, and
        the traveling-phase derivative on the block scalar."""
        t = float(self.grid.times[j])
        acc = SpectralField.zero(self.grid, "vector", 4, t)
        if self.regime != "S1":
            return acc
        for k in range(len(self.blocks)):
            g2 = self.g_val(k, j) ** 2
            dg2 = self.g_sq_dt(k, j)
            terms = []
            if g2 != 0.0 or dg2 != 0.0:
                psq = self.psi_phi_sq(k, t)
                if g2 != 0.0:
                    terms.append(multiply(self.fd_a_sq(k, j), psq) * g2)
                    terms.append(multiply(
                        self.a_sq_at(k, j),
                        self.blocks[k].traveling_time_derivative(psq)) * g2)
                if dg2 != 0.0:
                    terms.append(multiply(self.a_sq_at(k, j), psq) * dg2)
            for term in terms:
                acc = acc + scalar_times_vec(term, self._k1[k])
        out = leray_project(project_nonzero(acc)) * (-1.0 / self.params.mu)
        out.time = t
        return out

    def leibniz_dt_wo(self, j: int) -> SpectralField:
        """d/dt w^(o) with dh/dt = sigma (g^2 - 1) used exactly."""
        from .fields import grad
        t = float(self.grid.times[j])
        acc = SpectralField.zero(self.grid, "vector", 4, t)
        sigma = float(self.params.sigma)
        for k in range(len(self.blocks)):
            dh = sigma * (self.g_val(k, j) ** 2 - 1.0)
            h = self.h_val(k, j)
            term = const_mat_times_vec(self._mean_ww[k],
                                       grad(self.a_sq_at(k, j))) * dh
            term = term + const_mat_times_vec(
                self._mean_ww[k], grad(self.fd_a_sq(k, j))) * h
            acc = acc + term
        out = leray_project(project_nonzero(acc)) * (-1.0 / sigma)
        out.time = t
        return out

    def geometric_closure(self, j: int) -> SpectralField:
        """E = sum_k A_k k1 (x) k1 + R_ell - rho-tilde Id: the desk-scale
        band-limitation defect of the amplitude identity (tiny; folded into
        the stress so the decomposition closes exactly)."""
        from .fields import identity_times
        acc = scalar_times_sym(self.a_sq_at(0, j), np.outer(self._k1[0],
                                                            self._k1[0]))
        for k in range(1, len(self.blocks)):
            acc = acc + scalar_times_sym(self.a_sq_at(k, j),
                                         np.outer(self._k1[k], self._k1[k]))
        e = acc + self.r_ell[j] - identity_times(self.amps.rho[j])
        e.time = float(self.grid.times[j])
        return e


def build_context(grid: Grid, geom: GeometrySet, params: LevelParams,
                  r_ell: TimeSeriesField, amp_band_reserve: int = 4,
                  guard: bool = True) -> LevelContext:
    """Choose block/amplitude bands within the grid budget and evaluate the
    amplitude layer.

    The budget is strict: block band + amplitude band <= half the grid band,
    so every quadratic expression of the perturbation (and the temporal
    corrector itself) is exactly representable on the grid.  Blocks take the
    largest profile-mode count that leaves amp_band_reserve frequencies for
    the amplitudes; if not even one harmonic fits, the grid is too small."""
    from .blocks import AliasingError, block_mode_budget, _max_lattice_band
    band_grid = grid.band
    half = band_grid // 2
    kind = "jet" if params.regime == "S1" else "mikado"
    j_modes = block_mode_budget(geom, params, half - amp_band_reserve, kind)
    if j_modes < 1:
        j_modes = block_mode_budget(geom, params, half - 1, kind)
    if j_modes < 1:
        j_line = 1 if kind == "jet" else 0
        need = max(_max_lattice_band(f, geom.n_lambda, params.lam_r_perp,
                                     j_line, 1) for f in geom.frames)
        raise AliasingError(
            f"grid band {band_grid} cannot hold one block harmonic plus a "
            f"varying amplitude; need n >= {4 * (need + 1) + 4}",
            required_n=4 * (need + 1) + 4)
    blocks = [make_block(kind, f, geom, params, grid, band=half,
                         j_modes=j_modes) for f in geom.frames]
    b_w = max((b.m_store // 2 - 1) for b in blocks)
    band_a = half - b_w
    temporal = TemporalProfile(tau=params.tau, sigma=params.sigma,
                               horizon=grid.horizon, n_dirs=geom.size,
                               align_dt=grid.dt)
    amps = amplitudes(r_ell, params.delta_q1, geom, band_a, band_grid, guard)
    return LevelContext(grid, geom, params, blocks, temporal, amps, r_ell,
                        band_grid)


# -- spec-facing operation wrappers ----------------------------------------------


def principal_part(ctx: LevelContext, j: int) -> SpectralField:
    """w^(p) = sum_k a_k g_k W_k at time sample j."""
    return ctx.w_p(j)


def incompressibility_corrector(ctx: LevelContext, j: int) -> SpectralField:
    """The corrector making w^(p) + w^(c) = sum_k curl curl(a g W^c)."""
    return ctx.w_c(j)


def temporal_corrector_spatial(ctx: LevelContext, j: int) -> SpectralField:
    """w^(t): cancels the high-frequency part of div(W x W) (regime S1)."""
    if ctx.regime != "S1":
        from .params import RegimeError
        raise RegimeError("w^(t) exists only in regime S1")
    return ctx.w_t(j)


def temporal_corrector_oscillation(ctx: LevelContext, j: int) -> SpectralField:
    """w^(o): cancels the slow drift of g^2 - 1 against the cell mean."""
    return ctx.w_o(j)


@dataclass
class PerturbationBundle:
    """Materialized perturbation series and the next velocity."""

    w_p: TimeSeriesField
    w_c: TimeSeriesField
    w_t: TimeSeriesField | None
    w_o: TimeSeriesField
    theta: np.ndarray
    w_total: TimeSeriesField
    v_next: TimeSeriesField


def assemble(ctx: LevelContext, v_ell: TimeSeriesField) -> PerturbationBundle:
    """Materialize all components and v_next = v_ell + Theta-cut w."""
    grid = ctx.grid
    wp = TimeSeriesField.build(grid, "vector", lambda j, t: ctx.w_p(j))
    wc = TimeSeriesField.build(grid, "vector", lambda j, t: ctx.w_c(j))
    wt = (TimeSeriesField.build(grid, "vector", lambda j, t: ctx.w_t(j))
          if ctx.regime == "S1" else None)
    wo = TimeSeriesField.build(grid, "vector", lambda j, t: ctx.w_o(j))
    wtot = TimeSeriesField.build(grid, "vector", lambda j, t: ctx.w_total(j))
    vnext = TimeSeriesField.build(
        grid, "vector", lambda j, t: v_ell[j] + wtot[j])
    return PerturbationBundle(wp, wc, wt, wo, ctx.theta, wtot, vnext)


# -- oscillation balances (checks) ------------------------------------------------


def spatial_balance_residual(ctx: LevelContext, j: int,
                             dt_route: str = "leibniz") -> SpectralField:
    """Leray projection of d_t w^(t) + sum_k P_neq0(A g^2 div(W x W))
    + mu^-1 sum_k P_neq0(d_t(A g^2) psi^2 phi^2 k1).

    dt_route='leibniz' uses the assembly's derivative (residual is exactly a
    projected-out gradient); dt_route='fd' differences the assembled w^(t)
    series, whose gap to the Leibniz route is pure time-discretization error.
    """
    if ctx.regime != "S1":
        from .params import RegimeError
        raise RegimeError("the spatial balance belongs to regime S1")
    t = float(ctx.grid.times[j])
    if dt_route == "fd":
        dwt = ctx.fd_series(lambda i: ctx.w_t(i), j)
    else:
        dwt = ctx.leibniz_dt_wt(j)
    acc = dwt
    for k in range(len(ctx.blocks)):
        g2 = ctx.g_val(k, j) ** 2
        dg2 = ctx.g_sq_dt(k, j)
        if g2 != 0.0:
            psq = ctx.psi_phi_sq(k, t)
            div_ww = ctx.blocks[k].traveling_time_derivative(psq) * \
                (1.0 / ctx.params.mu)
            term = multiply(ctx.a_sq_at(k, j), div_ww) * g2
            acc = acc + project_nonzero(scalar_times_vec(term, ctx._k1[k]))
        if g2 != 0.0 or dg2 != 0.0:
            psq = ctx.psi_phi_sq(k, t)
            da2g2 = multiply(ctx.fd_a_sq(k, j), psq) * g2 + \
                multiply(ctx.a_sq_at(k, j), psq) * dg2
            acc = acc + project_nonzero(
                scalar_times_vec(da2g2, ctx._k1[k])) * (1.0 / ctx.params.mu)
    return leray_project(acc)


def oscillation_balance_residual(ctx: LevelContext, j: int,
                                 dt_route: str = "leibniz") -> SpectralField:
    """Leray projection of d_t w^(o) + sum_k P_neq0((g^2-1) meanWW grad A)
    + sigma^-1 sum_k P_neq0(h meanWW grad d_t A)."""
    from .fields import grad
    if dt_route == "fd":
        dwo = ctx.fd_series(lambda i: ctx.w_o(i), j)
    else:
        dwo = ctx.leibniz_dt_wo(j)
    acc = dwo
    sigma = float(ctx.params.sigma)
    for k in range(len(ctx.blocks)):
        g2m1 = ctx.g_val(k, j) ** 2 - 1.0
        term = const_mat_times_vec(ctx._mean_ww[k],
                                   grad(ctx.a_sq_at(k, j))) * g2m1
        term = term + const_mat_times_vec(
            ctx._mean_ww[k], grad(ctx.fd_a_sq(k, j))) * \
            (ctx.h_val(k, j) / sigma)
        acc = acc + project_nonzero(term)
    return leray_project(acc)
