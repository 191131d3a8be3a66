"""Reynolds-stress assembly and the relaxed-system residual checker.

The new stress is built from named parts (linear, corrector, two
commutators, and the oscillation family).  Pressure is never represented:
all residuals are stated after Leray projection, which absorbs exactly the
gradient terms of the decomposition.  With the shared derivative discipline
(see perturbation.py) the decomposition telescopes against the residual
checker to rounding error at the seed level.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .fields import (Grid, SpectralField, TimeSeriesField, identity_times,
                     multiply, project_band, tensor_sym, trace_free)
from .operators import (MeanModeError, fractional_laplacian, inverse_divergence,
                        leray_project, mollify_space, mollify_time,
                        project_nonzero, time_mollify_matrix)
from .perturbation import (LevelContext, const_mat_times_vec, fd_weights,
                           scalar_times_vec)


def traceless_product(u: SpectralField, v: SpectralField,
                      band: int | None = None) -> SpectralField:
    """u ox v + v ox u minus its trace part, projected to the grid band."""
    return trace_free(project_band(2.0 * tensor_sym(u, v), band))


def sym_product(u: SpectralField, band: int | None = None) -> SpectralField:
    return project_band(tensor_sym(u, u), band)


@dataclass
class NoiseLayer:
    """The truncated convolution at two consecutive levels plus its
    mollification (all divergence-free, mean-free series)."""

    z_q: TimeSeriesField
    z_q1: TimeSeriesField
    z_ell: TimeSeriesField


def mollify_series(series: TimeSeriesField, ell: float) -> TimeSeriesField:
    """Space-time mollification (spatial bump multiplier, one-sided past
    window in time with zero extension)."""
    return mollify_time(series.map(lambda f: mollify_space(f, ell)), ell)


@dataclass
class StressDecomposition:
    """Named parts of the level-(q+1) stress at one time sample; total is
    their literal sum.  osc4 stays None in regime S2 (the paper's S2
    oscillation error has three parts; its h-driven part lands in osc3)."""

    lin: SpectralField
    corr: SpectralField
    com1: SpectralField
    com2: SpectralField
    osc1: SpectralField
    osc2: SpectralField
    osc3: SpectralField
    osc4: SpectralField | None

    def parts(self) -> dict:
        out = {"lin": self.lin, "corr": self.corr, "com1": self.com1,
               "com2": self.com2, "osc1": self.osc1, "osc2": self.osc2,
               "osc3": self.osc3}
        if self.osc4 is not None:
            out["osc4"] = self.osc4
        return out

    @property
    def total(self) -> SpectralField:
        acc = None
        for f in self.parts().values():
            acc = f if acc is None else acc + f
        return acc


class StressAssembly:
    """Per-sample builder of the stress parts for one iteration level."""

    def __init__(self, ctx: LevelContext, v_ell: TimeSeriesField,
                 v_q: TimeSeriesField, noise: NoiseLayer):
        self.ctx = ctx
        self.v_ell = v_ell
        self.v_q = v_q
        self.noise = noise
        self.grid = ctx.grid
        self.band = ctx.band_grid
        g = self.grid
        self._moll = time_mollify_matrix(g, ctx.params.ell)
        self._vz_ell = TimeSeriesField.build(
            g, "vector", lambda j, t: v_ell[j] + noise.z_ell[j])
        # mollified quadratic of the level-q fields (com1's second half)
        vzq = TimeSeriesField.build(
            g, "vector", lambda j, t: v_q[j] + noise.z_q[j])
        quad = TimeSeriesField.build(
            g, "sym", lambda j, t: trace_free(project_band(
                tensor_sym(vzq[j], vzq[j]), self.band)))
        quad = quad.map(lambda f: mollify_space(f, ctx.params.ell))
        self._quad_q_moll = quad.apply_weight_matrix(self._moll)

    # -- parts -----------------------------------------------------------

    def v_next(self, j: int) -> SpectralField:
        return self.v_ell[j] + self.ctx.w_total(j)

    def r_lin(self, j: int) -> SpectralField:
        ctx = self.ctx
        dt_wpc = ctx.fd_series(ctx.w_tilde_pc, j)
        out = inverse_divergence(dt_wpc)
        w = ctx.w_total(j)
        out = out + inverse_divergence(
            fractional_laplacian(w, ctx.params.alpha) * ctx.params.nu)
        dz = self.noise.z_ell[j] - self.noise.z_q1[j]
        if float(np.max(np.abs(dz.coeffs))) > 0:
            out = out + inverse_divergence(dz)
        out = out + traceless_product(self._vz_ell[j], w, self.band)
        out.time = float(self.grid.times[j])
        return out

    def r_corr(self, j: int) -> SpectralField:
        ctx = self.ctx
        wto = ctx.w_tilde_to(j)
        wc_cut = ctx.w_c(j) * float(ctx.theta[j])
        rest = wc_cut + wto
        wp_cut = ctx.w_p(j) * float(ctx.theta[j])
        out = trace_free(project_band(
            2.0 * tensor_sym(wp_cut, rest) + tensor_sym(rest, rest),
            self.band))
        out.time = float(self.grid.times[j])
        return out

    def r_com1(self, j: int) -> SpectralField:
        f = self._vz_ell[j]
        out = trace_free(project_band(tensor_sym(f, f), self.band)) \
            - self._quad_q_moll[j]
        out.time = float(self.grid.times[j])
        return out

    def r_com2(self, j: int) -> SpectralField:
        v1 = self.v_next(j)
        z1 = self.noise.z_q1[j]
        zl = self.noise.z_ell[j]
        out = traceless_product(v1, z1 - zl, self.band) + trace_free(
            project_band(tensor_sym(z1, z1) - tensor_sym(zl, zl), self.band))
        out.time = float(self.grid.times[j])
        return out

    # oscillation parts ----------------------------------------------------

    def r_osc1(self, j: int) -> SpectralField:
        ctx = self.ctx
        th2 = float(ctx.theta_sq[j])
        out = ctx.r_ell[j] * (1.0 - th2)
        ramp = ctx.fd_series(ctx.w_tilde_to, j) - \
            (ctx.leibniz_dt_wt(j) + ctx.leibniz_dt_wo(j)) * th2
        out = out + inverse_divergence(ramp)
        out = out + trace_free(ctx.geometric_closure(j)) * th2
        out.time = float(self.grid.times[j])
        return out

    def r_osc2(self, j: int) -> SpectralField:
        ctx = self.ctx
        t = float(self.grid.times[j])
        th2 = float(ctx.theta_sq[j])
        acc = SpectralField.zero(self.grid, "sym", 4, t)
        if th2 != 0.0:
            from .fields import grad
            for k in ctx.active_dirs(j):
                g2 = ctx.g_val(k, j) ** 2
                psq_nz = project_nonzero(ctx.psi_phi_sq(k, t))
                grad_a2 = grad(ctx.a_sq_at(k, j))
                k1 = ctx._k1[k]
                dir_a2 = SpectralField(
                    self.grid, "scalar",
                    (k1[0] * grad_a2.coeffs[0] + k1[1] * grad_a2.coeffs[1]
                     + k1[2] * grad_a2.coeffs[2])[None], t)
                vec = scalar_times_vec(multiply(psq_nz, dir_a2), k1)
                acc = acc + inverse_divergence(
                    project_nonzero(vec)) * (g2 * th2)
        acc.time = t
        return acc

    def r_osc3(self, j: int) -> SpectralField:
        """S1: the d_t(a^2 g^2) psi^2 phi^2 part; S2: the h-driven part
        (the paper's third S2 oscillation error)."""
        ctx = self.ctx
        t = float(self.grid.times[j])
        th2 = float(ctx.theta_sq[j])
        if ctx.regime == "S2":
            return self._osc_h_part(j)
        acc = SpectralField.zero(self.grid, "sym", 4, t)
        if th2 != 0.0:
            for k in range(len(ctx.blocks)):
                g2 = ctx.g_val(k, j) ** 2
                dg2 = ctx.g_sq_dt(k, j)
                if g2 == 0.0 and dg2 == 0.0:
                    continue
                psq = ctx.psi_phi_sq(k, t)
                da2g2 = multiply(ctx.fd_a_sq(k, j), psq) * g2 + \
                    multiply(ctx.a_sq_at(k, j), psq) * dg2
                vec = project_nonzero(scalar_times_vec(da2g2, ctx._k1[k]))
                acc = acc + inverse_divergence(vec) * \
                    (-th2 / ctx.params.mu)
        acc.time = t
        return acc

    def _osc_h_part(self, j: int) -> SpectralField:
        from .fields import grad
        ctx = self.ctx
        t = float(self.grid.times[j])
        th2 = float(ctx.theta_sq[j])
        acc = SpectralField.zero(self.grid, "sym", 4, t)
        if th2 != 0.0:
            for k in range(len(ctx.blocks)):
                h = ctx.h_val(k, j)
                if h == 0.0:
                    continue
                vec = const_mat_times_vec(ctx._mean_ww[k],
                                          grad(ctx.fd_a_sq(k, j)))
                acc = acc + inverse_divergence(project_nonzero(vec)) * \
                    (-th2 * h / float(ctx.params.sigma))
        acc.time = t
        return acc

    def r_osc4(self, j: int) -> SpectralField | None:
        if self.ctx.regime == "S2":
            return None
        return self._osc_h_part(j)

    def decomposition(self, j: int) -> StressDecomposition:
        return StressDecomposition(
            lin=self.r_lin(j), corr=self.r_corr(j), com1=self.r_com1(j),
            com2=self.r_com2(j), osc1=self.r_osc1(j), osc2=self.r_osc2(j),
            osc3=self.r_osc3(j), osc4=self.r_osc4(j))


# -- residual of the relaxed system ------------------------------------------------


def equation_residual(v: TimeSeriesField, r_stress, z: TimeSeriesField,
                      nu: float, alpha: float,
                      band: int | None = None) -> dict:
    """max over time samples of || P_H [ d_t v + nu (-Lap)^a v - z
    + div((v+z) (x) (v+z)) - div R ] ||_{L^2_x}, with d_t v by the shared
    centered differences and products projected to the grid band."""
    grid = v.grid
    band = band if band is not None else grid.band
    if isinstance(r_stress, TimeSeriesField):
        r_at = lambda j: r_stress[j]
    else:
        r_at = r_stress
    if z.grid.t_samples != grid.t_samples:
        raise ValueError("mismatched time grids")
    from .fields import div as div_op
    norms = []
    nt = grid.t_samples
    for j in range(nt):
        acc = None
        for idx, wgt in fd_weights(j, nt):
            term = v[idx] * (wgt / grid.dt)
            acc = term if acc is None else acc + term
        acc = acc + fractional_laplacian(v[j], alpha) * nu
        acc = acc - z[j]
        vz = v[j] + z[j]
        quad = project_band(tensor_sym(vz, vz), band)
        acc = acc + div_op(quad)
        acc = acc - div_op(r_at(j))
        norms.append(leray_project(acc).l2_norm())
    return {"per_sample": np.array(norms), "max": float(np.max(norms))}


# -- initial stress -----------------------------------------------------------------


def initial_stress(u_tilde: TimeSeriesField, z0: TimeSeriesField, alpha: float,
                   nu: float, band: int | None = None):
    """Seed pair (v_0, R_0): v_0 is the prescribed smooth field and R_0 feeds
    its equation error into the stress, so the relaxed system holds exactly
    (modulo gradients) at level 0."""
    grid = u_tilde.grid
    band = band if band is not None else grid.band
    for f in (u_tilde[0],):
        if float(np.max(np.abs(f.coeffs))) > 0:
            raise ValueError("the prescribed field must vanish at t = 0")

    def r0(j: int, t: float) -> SpectralField:
        acc = None
        for idx, wgt in fd_weights(j, grid.t_samples):
            term = u_tilde[idx] * (wgt / grid.dt)
            acc = term if acc is None else acc + term
        acc = acc + fractional_laplacian(u_tilde[j], alpha) * nu
        acc = acc - z0[j]
        out = inverse_divergence(acc)
        uz = u_tilde[j] + z0[j]
        return out + trace_free(project_band(tensor_sym(uz, uz), band))

    r_series = TimeSeriesField.build(grid, "sym", r0)
    return u_tilde, r_series


# -- vanishing-noise harness ---------------------------------------------------------


@dataclass
class ShearFlow:
    """Exact solution family u = (f(x_2, t), 0, 0) with f solving the
    fractional heat equation; the transport term vanishes identically."""

    grid: Grid
    nu: float
    alpha: float
    modes: dict  # {m (int != 0): complex amplitude}, conjugates implied

    def velocity_at(self, t: float) -> SpectralField:
        m_store = max(4, 2 * (max(abs(m) for m in self.modes) + 1))
        f = SpectralField.zero(self.grid, "vector", m_store, t)
        for m, c in self.modes.items():
            decay = np.exp(-self.nu * float(abs(m)) ** (2 * self.alpha) * t)
            f.coeffs[0, 0, m % m_store, 0] += c * decay
            f.coeffs[0, 0, (-m) % m_store, 0] += np.conj(c) * decay
        return f

    def series(self) -> TimeSeriesField:
        return TimeSeriesField.build(self.grid, "vector",
                                     lambda j, t: self.velocity_at(t))


def vanishing_noise_seed(shear: ShearFlow, model, level_n: int,
                         sched, grid: Grid, cutoff_exponent: float = 15.0):
    """Seed (v_n, R_n) of the vanishing-noise ladder: mollify the exact
    deterministic solution at scale 1/lambda_n, drive the noise at strength
    eps_n = 1/lambda_n (same paths), and package the stress so the shifted
    relaxed system holds up to time discretization.

    Returns (v_n, r_n, z_tilde, info)."""
    from .stochastic import simulate_convolution, truncate_Z

    lam_n = sched.lam(level_n)
    eps_n = 1.0 / float(lam_n)
    ell = 1.0 / float(lam_n)
    band = grid.band

    u = shear.series()
    u0 = shear.velocity_at(0.0)

    # z^u with the shifted dissipation (extra +1 rate)
    def zu_at(j: int, t: float) -> SpectralField:
        from .fields import freq_grids
        _, _, _, sq = freq_grids(u0.m)
        decay = np.exp(-(shear.nu * sq**shear.alpha + 1.0) * t)
        return u0.with_coeffs(u0.coeffs * decay)

    z_u = TimeSeriesField.build(grid, "vector", zu_at)

    state = simulate_convolution(model.scaled(eps_n), None, grid, shear.nu,
                                 shear.alpha)

    u_n = mollify_series(u, ell)
    zu_n = mollify_series(z_u, ell)
    z_eps_n = mollify_series(state.Z, ell)
    from .operators import freq_truncate
    cutoff = min(float(lam_n) ** cutoff_exponent, float(band))
    pz = z_eps_n.map(lambda f: freq_truncate(f, cutoff))

    v_n = u_n - zu_n
    z_tilde = zu_n + pz

    def r_at(j: int, t: float) -> SpectralField:
        vz = v_n[j] + z_tilde[j]
        out = trace_free(project_band(tensor_sym(vz, vz), band))
        return out

    quad = TimeSeriesField.build(grid, "sym", r_at)
    uu = TimeSeriesField.build(
        grid, "sym",
        lambda j, t: trace_free(project_band(tensor_sym(u[j], u[j]), band)))
    uu_moll = mollify_series(uu, ell)

    def stress_at(j: int, t: float) -> SpectralField:
        out = quad[j] - uu_moll[j]
        pzj = pz[j]
        if float(np.max(np.abs(pzj.coeffs))) > 0:
            out = out - inverse_divergence(pzj)
        return out

    r_n = TimeSeriesField.build(grid, "sym", stress_at)
    info = {"lambda_n": lam_n, "eps_n": eps_n, "ell": ell,
            "z_energy": float(np.mean([f.l2_norm() ** 2
                                       for f in state.Z.snapshots]))}
    return v_n, r_n, z_tilde, info
