"""Fourier-multiplier operators, mollifiers, and norms on the 3-torus."""

from __future__ import annotations

import numpy as np

from .fields import (Grid, SpectralField, TimeSeriesField, apply_multiplier,
                     freq_1d, freq_grids, ifftn, multiply, _pad_spectrum)


class MeanModeError(ValueError):
    """An operator that requires mean-free input received a nonzero mean."""


# -- smooth cutoff eta: 1 on [0,1), 0 on [2,inf), C^inf monotone in between ----


def _expstep(u: np.ndarray) -> np.ndarray:
    """C^inf step: 0 for u<=0, 1 for u>=1, strictly increasing on (0,1)."""
    u = np.asarray(u, dtype=np.float64)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
    return np.where(u <= 0, 0.0, np.where(u >= 1, 1.0, a / (a + b)))


def eta_cutoff(r) -> np.ndarray:
    """Radial frequency cutoff: identity below 1, zero beyond 2."""
    r = np.asarray(r, dtype=np.float64)
    return np.where(r < 1.0, 1.0, np.where(r >= 2.0, 0.0, 1.0 - _expstep(r - 1.0)))


# -- multiplier operators -------------------------------------------------------


def fractional_laplacian(f: SpectralField, alpha: float) -> SpectralField:
    """(-Laplace)^alpha via the |xi|^(2 alpha) multiplier; the mean mode is
    annihilated.  alpha is restricted to the hyper-viscous range [1, 2)."""
    if not (1.0 <= alpha < 2.0):
        raise ValueError(f"alpha must lie in [1, 2), got {alpha}")
    _, _, _, sq = freq_grids(f.m)
    return apply_multiplier(f, sq**alpha)


def leray_project(v: SpectralField) -> SpectralField:
    """Helmholtz projection Id - grad inv(Laplace) div; keeps the mean mode."""
    if v.rank != "vector":
        raise ValueError("leray_project expects a vector field")
    x1, x2, x3, sq = freq_grids(v.m)
    inv = np.where(sq == 0, 0.0, 1.0 / np.where(sq == 0, 1.0, sq))
    d = x1 * v.coeffs[0] + x2 * v.coeffs[1] + x3 * v.coeffs[2]
    out = np.stack([v.coeffs[0] - x1 * d * inv,
                    v.coeffs[1] - x2 * d * inv,
                    v.coeffs[2] - x3 * d * inv])
    return SpectralField(v.grid, "vector", out, v.time)


def project_nonzero(f: SpectralField) -> SpectralField:
    """Zero the xi = 0 coefficient only."""
    c = f.coeffs.copy()
    c[:, 0, 0, 0] = 0.0
    return f.with_coeffs(c)


def freq_truncate(f: SpectralField, c: float) -> SpectralField:
    """Smooth low-pass: multiply coefficients by eta(|xi| / c)."""
    if c <= 0:
        raise ValueError("cutoff must be positive")
    _, _, _, sq = freq_grids(f.m)
    return apply_multiplier(f, eta_cutoff(np.sqrt(sq) / c))


def project_high(f: SpectralField, kcut: float) -> SpectralField:
    """Sharp projection onto modes with |xi| >= kcut."""
    _, _, _, sq = freq_grids(f.m)
    return apply_multiplier(f, (sq >= kcut * kcut).astype(float))


def inv_gradient_norm(f: SpectralField) -> SpectralField:
    """|nabla|^(-1) on mean-free content (mean mode is zeroed)."""
    _, _, _, sq = freq_grids(f.m)
    mult = np.where(sq == 0, 0.0, 1.0 / np.sqrt(np.where(sq == 0, 1.0, sq)))
    return apply_multiplier(f, mult)


def inverse_divergence(v: SpectralField, mean_tol: float = 1e-13) -> SpectralField:
    """Right inverse of the divergence, mapping a mean-free vector field to a
    symmetric trace-free tensor field with div(R v) = v exactly in
    coefficients.

    Per mode: (Rv)^{kl} = -i (xi_k v_l + xi_l v_k)/|xi|^2
              + (i/2) (delta_kl + xi_k xi_l / |xi|^2) (xi . v)/|xi|^2.
    """
    if v.rank != "vector":
        raise ValueError("inverse_divergence expects a vector field")
    mean = np.max(np.abs(v.mean_mode()))
    scale = np.max(np.abs(v.coeffs)) or 1.0
    if mean > mean_tol * max(scale, 1.0):
        raise MeanModeError(f"inverse_divergence needs mean-free input "
                            f"(|mean| = {mean:.3e})")
    x1, x2, x3, sq = freq_grids(v.m)
    inv = np.where(sq == 0, 0.0, 1.0 / np.where(sq == 0, 1.0, sq))
    xs = (x1, x2, x3)
    xv = (x1 * v.coeffs[0] + x2 * v.coeffs[1] + x3 * v.coeffs[2]) * inv
    comps = []
    from .fields import SYM_PAIRS
    for (k, l) in SYM_PAIRS:
        c = -1j * (xs[k] * v.coeffs[l] + xs[l] * v.coeffs[k]) * inv
        c = c + 0.5j * xs[k] * xs[l] * xv * inv
        if k == l:
            c = c + 0.5j * xv
        comps.append(c)
    out = np.stack(comps)
    out[:, 0, 0, 0] = 0.0
    return SpectralField(v.grid, "sym", out, v.time)


def inverse_laplacian(f: SpectralField) -> SpectralField:
    _, _, _, sq = freq_grids(f.m)
    mult = np.where(sq == 0, 0.0, -1.0 / np.where(sq == 0, 1.0, sq))
    return apply_multiplier(f, mult)


# -- mollifiers ----------------------------------------------------------------

_GAUSS_N = 256
_gl_nodes, _gl_weights = np.polynomial.legendre.leggauss(_GAUSS_N)


def _bump(u: np.ndarray) -> np.ndarray:
    """Unnormalized C_c^inf bump exp(-1/(1-u^2)) on (-1, 1)."""
    u = np.asarray(u, dtype=np.float64)
    inside = np.abs(u) < 1.0
    w = np.where(inside, 1.0 - u * u, 1.0)
    return np.where(inside, np.exp(-1.0 / w), 0.0)


def _gauss_on(a: float, b: float):
    x = 0.5 * (b - a) * _gl_nodes + 0.5 * (a + b)
    w = 0.5 * (b - a) * _gl_weights
    return x, w


_MOLLIFIER_MASS_3D = None


def spatial_mollifier_hat(k) -> np.ndarray:
    """Fourier transform of the unit-mass radial bump on the unit ball of R^3,
    evaluated at radial frequency k (so value 1 at k = 0)."""
    global _MOLLIFIER_MASS_3D
    r, w = _gauss_on(0.0, 1.0)
    fr = _bump(r)
    if _MOLLIFIER_MASS_3D is None:
        _MOLLIFIER_MASS_3D = 4.0 * np.pi * np.sum(w * r * r * fr)
    k = np.atleast_1d(np.asarray(k, dtype=np.float64))
    kr = np.outer(k, r)
    sinc = np.where(kr == 0, 1.0, np.sin(kr) / np.where(kr == 0, 1.0, kr))
    vals = 4.0 * np.pi * (sinc * (r * r * fr)) @ w
    return vals / _MOLLIFIER_MASS_3D


def mollify_space(f: SpectralField, ell: float) -> SpectralField:
    """Spatial mollification: multiply by the transform of the rescaled bump."""
    if ell <= 0:
        raise ValueError("mollification scale must be positive")
    _, _, _, sq = freq_grids(f.m)
    radial = np.sqrt(sq) * ell
    flat = spatial_mollifier_hat(radial.ravel()).reshape(radial.shape)
    return apply_multiplier(f, flat)


_THETA_MASS_1D = None


def _theta_kernel(s: np.ndarray, ell: float) -> np.ndarray:
    """One-sided temporal mollifier theta_ell, unit mass, support [0, ell]."""
    global _THETA_MASS_1D
    if _THETA_MASS_1D is None:
        x, w = _gauss_on(0.0, 1.0)
        _THETA_MASS_1D = float(np.sum(w * _bump(2.0 * x - 1.0)))
    return _bump(2.0 * s / ell - 1.0) / (_THETA_MASS_1D * ell)


def time_mollify_matrix(grid: Grid, ell: float) -> np.ndarray:
    """Weights M with (f * theta_ell)(t_j) = sum_i M[j, i] f(t_i), where f is
    the piecewise-linear interpolant of the samples, extended by zero outside
    [0, T].  Convolution reads f(t_j - s) for s in [0, ell] (past samples)."""
    if ell <= 0:
        raise ValueError("mollification scale must be positive")
    times = grid.times
    nt = len(times)
    mat = np.zeros((nt, nt))
    s, w = _gauss_on(0.0, ell)
    kern = _theta_kernel(s, ell) * w
    for j in range(nt):
        tq = times[j] - s
        inside = (tq >= 0.0) & (tq <= grid.horizon)
        if not inside.any():
            continue
        tq_in = tq[inside]
        kw = kern[inside]
        pos = np.clip(np.searchsorted(times, tq_in) - 1, 0, nt - 2)
        t0 = times[pos]
        lam = (tq_in - t0) / grid.dt
        np.add.at(mat[j], pos, kw * (1.0 - lam))
        np.add.at(mat[j], pos + 1, kw * lam)
    return mat


def mollify_time(series: TimeSeriesField, ell: float) -> TimeSeriesField:
    return series.apply_weight_matrix(time_mollify_matrix(series.grid, ell))


# -- norms ----------------------------------------------------------------------


def lebesgue_norm(f: SpectralField, p: float, m: int | None = None) -> float:
    """L^p(T^3) norm by physical-space quadrature on the collocation grid
    (p = 2 is exact; p = inf is the max over collocation points)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if p == 2:
        return f.l2_norm()
    m_eval = m if m is not None else max(f.m, f.grid.n)
    mag = f.pointwise_magnitude(m_eval)
    if np.isinf(p):
        return float(np.max(mag))
    h3 = (2.0 * np.pi / m_eval) ** 3
    return float((h3 * np.sum(mag**p)) ** (1.0 / p))


def _gradient_level(arrays: list[np.ndarray], m: int) -> list[np.ndarray]:
    """All first partials (coefficients) of each coefficient cube given."""
    x1, x2, x3, _ = freq_grids(m)
    out = []
    for a in arrays:
        out.extend([1j * x1 * a, 1j * x2 * a, 1j * x3 * a])
    return out


def _derivative_magnitude(f: SpectralField, order: int,
                          m_eval: int) -> np.ndarray:
    """Pointwise Euclidean norm of the full order-th derivative tensor."""
    arrays = list(f.coeffs)
    for _ in range(order):
        arrays = _gradient_level(arrays, f.m)
    total = np.zeros((m_eval,) * 3)
    for a in arrays:
        c = a[None] if a.ndim == 3 else a
        c = _pad_spectrum(c, m_eval) if m_eval != f.m else c
        vals = np.real(ifftn(c)[0] * m_eval**3)
        total += vals * vals
    return np.sqrt(total)


def sobolev_norm(f: SpectralField, s: float, p: float) -> float:
    """W^{s,p} norm: integer s sums L^p norms of all derivatives up to order
    s; fractional s uses the Bessel multiplier (1 + |xi|^2)^(s/2) then L^p."""
    if s < 0:
        raise ValueError("s must be >= 0")
    if p < 1:
        raise ValueError("p must be >= 1")
    if float(s).is_integer():
        s = int(s)
        m_eval = max(f.m, f.grid.n)
        h3 = (2.0 * np.pi / m_eval) ** 3
        total = 0.0
        for j in range(s + 1):
            mag = _derivative_magnitude(f, j, m_eval)
            if np.isinf(p):
                total += float(np.max(mag))
            else:
                total += float((h3 * np.sum(mag**p)) ** (1.0 / p))
        return total
    _, _, _, sq = freq_grids(f.m)
    return lebesgue_norm(apply_multiplier(f, (1.0 + sq) ** (s / 2.0)), p)


def cn_norm(f: SpectralField, n_order: int) -> float:
    """C^N norm: sum over derivative orders of the collocation max."""
    m_eval = max(f.m, f.grid.n)
    return sum(float(np.max(_derivative_magnitude(f, j, m_eval)))
               for j in range(n_order + 1))


def series_ct_norm(series: TimeSeriesField, spatial) -> float:
    """sup over time samples of a spatial norm functional."""
    return max(spatial(f) for f in series.snapshots)


def series_lgamma_norm(series: TimeSeriesField, gamma: float, spatial) -> float:
    """L^gamma in time (trapezoidal) of a spatial norm functional."""
    vals = np.array([spatial(f) for f in series.snapshots])
    if np.isinf(gamma):
        return float(np.max(vals))
    return float(np.trapezoid(vals**gamma, series.times) ** (1.0 / gamma))


def series_cn_norm(series: TimeSeriesField, n_order: int) -> float:
    """Space-time C^N norm: sum over m + |zeta| <= N of sup |dt^m grad^zeta|,
    with time derivatives by repeated centered differences."""
    total = 0.0
    level = series
    for m_t in range(n_order + 1):
        for j in range(n_order + 1 - m_t):
            total += series_ct_norm(level, lambda f, jj=j: float(
                np.max(_derivative_magnitude(f, jj, max(f.m, f.grid.n)))))
        if m_t < n_order:
            level = level.time_derivative()
    return total


def holder_time_quotient(series: TimeSeriesField, exponent: float) -> float:
    """Discrete Hoelder-in-time quotient of the L^2 spatial norm over the
    time grid.  Reported as a diagnostic only; no convergence is claimed."""
    best = 0.0
    nt = len(series)
    for j in range(nt - 1):
        diff = (series[j + 1] - series[j]).l2_norm()
        dtp = (series.times[j + 1] - series.times[j]) ** exponent
        best = max(best, diff / dtp)
    return best


# -- decorrelation and commutator estimates ------------------------------------


def _normalized_lp(samples: np.ndarray, p: float) -> float:
    """L^p norm with the normalized Haar measure on T^3."""
    if np.isinf(p):
        return float(np.max(np.abs(samples)))
    return float(np.mean(np.abs(samples) ** p) ** (1.0 / p))


def dilate(g: SpectralField, theta: int) -> SpectralField:
    """g(theta x): move the coefficient at xi to theta xi (exact)."""
    if theta < 1 or int(theta) != theta:
        raise ValueError("theta must be a positive integer")
    theta = int(theta)
    idx = freq_1d(g.m)
    out_m = g.grid.n
    band = out_m // 2 - 1
    if theta * g.content_band() > band:
        raise ValueError(f"aliasing: theta * band(g) = {theta * g.content_band()}"
                         f" exceeds grid band {band}")
    out = SpectralField.zero(g.grid, g.rank, out_m, g.time)
    src = np.nonzero(np.any(g.coeffs != 0, axis=0))
    for i1, i2, i3 in zip(*src):
        xi = (idx[i1] * theta, idx[i2] * theta, idx[i3] * theta)
        out.coeffs[:, xi[0] % out_m, xi[1] % out_m, xi[2] % out_m] = \
            g.coeffs[:, i1, i2, i3]
    return out


def decorrelation_check(f: SpectralField, g: SpectralField, theta: int,
                        p: float) -> dict:
    """Scale-separation of L^p norms of products: returns the observed gap

        | ||f g(theta .)||_p  -  ||f||_p ||g||_p |

    and the reference bound theta^(-1/p) ||f||_{C^1} ||g||_p, both with the
    normalized measure on T^3 (the gap vanishes identically for constant f
    or constant g only in that normalization)."""
    g_dil = dilate(g, theta)
    m = max(f.m + g_dil.m, 2 * f.grid.n)
    prod = f.samples(m)[0] * g_dil.samples(m)[0]
    lhs = _normalized_lp(prod, p)
    nf = _normalized_lp(f.samples(max(f.m, f.grid.n))[0], p)
    ng = _normalized_lp(g.samples(max(g.m, f.grid.n))[0], p)
    gap = abs(lhs - nf * ng)
    c1 = (float(np.max(np.abs(f.samples(max(f.m, f.grid.n))[0])))
          + float(np.max(_derivative_magnitude(f, 1, max(f.m, f.grid.n)))))
    inv_p = 0.0 if np.isinf(p) else 1.0 / p
    bound = theta ** (-inv_p) * c1 * ng
    return {"lhs_gap": gap, "bound": bound, "product_norm": lhs,
            "factored_norm": nf * ng}


def commutator_check(a: SpectralField, f: SpectralField, kcut: float,
                     p: float) -> dict:
    """Smooth-times-high-frequency commutator gain: returns

        lhs   = || |nabla|^{-1} P_{!=0} (a P_{>=kcut} f) ||_p
        bound = kcut^{-1} ||grad^2 a||_inf ||f||_p.
    """
    if not (1.0 < p < np.inf):
        raise ValueError("p must lie in (1, inf)")
    fh = project_high(f, kcut)
    prod = multiply(a, fh)
    lhs = lebesgue_norm(inv_gradient_norm(project_nonzero(prod)), p)
    hess = float(np.max(_derivative_magnitude(a, 2, max(a.m, a.grid.n))))
    return {"lhs": lhs, "bound": hess * lebesgue_norm(f, p) / kcut}
