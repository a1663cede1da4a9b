"""Chart models of constant-curvature Riemannian manifolds.

Every model is conformally flat on a single ball chart,

    g_ij(x) = phi(x) * delta_ij,

with the factor ``phi = 1 / (1 + (c/4)|x|^2)^2`` realizing the sphere of
curvature ``c > 0`` (stereographic chart), hyperbolic space for ``c < 0``
(Poincare-type ball), and Euclidean space for ``c = 0``.  One code path
therefore covers every sign of the curvature.  A deliberately perturbed
variant breaks constant curvature and exists purely to drive negative tests.

Christoffel symbols and the curvature tensor are obtained by forward-mode
differentiation of the metric (see :mod:`paralift.ad`); finite differences
appear only in the independent test oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import ad
from .errors import ChartDomainError
from .report import make_report

__all__ = [
    "ChartModel",
    "SpaceForm",
    "flat_space",
    "conformal_ball",
    "perturbed_conformal",
    "conformal_factor",
    "metric_at",
    "inverse_metric_at",
    "christoffel_at",
    "curvature_at",
    "space_form_residual",
    "check_space_form",
]

_DOMAIN_SLACK = 1e-12


class ChartModel(Enum):
    FLAT = "flat"
    CONFORMAL_BALL = "conformal_ball"
    PERTURBED_CONFORMAL = "perturbed_conformal"


@dataclass(frozen=True)
class SpaceForm:
    """An n-dimensional base manifold of (nominally) constant curvature c.

    ``chart_radius`` bounds the chart region used by samplers and domain
    checks.  ``strength`` is read only by the perturbed model; strength zero
    reproduces the conformal ball exactly.
    """

    n: int
    c: float
    model: ChartModel
    chart_radius: float = 1.0
    strength: float = 0.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("dimension must be at least 2")
        if self.chart_radius <= 0:
            raise ValueError("chart_radius must be positive")
        if self.model is ChartModel.FLAT and self.c != 0.0:
            raise ValueError("the flat model requires zero curvature")
        if self.c < 0 and self.chart_radius ** 2 >= -4.0 / self.c:
            raise ValueError(
                "chart_radius reaches the conformal-factor singularity "
                f"(need chart_radius^2 < {-4.0 / self.c})"
            )


def flat_space(n, chart_radius=1.0):
    return SpaceForm(n, 0.0, ChartModel.FLAT, chart_radius)


def conformal_ball(n, c, chart_radius=1.0):
    return SpaceForm(n, float(c), ChartModel.CONFORMAL_BALL, chart_radius)


def perturbed_conformal(n, c, strength=0.1, chart_radius=1.0):
    return SpaceForm(n, float(c), ChartModel.PERTURBED_CONFORMAL, chart_radius,
                     float(strength))


def conformal_factor(m, x):
    """Scalar ``phi`` with ``g = phi * I`` at the chart point ``x``.

    Accepts Jet entries; domain guards compare the underlying values.
    Raises :class:`ChartDomainError` off the chart or where the conformal
    denominator fails to be positive.
    """
    r2 = sum(xi * xi for xi in x)
    if m.model is ChartModel.FLAT:
        return 1.0
    _require_in_chart(m, x, r2)
    s = 1.0 / (1.0 + 0.25 * m.c * r2)
    phi = s * s
    if m.model is ChartModel.PERTURBED_CONFORMAL:
        phi = phi * (1.0 + m.strength * x[0])
    return phi


def _require_in_chart(m, x, r2):
    r2v = ad.strip(r2)
    bound = m.chart_radius ** 2
    if r2v > bound * (1.0 + _DOMAIN_SLACK):
        raise ChartDomainError(
            f"|x|^2 = {r2v:.6g} exceeds chart bound {bound:.6g}"
        )
    if 1.0 + 0.25 * m.c * r2v <= 0.0:
        raise ChartDomainError(
            f"conformal denominator not positive at |x|^2 = {r2v:.6g}"
        )
    if m.model is ChartModel.PERTURBED_CONFORMAL:
        extra = 1.0 + m.strength * ad.strip(x[0])
        if extra <= 0.0:
            raise ChartDomainError("perturbation factor not positive")


def metric_at(m, x):
    """Metric components g_ij(x), a symmetric positive definite matrix."""
    phi = conformal_factor(m, x)
    return np.diag([phi] * m.n)


def inverse_metric_at(m, x):
    """Inverse metric g^ij(x); exact since the models are conformally flat."""
    phi = conformal_factor(m, x)
    return np.diag([1.0 / phi] * m.n)


def christoffel_at(m, x):
    """Christoffel symbols Gamma[k, i, j] = Gamma^k_ij(x).

    Built as (1/2) g^{kl} (d_i g_jl + d_j g_il - d_l g_ij) with the metric
    derivatives taken by forward-mode seeding, so the result is exact and
    remains differentiable when ``x`` itself carries Jets.
    """
    n = m.n
    xs = ad.seed(x)
    g = metric_at(m, xs)
    ginv = inverse_metric_at(m, x)
    dg = np.empty((n, n, n), dtype=object)  # dg[i, j, l] = d_i g_jl
    for j in range(n):
        for l in range(n):
            grad = ad.partials(g[j, l], n)
            for i in range(n):
                dg[i, j, l] = grad[i]
    gamma = np.empty((n, n, n), dtype=object)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for l in range(n):
                    acc = acc + ginv[k, l] * (dg[i, j, l] + dg[j, i, l] - dg[l, i, j])
                gamma[k, i, j] = 0.5 * acc
    return _tighten(gamma)


def curvature_at(m, x):
    """Curvature components R[h, k, i, j] = R^h_kij(x).

    R^h_kij = d_i Gamma^h_jk - d_j Gamma^h_ik
              + Gamma^h_il Gamma^l_jk - Gamma^h_jl Gamma^l_ik,
    antisymmetric in (i, j) by construction.  The Gamma derivatives come from
    a second, nested level of forward-mode seeding.
    """
    n = m.n
    xs = ad.seed(x)
    gs = christoffel_at(m, xs)
    gamma = np.empty((n, n, n), dtype=object)
    dgamma = np.empty((n, n, n, n), dtype=object)  # dgamma[a, k, i, j] = d_a Gamma^k_ij
    for k in range(n):
        for i in range(n):
            for j in range(n):
                gamma[k, i, j] = ad.val(gs[k, i, j])
                grad = ad.partials(gs[k, i, j], n)
                for a in range(n):
                    dgamma[a, k, i, j] = grad[a]
    riem = np.empty((n, n, n, n), dtype=object)
    for h in range(n):
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    acc = dgamma[i, h, j, k] - dgamma[j, h, i, k]
                    for l in range(n):
                        acc = acc + (gamma[h, i, l] * gamma[l, j, k]
                                     - gamma[h, j, l] * gamma[l, i, k])
                    riem[h, k, i, j] = acc
    return _tighten(riem)


def space_form_residual(m, x):
    """Max-abs deviation of R from the constant-curvature shape.

    The target is R^h_kij = c (delta^h_i g_kj - delta^h_j g_ki); any genuine
    space form drives this to rounding level, the perturbed model does not.
    """
    riem = curvature_at(m, x)
    g = metric_at(m, x)
    eye = np.eye(m.n)
    target = m.c * (np.einsum("hi,kj->hkij", eye, g)
                    - np.einsum("hj,ki->hkij", eye, g))
    return float(np.max(np.abs(riem - target)))


def check_space_form(m, sample, tol=1e-9, *, seed=None):
    """Residual report for the constant-curvature shape over chart points."""
    points = list(sample)
    if not points:
        raise ValueError("sample must be nonempty")
    residuals = [space_form_residual(m, q) for q in points]
    return make_report("space_form", residuals, points, tol, seed=seed)


def _tighten(a):
    try:
        return a.astype(float)
    except (TypeError, ValueError):
        return a
