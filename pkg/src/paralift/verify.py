"""Property checkers for the lifted structures.

Each check evaluates a residual at sampled phase points and reduces by max,
so verdicts do not depend on evaluation order.  Derivative-based residuals
(Nijenhuis tensor, exterior derivative) use forward-mode differentiation of
the coordinate-frame evaluators; :func:`fd_oracle` provides the independent
finite-difference cross check used by the test suite.

Default tolerances: 1e-10 for purely algebraic identities, 1e-8 for
first-derivative residuals (one differentiation pass through the Christoffel
contractions costs a couple of digits near the chart edge), 1e-6 relative
for comparisons against central finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ad
from .errors import ContractError
from .lifted import G_adapted, Omega_coordinate, P_adapted, P_coordinate_function
from .phase import CotangentPoint, frame_matrices, make_point
from .report import CheckReport, make_report
from .spaceform import check_space_form

__all__ = [
    "CheckReport",
    "PhaseSample",
    "sample_points",
    "fd_oracle",
    "nijenhuis_at",
    "exterior_derivative_2form",
    "analytic_dOmega",
    "check_almost_product",
    "check_integrability",
    "check_compatibility",
    "check_metric_signature",
    "check_closure",
    "check_closure_agreement",
    "check_para_kahler",
    "check_space_form",
    "run_check",
    "DEFAULT_TOLERANCES",
    "CHECK_NAMES",
]

DEFAULT_TOLERANCES = {
    "space_form": 1e-9,
    "almost_product": 1e-10,
    "compatibility": 1e-10,
    "metric_signature": 0.0,
    "integrability": 1e-8,
    "closure": 1e-8,
    "closure_agreement": 1e-8,
    "para_kahler": 1e-8,
}

CHECK_NAMES = tuple(DEFAULT_TOLERANCES)

_EIGENVALUE_TOL = 1e-10


@dataclass(frozen=True)
class PhaseSample:
    """Sampled phase points plus the seed that produced them."""

    points: tuple
    seed: int | None = None


def sample_points(m, count, seed, *, p_max=2.0, t_max=2.0, chart_fraction=0.8):
    """Deterministic sample of phase points for the checkers.

    q is uniform in the ball |q| <= chart_fraction * chart_radius, p uniform
    in |p| <= p_max; draws with energy density above t_max are rejected and
    redrawn.  The first point always carries p = 0, since several coefficient
    formulas have removable behavior at t = 0 that deserves coverage.
    """
    rng = np.random.default_rng(seed)
    radius = chart_fraction * m.chart_radius
    points = []
    attempts = 0
    limit = max(1000, 400 * count)
    while len(points) < count:
        attempts += 1
        if attempts > limit:
            raise RuntimeError(
                f"sampler starved: {len(points)} of {count} points after "
                f"{attempts} draws (t_max = {t_max:g} too tight?)")
        q = _ball(rng, m.n, radius)
        p = np.zeros(m.n) if not points else _ball(rng, m.n, p_max)
        pt = make_point(m, q, p)
        if pt.t > t_max:
            continue
        points.append(pt)
    return PhaseSample(points=tuple(points), seed=seed)


def _ball(rng, n, radius):
    v = rng.standard_normal(n)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        v = np.zeros(n)
        v[0] = 1.0
        norm = 1.0
    r = radius * rng.random() ** (1.0 / n)
    return (r / norm) * v


def _points_and_seed(sample):
    if isinstance(sample, PhaseSample):
        return list(sample.points), sample.seed
    return list(sample), None


def fd_oracle(f, x, step=1e-5):
    """Central finite differences of ``f`` along each coordinate of ``x``.

    Returns an array shaped like ``f(x)`` with one trailing axis per input
    coordinate.  This is the independent oracle for every forward-mode
    derivative in the package; it never shares code with the Jet path.
    """
    x = np.asarray(x, dtype=float)
    base = np.asarray(f(x), dtype=float)
    out = np.zeros(base.shape + (x.size,))
    for a in range(x.size):
        e = np.zeros(x.size)
        e[a] = step
        out[..., a] = (np.asarray(f(x + e), dtype=float)
                       - np.asarray(f(x - e), dtype=float)) / (2.0 * step)
    return out


def nijenhuis_at(ls, pt):
    """Nijenhuis tensor N[c, a, b] = N^c_ab of P at ``pt``, in coordinates.

    N^c_ab = P^d_a d_d P^c_b - P^d_b d_d P^c_a
             - P^c_d (d_a P^d_b - d_b P^d_a),

    with every partial taken by forward mode in all 2n variables.  The
    result is antisymmetric in (a, b) exactly.
    """
    fn = P_coordinate_function(ls)
    pmat, dp = ad.jacobian(fn, pt.z())  # dp[c, b, a] = d_a P^c_b
    t1 = np.einsum("da,cbd->cab", pmat, dp)
    t2 = np.einsum("db,cad->cab", pmat, dp)
    t3 = np.einsum("cd,dba->cab", pmat, dp)
    t4 = np.einsum("cd,dab->cab", pmat, dp)
    # grouped so that swapping (a, b) negates each parenthesis bitwise
    return (t1 - t2) - (t3 - t4)


def exterior_derivative_2form(omega, pt):
    """(d omega)[a, b, c] = d_a omega_bc + d_b omega_ca + d_c omega_ab.

    ``omega`` maps z = (q, p) to an antisymmetric matrix and must be
    Jet-evaluable near ``pt``; the result is fully antisymmetric.
    """
    z = pt.z() if isinstance(pt, CotangentPoint) else np.asarray(pt, float)
    _, jac = ad.jacobian(omega, z)  # jac[b, c, a] = d_a omega_bc
    return (np.einsum("bca->abc", jac)
            + np.einsum("cab->abc", jac)
            + jac)


_PERMS3 = (
    ((0, 1, 2), 1.0), ((1, 2, 0), 1.0), ((2, 0, 1), 1.0),
    ((0, 2, 1), -1.0), ((2, 1, 0), -1.0), ((1, 0, 2), -1.0),
)


def analytic_dOmega(ls, pt):
    """Closed-form d Omega in coordinate components at ``pt``.

    In the mixed coframe {dq^i, Dp_j} the derivative of the fundamental form
    collapses to

        d Omega = (1/2)(mu - lambda') p_k (g^{kh} d^j_i - g^{kj} d^h_i)
                  Dp_h ^ Dp_j ^ dq^i,

    which vanishes identically iff mu = lambda'.  The mixed-coframe tensor is
    antisymmetrized over the basis wedges and then converted to coordinate
    components through Dp_j = dp_j - Gamma0_jh dq^h.
    """
    spec = ls.spec
    if spec is None or not spec.is_para_hermitian:
        raise ContractError("analytic d Omega needs a para-Hermitian spec")
    n = ls.m.n
    two_n = 2 * n
    t = pt.t
    factor = 0.5 * (float(spec.mu(t)) - float(spec.lam.deriv(t)))
    g0 = pt.g0  # p_k g^{kh} = g0[h]
    mixed = np.zeros((two_n, two_n, two_n))
    for h in range(n):
        for j in range(n):
            for i in range(n):
                coeff = factor * (g0[h] * (1.0 if i == j else 0.0)
                                  - g0[j] * (1.0 if i == h else 0.0))
                if coeff == 0.0:
                    continue
                _add_wedge(mixed, n + h, n + j, i, coeff)
    _, binv = frame_matrices(pt.Gamma0)
    return np.einsum("abc,aA,bB,cC->ABC", mixed, binv, binv, binv)


def _add_wedge(tensor, a, b, c, coeff):
    idx = (a, b, c)
    for perm, sign in _PERMS3:
        tensor[idx[perm[0]], idx[perm[1]], idx[perm[2]]] += sign * coeff


def check_almost_product(ls, sample, tol=None):
    """max over the sample of |P_adapted^2 - I|_inf."""
    tol = DEFAULT_TOLERANCES["almost_product"] if tol is None else tol
    points, seed = _points_and_seed(sample)
    eye = np.eye(2 * ls.m.n)
    residuals = []
    for pt in points:
        pmat = P_adapted(ls, pt)
        residuals.append(float(np.max(np.abs(pmat @ pmat - eye))))
    return make_report("almost_product", residuals, points, tol, seed=seed)


def check_integrability(ls, sample, tol=None):
    """max over the sample of |N_P|_inf in coordinate components."""
    tol = DEFAULT_TOLERANCES["integrability"] if tol is None else tol
    points, seed = _points_and_seed(sample)
    residuals = [float(np.max(np.abs(nijenhuis_at(ls, pt)))) for pt in points]
    notes = ()
    if ls.m.n == 2:
        notes = ("base dimension 2 is outside the guaranteed range (n > 2) "
                 "of the constant-curvature characterization; residuals are "
                 "informational",)
    return make_report("integrability", residuals, points, tol, seed=seed,
                       notes=notes)


def check_compatibility(ls, sample, tol=None):
    """max over the sample of |P^T G P - eps G|_inf in the adapted frame."""
    tol = DEFAULT_TOLERANCES["compatibility"] if tol is None else tol
    points, seed = _points_and_seed(sample)
    if ls.spec is None:
        raise ContractError("compatibility check needs a coefficient spec "
                            "with a metric part")
    eps = float(ls.spec.epsilon)
    residuals = []
    for pt in points:
        pmat = P_adapted(ls, pt)
        gmat = G_adapted(ls, pt)
        residuals.append(float(np.max(np.abs(pmat.T @ gmat @ pmat - eps * gmat))))
    return make_report("compatibility", residuals, points, tol, seed=seed)


def check_metric_signature(ls, sample, tol=None):
    """Eigenvalue-sign census of G_adapted against the expected signature.

    Expected: (n, n) for eps = -1 (neutral), (2n, 0) for a positive eps = +1
    spec.  The residual counts misclassified points, so any nonzero value
    fails at the default tolerance 0.
    """
    tol = DEFAULT_TOLERANCES["metric_signature"] if tol is None else tol
    points, seed = _points_and_seed(sample)
    n = ls.m.n
    spec = ls.spec
    if spec is None:
        raise ContractError("signature check needs a coefficient spec with "
                            "a metric part")
    if spec.epsilon == -1:
        expected = (n, n)
    elif "positive" in spec.flags:
        expected = (2 * n, 0)
    else:
        expected = None
    residuals = []
    for pt in points:
        eigs = np.linalg.eigvalsh(G_adapted(ls, pt))
        pos = int(np.sum(eigs > _EIGENVALUE_TOL))
        neg = int(np.sum(eigs < -_EIGENVALUE_TOL))
        if expected is None:
            residuals.append(0.0)
        else:
            residuals.append(0.0 if (pos, neg) == expected else 1.0)
    notes = ()
    if expected is None:
        notes = ("no expected signature for a non-positive eps = +1 spec; "
                 "check is vacuous",)
    details = {"expected_positive": expected[0] if expected else None,
               "expected_negative": expected[1] if expected else None}
    return make_report("metric_signature", residuals, points, tol, seed=seed,
                       details=details, notes=notes)


def check_closure(ls, sample, tol=None):
    """max over the sample of |d Omega|_inf by forward-mode differentiation."""
    tol = DEFAULT_TOLERANCES["closure"] if tol is None else tol
    points, seed = _points_and_seed(sample)
    omega = Omega_coordinate(ls)
    residuals = [
        float(np.max(np.abs(exterior_derivative_2form(omega, pt))))
        for pt in points
    ]
    return make_report("closure", residuals, points, tol, seed=seed)


def check_closure_agreement(ls, sample, tol=None):
    """max over the sample of |d Omega (forward mode) - d Omega (closed form)|."""
    tol = DEFAULT_TOLERANCES["closure_agreement"] if tol is None else tol
    points, seed = _points_and_seed(sample)
    omega = Omega_coordinate(ls)
    residuals = []
    for pt in points:
        numeric = exterior_derivative_2form(omega, pt)
        analytic = analytic_dOmega(ls, pt)
        residuals.append(float(np.max(np.abs(numeric - analytic))))
    return make_report("closure_agreement", residuals, points, tol, seed=seed)


def check_para_kahler(ls, sample, tol=None):
    """Composite check: compatibility, integrability and closure at one tol.

    Passes iff all three sub-checks pass; the report records each
    sub-residual and inherits the witnesses of the worst sub-check.
    """
    tol = DEFAULT_TOLERANCES["para_kahler"] if tol is None else tol
    points, seed = _points_and_seed(sample)
    subs = {
        "compatibility": check_compatibility(ls, points, tol),
        "integrability": check_integrability(ls, points, tol),
        "closure": check_closure(ls, points, tol),
    }
    worst = max(subs, key=lambda k: subs[k].max_residual)
    details = {f"{name}_residual": rep.max_residual for name, rep in subs.items()}
    report = make_report("para_kahler",
                         [rep.max_residual for rep in subs.values()],
                         [{"sub_check": name} for name in subs],
                         tol, seed=seed, details=details)
    # Witnesses of the dominating sub-check are the informative ones.
    return CheckReport(
        check_name=report.check_name,
        points_sampled=len(points),
        max_residual=report.max_residual,
        tolerance=report.tolerance,
        passed=report.passed,
        witnesses=subs[worst].witnesses,
        seed=seed,
        details=report.details,
        notes=subs[worst].notes,
    )


def _space_form_adapter(ls, sample, tol):
    points, seed = _points_and_seed(sample)
    tol = DEFAULT_TOLERANCES["space_form"] if tol is None else tol
    base = [pt.q for pt in points]
    return check_space_form(ls.m, base, tol, seed=seed)


_CHECKS = {
    "space_form": _space_form_adapter,
    "almost_product": check_almost_product,
    "integrability": check_integrability,
    "compatibility": check_compatibility,
    "metric_signature": check_metric_signature,
    "closure": check_closure,
    "closure_agreement": check_closure_agreement,
    "para_kahler": check_para_kahler,
}


def run_check(name, ls, sample, tol=None):
    """Dispatch one named check; see :data:`CHECK_NAMES` for valid names."""
    try:
        fn = _CHECKS[name]
    except KeyError:
        raise KeyError(f"unknown check {name!r}; valid: {sorted(_CHECKS)}")
    return fn(ls, sample, tol)
