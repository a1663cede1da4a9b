"""Theorem checkers: positive and negative directions, oracles, determinism."""

import math
from dataclasses import replace

import numpy as np
import pytest

from paralift import (
    LiftedStructure,
    StructureKind,
    affine,
    analytic_dOmega,
    check_almost_product,
    check_closure,
    check_closure_agreement,
    check_compatibility,
    check_integrability,
    check_metric_signature,
    check_para_kahler,
    conformal_ball,
    constant,
    exterior_derivative_2form,
    fd_oracle,
    flat_space,
    integrable_spec,
    make_point,
    nijenhuis_at,
    perturbed_conformal,
    polynomial,
    rational_spec,
    sample_points,
    with_metric,
)
from paralift import P_coordinate_function, Omega_coordinate, ad
from paralift.report import make_report

N = StructureKind.NATURAL_DIAGONAL


def rational_ls(m, lam=None, mu=None, with_g=True):
    spec = rational_spec(1.0, 2.0, polynomial([0.0, 1.0]), curvature=m.c)
    if with_g:
        spec = with_metric(spec, lam or constant(1.0),
                           mu if mu is not None else constant(0.0))
    return LiftedStructure(m=m, kind=N, spec=spec)


def para_kahler_ls(m, curvature=None):
    spec = integrable_spec(constant(1.0), curvature=m.c if curvature is None
                           else curvature)
    spec = with_metric(spec, affine(1.0, 1.0))  # mu derived as lambda' = 1
    return LiftedStructure(m=m, kind=N, spec=spec)


# ----------------------------------------------------------------- sampler


def test_sampler_is_deterministic_and_in_bounds():
    m = conformal_ball(3, 1.0)
    s1 = sample_points(m, 30, 42, t_max=2.0)
    s2 = sample_points(m, 30, 42, t_max=2.0)
    assert s1.seed == 42
    for a, b in zip(s1.points, s2.points):
        assert np.array_equal(a.q, b.q) and np.array_equal(a.p, b.p)
    assert np.array_equal(s1.points[0].p, np.zeros(3))  # t = 0 covered
    for pt in s1.points:
        assert np.linalg.norm(pt.q) <= 0.8 * m.chart_radius + 1e-12
        assert np.linalg.norm(pt.p) <= 2.0 + 1e-12
        assert pt.t <= 2.0


def test_sampler_starvation_reported():
    m = flat_space(3)
    with pytest.raises(RuntimeError):
        sample_points(m, 10, 1, p_max=2.0, t_max=1e-12)


# ------------------------------------------------- almost product (squares)


def test_almost_product_passes_for_rational_family():
    m = conformal_ball(3, 1.0)
    ls = rational_ls(m, with_g=False)
    rep = check_almost_product(ls, sample_points(m, 100, 1), 1e-11)
    assert rep.passed and rep.points_sampled == 100
    assert rep.seed == 1 and len(rep.witnesses) == 3


def test_almost_product_detects_perturbed_b2():
    m = conformal_ball(3, 1.0)
    ls = rational_ls(m, with_g=False)
    bad = replace(ls.spec, b2=ls.spec.b2 * 1.1)  # bypasses validation
    rep = check_almost_product(LiftedStructure(m=m, kind=N, spec=bad),
                               sample_points(m, 100, 1), 1e-6)
    assert not rep.passed
    assert rep.max_residual > 1e-6


def test_almost_product_cruceanu_p_exact():
    m = conformal_ball(3, 1.0)
    ls = LiftedStructure(m=m, kind=StructureKind.CRUCEANU_P)
    rep = check_almost_product(ls, sample_points(m, 10, 1), 0.0)
    assert rep.passed and rep.max_residual == 0.0


# ----------------------------------------------------- Nijenhuis / integrability


def test_nijenhuis_cruceanu_p_vanishes_iff_flat():
    flat = flat_space(3)
    ls_flat = LiftedStructure(m=flat, kind=StructureKind.CRUCEANU_P)
    for pt in sample_points(flat, 5, 3).points:
        assert np.max(np.abs(nijenhuis_at(ls_flat, pt))) < 1e-11
    curved = conformal_ball(3, 1.0)
    ls_curved = LiftedStructure(m=curved, kind=StructureKind.CRUCEANU_P)
    worst = max(np.max(np.abs(nijenhuis_at(ls_curved, pt)))
                for pt in sample_points(curved, 10, 3).points)
    assert worst > 1e-3


def test_nijenhuis_antisymmetry_is_exact():
    m = conformal_ball(3, -1.0)
    ls = rational_ls(m, with_g=False)
    pt = sample_points(m, 3, 5).points[-1]
    nij = nijenhuis_at(ls, pt)
    assert np.array_equal(nij, -np.transpose(nij, (0, 2, 1)))


def test_integrability_sufficiency_and_necessity():
    m = conformal_ball(3, 1.0)
    ls = para_kahler_ls(m)
    sample = sample_points(m, 30, 7)
    rep = check_integrability(ls, sample, 1e-8)
    assert rep.passed

    # same coefficients over a non-space-form base
    mp = perturbed_conformal(3, 1.0, 0.1)
    ls_bad_base = LiftedStructure(m=mp, kind=N, spec=ls.spec)
    rep = check_integrability(ls_bad_base, sample_points(mp, 10, 7), 1e-6)
    assert not rep.passed and rep.max_residual > 1e-6

    # coefficients derived for the wrong curvature
    m_neg = conformal_ball(3, -1.0)
    ls_mismatch = LiftedStructure(m=m_neg, kind=N, spec=ls.spec)
    rep = check_integrability(ls_mismatch, sample_points(m_neg, 10, 7), 1e-6)
    assert not rep.passed and rep.max_residual > 1e-6


def test_integrability_n2_note():
    m = conformal_ball(2, 1.0)
    spec = integrable_spec(constant(1.0), curvature=1.0)
    ls = LiftedStructure(m=m, kind=N, spec=spec)
    rep = check_integrability(ls, sample_points(m, 3, 1), 1e-8)
    assert any("dimension 2" in note for note in rep.notes)


# ------------------------------------------------------------- compatibility


def test_compatibility_negative_epsilon():
    m = conformal_ball(3, 1.0)
    ls = rational_ls(m)
    rep = check_compatibility(ls, sample_points(m, 100, 11), 1e-11)
    assert rep.passed


def test_compatibility_positive_epsilon():
    m = conformal_ball(3, 1.0)
    spec = integrable_spec(constant(1.0), curvature=1.0, epsilon=1)
    spec = with_metric(spec, constant(1.0), constant(0.0))
    ls = LiftedStructure(m=m, kind=N, spec=spec)
    rep = check_compatibility(ls, sample_points(m, 100, 11), 1e-11)
    assert rep.passed


def test_compatibility_detects_broken_chain():
    m = conformal_ball(3, 1.0)
    ls = rational_ls(m)
    bad = replace(ls.spec, c1=ls.spec.c1 * 1.1)  # breaks the first chain only
    rep = check_compatibility(LiftedStructure(m=m, kind=N, spec=bad),
                              sample_points(m, 50, 11), 1e-6)
    assert not rep.passed and rep.max_residual > 1e-6


def test_metric_signature_neutral_and_positive():
    m = conformal_ball(3, 1.0)
    rep = check_metric_signature(rational_ls(m), sample_points(m, 20, 13))
    assert rep.passed and rep.details["expected_positive"] == 3

    spec = with_metric(integrable_spec(constant(1.0), curvature=1.0, epsilon=1),
                       constant(1.0), constant(0.0))
    ls = LiftedStructure(m=m, kind=N, spec=spec)
    rep = check_metric_signature(ls, sample_points(m, 20, 13))
    assert rep.passed and rep.details["expected_positive"] == 6


# ------------------------------------------------------------ d Omega checks


def test_exterior_derivative_of_constant_form_is_zero():
    const = np.zeros((4, 4))
    const[0, 2] = 1.0
    const[2, 0] = -1.0

    def omega(z):
        return const + 0.0 * np.outer(z, z)  # constant but z-typed

    m = flat_space(2)
    pt = make_point(m, [0.1, 0.2], [0.5, -0.5])
    d = exterior_derivative_2form(omega, pt)
    assert np.max(np.abs(d)) == 0.0


def test_canonical_form_is_closed():
    m = flat_space(3)
    spec = with_metric(integrable_spec(constant(1.0), curvature=0.0),
                       constant(1.0), constant(0.0))
    ls = LiftedStructure(m=m, kind=N, spec=spec)
    omega = Omega_coordinate(ls)
    for pt in sample_points(m, 5, 17).points:
        assert np.max(np.abs(exterior_derivative_2form(omega, pt))) < 1e-12


def test_d_omega_fully_antisymmetric():
    m = conformal_ball(3, 1.0)
    ls = rational_ls(m, lam=affine(1.0, 1.0), mu=constant(0.0))
    omega = Omega_coordinate(ls)
    pt = sample_points(m, 4, 19).points[-1]
    d = exterior_derivative_2form(omega, pt)
    for perm, sign in [((0, 2, 1), -1), ((1, 0, 2), -1), ((2, 1, 0), -1),
                       ((1, 2, 0), 1), ((2, 0, 1), 1)]:
        assert np.max(np.abs(np.transpose(d, perm) - sign * d)) < 1e-12


def test_analytic_d_omega_flat_frozen_pattern():
    # lambda = 1 + t, mu = 0, flat base, p = (1, 0): the only independent
    # component is d Omega[p1, p2, q2] = mu - lambda' = -1
    m = flat_space(2)
    spec = with_metric(integrable_spec(constant(1.0), curvature=0.0),
                       affine(1.0, 1.0), constant(0.0))
    ls = LiftedStructure(m=m, kind=N, spec=spec)
    pt = make_point(m, [0.0, 0.0], [1.0, 0.0])
    d = analytic_dOmega(ls, pt)
    assert np.isclose(d[2, 3, 1], -1.0, atol=1e-14)
    assert np.isclose(d[3, 2, 1], 1.0, atol=1e-14)
    assert np.isclose(d[2, 3, 0], 0.0, atol=1e-14)
    numeric = exterior_derivative_2form(Omega_coordinate(ls), pt)
    assert np.max(np.abs(numeric - d)) < 1e-12


def test_derived_mu_closes_omega():
    for c in (1.0, -1.0):
        m = conformal_ball(3, c)
        spec = with_metric(rational_spec(1.0, 2.0, polynomial([0.0, 1.0]),
                                         curvature=c),
                           affine(1.0, 1.0))  # mu derived as lambda' = 1
        ls = LiftedStructure(m=m, kind=N, spec=spec)
        sample = sample_points(m, 10, 23)
        for pt in sample.points:
            assert np.max(np.abs(analytic_dOmega(ls, pt))) < 1e-14
        rep = check_closure(ls, sample, 1e-8)
        assert rep.passed


def test_numeric_and_analytic_d_omega_agree():
    for c in (1.0, -1.0):
        m = conformal_ball(3, c)
        spec = with_metric(rational_spec(1.0, 2.0, polynomial([0.0, 1.0]),
                                         curvature=c),
                           affine(1.0, 1.0), constant(0.0))
        ls = LiftedStructure(m=m, kind=N, spec=spec)
        sample = sample_points(m, 20, 29)
        rep = check_closure_agreement(ls, sample, 1e-8)
        assert rep.passed
        # and the form is genuinely non-closed here (mu != lambda')
        rep = check_closure(ls, sample, 1e-8)
        assert not rep.passed


# ---------------------------------------------------------------- composite


def test_para_kahler_composite_passes():
    m = conformal_ball(3, 1.0)
    ls = para_kahler_ls(m)
    rep = check_para_kahler(ls, sample_points(m, 30, 31), 1e-8)
    assert rep.passed
    assert set(rep.details) == {"compatibility_residual",
                                "integrability_residual", "closure_residual"}


def test_para_kahler_fails_only_through_closure_when_mu_is_off():
    m = conformal_ball(3, 1.0)
    spec = integrable_spec(constant(1.0), curvature=1.0)
    spec = with_metric(spec, affine(1.0, 1.0), constant(0.0))  # mu != lambda'
    ls = LiftedStructure(m=m, kind=N, spec=spec)
    sample = sample_points(m, 20, 31)
    rep = check_para_kahler(ls, sample, 1e-8)
    assert not rep.passed
    assert rep.details["closure_residual"] > 1e-8
    assert rep.details["compatibility_residual"] <= 1e-8
    assert rep.details["integrability_residual"] <= 1e-8


def test_para_kahler_constant_lambda_rational_family():
    # u = c alpha beta^2 makes the rational family integrable; lambda = 1,
    # mu = 0 = lambda' then closes the 2-form
    m = conformal_ball(3, 1.0)
    spec = with_metric(rational_spec(1.0, 2.0, constant(4.0), curvature=1.0),
                       constant(1.0), constant(0.0))
    ls = LiftedStructure(m=m, kind=N, spec=spec)
    rep = check_para_kahler(ls, sample_points(m, 30, 37), 1e-8)
    assert rep.passed


# --------------------------------------------------------- oracle agreement


def test_fd_oracle_energy_gradient():
    m = flat_space(2)

    def t_of_p(p):
        return 0.5 * float(p @ p)

    grad = fd_oracle(t_of_p, np.array([1.0, 2.0]))
    assert np.allclose(grad, [1.0, 2.0], rtol=1e-8)


def test_p_coordinate_entries_ad_vs_fd(rng):
    m = conformal_ball(3, 1.0)
    ls = para_kahler_ls(m)
    fn = P_coordinate_function(ls)
    for pt in sample_points(m, 10, 41).points:
        z = pt.z()
        _, jac = ad.jacobian(fn, z)
        fd = fd_oracle(fn, z)
        scale = max(1.0, float(np.max(np.abs(jac))))
        assert np.max(np.abs(jac - fd)) < 1e-6 * scale


def test_omega_entries_ad_vs_fd(rng):
    m = conformal_ball(3, -1.0)
    spec = with_metric(rational_spec(1.0, 2.0, polynomial([0.0, 1.0]),
                                     curvature=-1.0), affine(1.0, 0.5))
    ls = LiftedStructure(m=m, kind=N, spec=spec)
    fn = Omega_coordinate(ls)
    for pt in sample_points(m, 5, 43).points:
        z = pt.z()
        _, jac = ad.jacobian(fn, z)
        fd = fd_oracle(fn, z)
        scale = max(1.0, float(np.max(np.abs(jac))))
        assert np.max(np.abs(jac - fd)) < 1e-6 * scale


# ---------------------------------------------------- biconditional battery


@pytest.mark.parametrize("field,checker", [
    ("b2", check_almost_product),
    ("b1", check_integrability),
    ("c1", check_compatibility),
    ("mu", check_closure),
])
def test_biconditional_battery(field, checker):
    # each identity passes tight for derived coefficients and fails loose when
    # exactly one coefficient family is scaled by 1.1, on the same sample
    m = conformal_ball(3, 1.0)
    spec = with_metric(integrable_spec(constant(1.0), curvature=1.0),
                       affine(1.0, 1.0))  # mu derived, so closure holds too
    ls = LiftedStructure(m=m, kind=N, spec=spec)
    sample = sample_points(m, 15, 47)
    assert checker(ls, sample).passed

    perturbed = replace(spec, **{field: getattr(spec, field) * 1.1})
    bad = LiftedStructure(m=m, kind=N, spec=perturbed)
    rep = checker(bad, sample, 1e-6)
    assert not rep.passed and rep.max_residual > 1e-6


# ------------------------------------------------------- verdict invariance


def test_verdicts_stable_across_seeds():
    m = conformal_ball(3, 1.0)
    good = para_kahler_ls(m)
    bad = LiftedStructure(m=m, kind=N,
                          spec=replace(good.spec, b1=good.spec.b1 * 1.1))
    for seed in (1, 2, 3, 4, 5):
        sample = sample_points(m, 10, seed)
        assert check_integrability(good, sample, 1e-8).passed
        assert not check_integrability(bad, sample, 1e-6).passed


# ----------------------------------------------------------- report plumbing


def test_make_report_handles_nan():
    pts = [{"q": [0.0]}, {"q": [1.0]}]
    rep = make_report("demo", [0.5, math.nan], pts, 1e3)
    assert not rep.passed
    assert any("non-finite" in n for n in rep.notes)
    d = rep.to_dict()
    assert d["max_residual"] is None
    assert d["witnesses"][0]["residual"] is None  # nan witness sorts first


def test_make_report_witness_order():
    pts = [{"q": [float(i)]} for i in range(5)]
    rep = make_report("demo", [0.1, 0.5, 0.3, 0.2, 0.4], pts, 1.0)
    assert rep.passed
    resids = [w.residual for w in rep.witnesses]
    assert resids == sorted(resids, reverse=True)
    assert len(rep.witnesses) == 3
