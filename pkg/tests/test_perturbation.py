"""Expansion core tests.

Every derived quantity is checked against an oracle that does not share
its code path: hand-solved 2x2 and 3x2 cases, the dense block solve, the
exact decomposition of the perturbed matrix, and algebraic identities
(linearity, orthogonality of corrections, back substitution).
"""

import numpy as np
import pytest

from helpers import make_instance

import svdpert as sp
from svdpert import FormulaVariant
from svdpert.errors import (
    DimensionMismatch,
    GapTooSmall,
    IndexOutOfRange,
    InvalidDims,
    SingularSystem,
)

DELTA = 1e-3


def diag_embedded(values, n):
    """n x p matrix holding diag(values) on its top block."""
    p = len(values)
    x = np.zeros((n, p))
    for j, v in enumerate(values):
        x[j, j] = v
    return x


# --------------------------------------------------------------- partition

def test_partition_square_diag():
    part = sp.partition_svd(sp.svd(np.diag([3.0, 2.0, 1.0])), 1)
    assert part.sigma1 == 3.0
    assert np.array_equal(part.u1, np.array([1.0, 0.0, 0.0]))
    assert np.array_equal(part.v1, np.array([1.0, 0.0, 0.0]))
    assert np.array_equal(part.Sigma2, np.array([2.0, 1.0]))
    assert np.array_equal(part.U2, np.eye(3)[:, 1:])
    assert np.array_equal(part.V2, np.eye(3)[:, 1:])
    assert part.U3.shape == (3, 0)
    assert part.n == 3 and part.p == 3


def test_partition_tall_has_left_complement():
    x = diag_embedded([3.0, 2.0, 1.0], 5)
    part = sp.partition_svd(sp.svd(x), 1)
    assert part.U3.shape == (5, 2)
    assert np.array_equal(part.U3, np.eye(5)[:, 3:])


def test_partition_interior_triplet():
    part = sp.partition_svd(sp.svd(np.diag([3.0, 2.0, 1.0])), 2)
    assert part.sigma1 == 2.0
    assert np.array_equal(part.u1, np.array([0.0, 1.0, 0.0]))
    # remaining values keep their descending order
    assert np.array_equal(part.Sigma2, np.array([3.0, 1.0]))


def test_partition_gap_too_small():
    full = sp.SvdFull(U=np.eye(3), S=np.array([3.0, 3.0 - 1e-10, 1.0]), V=np.eye(3))
    with pytest.raises(GapTooSmall) as exc:
        sp.partition_svd(full, 1)
    assert exc.value.k == 1
    assert exc.value.gap <= 2e-10


def test_partition_zero_triplet_rejected():
    # sigma_k = 0 is never expandable even when separated
    full = sp.SvdFull(U=np.eye(3), S=np.array([3.0, 1.0, 0.0]), V=np.eye(3))
    with pytest.raises(GapTooSmall):
        sp.partition_svd(full, 3)


def test_partition_tall_gap_includes_zero_spectrum():
    # n > p: the complement behaves like singular value 0, so a tiny
    # sigma_p collides with it
    x = diag_embedded([3.0, 3e-9], 4)
    with pytest.raises(GapTooSmall):
        sp.partition_svd(sp.svd(x), 2)


def test_partition_index_and_orientation_errors():
    full = sp.svd(np.diag([3.0, 1.0]))
    with pytest.raises(IndexOutOfRange):
        sp.partition_svd(full, 0)
    with pytest.raises(IndexOutOfRange):
        sp.partition_svd(full, 3)
    with pytest.raises(InvalidDims):
        sp.partition_svd(sp.svd(np.ones((2, 3)) + np.eye(2, 3)), 1)


def test_triplet_gap_cases():
    full = sp.svd(np.diag([3.0, 2.0, 1.0]))
    assert sp.triplet_gap(full, 1) == 1.0
    assert sp.triplet_gap(full, 2) == 1.0
    tall = sp.svd(diag_embedded([3.0, 0.5], 4))
    # distance to sigma_1 is 2.5 but the zero spectrum is closer
    assert sp.triplet_gap(tall, 2) == 0.5


# ------------------------------------------------------------- projections

def test_projections_hand_case():
    part = sp.partition_svd(sp.svd(np.diag([3.0, 1.0])), 1)
    e = np.array([[0.0, DELTA], [DELTA, 0.0]])
    proj = sp.compute_projections(part, e)
    assert proj.phi1 == 0.0
    assert np.array_equal(proj.f12, np.array([DELTA]))
    assert np.array_equal(proj.f21, np.array([DELTA]))
    assert proj.f31.shape == (0,)
    assert np.array_equal(proj.F22, np.array([[0.0]]))


def test_projections_rank_one_alignment():
    part = sp.partition_svd(sp.svd(np.diag([3.0, 2.0, 1.0])), 1)
    e = np.outer(part.u1, part.v1)
    proj = sp.compute_projections(part, e)
    assert proj.phi1 == 1.0
    assert np.all(proj.f12 == 0.0)
    assert np.all(proj.f21 == 0.0)
    assert np.all(proj.F22 == 0.0)


def test_projections_zero_perturbation():
    x, _ = make_instance(5, 3, 2)
    part = sp.partition_svd(sp.svd(x), 1)
    proj = sp.compute_projections(part, np.zeros((5, 3)))
    assert proj.phi1 == 0.0
    assert np.all(proj.f12 == 0.0) and np.all(proj.f21 == 0.0)
    assert np.all(proj.f31 == 0.0)
    assert np.all(proj.F22 == 0.0) and np.all(proj.F32 == 0.0)


def test_projections_shape_check():
    part = sp.partition_svd(sp.svd(np.diag([3.0, 1.0])), 1)
    with pytest.raises(DimensionMismatch):
        sp.compute_projections(part, np.zeros((3, 2)))


# ------------------------------------------------------------ coefficients

def test_coupled_solve_hand_case():
    part = sp.partition_svd(sp.svd(np.diag([3.0, 1.0])), 1)
    proj = sp.compute_projections(part, np.array([[0.0, DELTA], [DELTA, 0.0]]))
    g2, h2 = sp.solve_coupled_system(part, proj)
    # 3 g - h = delta, 3 h - g = delta  =>  g = h = delta / 2
    assert abs(g2[0] - DELTA / 2) <= 1e-18
    assert abs(h2[0] - DELTA / 2) <= 1e-18


def test_closed_form_hand_case_is_exact():
    part = sp.partition_svd(sp.svd(np.diag([3.0, 1.0])), 1)
    proj = sp.compute_projections(part, np.array([[0.0, DELTA], [DELTA, 0.0]]))
    co = sp.closed_form_coefficients(part, proj)
    # (3 delta + 1 delta) / (9 - 1) = delta / 2: exact in floats
    assert co.g2[0] == DELTA / 2
    assert co.h2[0] == DELTA / 2
    assert co.theta1 == 0.0
    assert co.g3.shape == (0,)


def test_sign_flip_variant_hand_case():
    part = sp.partition_svd(sp.svd(np.diag([3.0, 1.0])), 1)
    proj = sp.compute_projections(part, np.array([[0.0, DELTA], [DELTA, 0.0]]))
    co = sp.variant_coefficients(part, proj, FormulaVariant.SIGN_FLIPPED)
    # (3 delta - 1 delta) / 8 = delta / 4
    assert co.g2[0] == DELTA / 4
    assert co.h2[0] == DELTA / 4
    # complement and value corrections are untouched by the sign defect
    assert co.theta1 == 0.0


def test_closed_form_matches_direct_solve_seeded():
    for seed in range(10):
        x, e = make_instance(6 + seed % 3, 4, 100 + seed)
        part = sp.partition_svd(sp.svd(x), 1)
        proj = sp.compute_projections(part, 1e-3 * e)
        co = sp.closed_form_coefficients(part, proj)
        g2, h2 = sp.solve_coupled_system(part, proj)
        scale = max(float(np.linalg.norm(np.concatenate([g2, h2]))), 1e-30)
        diff = float(
            np.linalg.norm(np.concatenate([co.g2 - g2, co.h2 - h2]))
        )
        assert diff <= 1e-13 * max(scale, 1.0)


def test_coefficients_satisfy_coupled_equations():
    x, e = make_instance(7, 5, 31)
    part = sp.partition_svd(sp.svd(x), 1)
    proj = sp.compute_projections(part, e)
    co = sp.closed_form_coefficients(part, proj)
    lhs1 = part.sigma1 * co.g2 - part.Sigma2 * co.h2
    lhs2 = part.sigma1 * co.h2 - part.Sigma2 * co.g2
    assert np.all(np.abs(lhs1 - proj.f21) <= 1e-14)
    assert np.all(np.abs(lhs2 - proj.f12) <= 1e-14)


def test_closed_form_degenerate_denominator_guard():
    # bypass the partition gate to hit the closed form's own guard
    part = sp.SvdPartition(
        k=1,
        sigma1=3.0,
        u1=np.eye(3)[:, 0],
        v1=np.eye(2)[:, 0],
        Sigma2=np.array([3.0]),
        U2=np.eye(3)[:, 1:2],
        V2=np.eye(2)[:, 1:2],
        U3=np.eye(3)[:, 2:],
    )
    proj = sp.Projections(
        phi1=0.0,
        f12=np.array([1.0]),
        f21=np.array([1.0]),
        f31=np.array([0.0]),
        F22=np.zeros((1, 1)),
        F32=np.zeros((1, 1)),
    )
    with pytest.raises(GapTooSmall):
        sp.closed_form_coefficients(part, proj)
    with pytest.raises(SingularSystem):
        sp.solve_coupled_system(part, proj)


# --------------------------------------------------------------- expansion

def test_expand_hand_2x2():
    exp = sp.expand_matrix(
        np.diag([3.0, 1.0]), np.array([[0.0, DELTA], [DELTA, 0.0]])
    )
    assert np.array_equal(exp.u_tilde, np.array([1.0, DELTA / 2]))
    assert np.array_equal(exp.v_tilde, np.array([1.0, DELTA / 2]))
    assert exp.sigma_tilde == 3.0


def test_expand_2x2_against_exact_rotation():
    # X + E is symmetric positive definite with rotation angle
    # theta = arctan(delta) / 2; in the affine chart the exact right
    # vector is (1, tan theta) and the prediction is (1, delta / 2)
    x = np.diag([3.0, 1.0])
    e_dir = np.array([[0.0, 1.0], [1.0, 0.0]]) / np.sqrt(2.0)
    eps = DELTA * np.sqrt(2.0)
    res = sp.residuals_at(x, e_dir, eps)
    delta_eff = eps / np.sqrt(2.0)
    theta = np.arctan(delta_eff) / 2.0
    oracle = abs(np.tan(theta) - delta_eff / 2.0)
    assert abs(res.res_v - oracle) <= 1e-14
    assert res.res_v <= 1e-8
    # exact value shift is sqrt(1 + delta^2) - 1, prediction shift is 0
    sigma_oracle = np.sqrt(1.0 + delta_eff**2) - 1.0
    assert abs(res.res_sigma - sigma_oracle) <= 1e-14


def test_expand_3x2_complement_term():
    x = diag_embedded([2.0, 1.0], 3)
    eps = 1e-3
    e = np.zeros((3, 2))
    e[2, 0] = eps
    exp = sp.expand_matrix(x, e)
    assert np.array_equal(exp.u_tilde, np.array([1.0, 0.0, eps / 2.0]))
    assert np.array_equal(exp.v_tilde, np.array([1.0, 0.0]))
    assert exp.sigma_tilde == 2.0
    dropped = sp.expand_matrix(x, e, variant=FormulaVariant.U3_OMITTED)
    assert np.array_equal(dropped.u_tilde, np.array([1.0, 0.0, 0.0]))


def test_expand_3x2_defect_residual_is_first_order():
    x = diag_embedded([2.0, 1.0], 3)
    e_dir = np.zeros((3, 2))
    e_dir[2, 0] = 1.0
    eps = 1e-3
    good = sp.residuals_at(x, e_dir, eps)
    bad = sp.residuals_at(x, e_dir, eps, variant=FormulaVariant.U3_OMITTED)
    assert good.res_u <= 1e-9
    assert bad.res_u >= 0.4 * eps


def test_expansion_is_linear_in_perturbation():
    x, e = make_instance(6, 4, 8)
    part = sp.partition_svd(sp.svd(x), 1)
    half = sp.closed_form_coefficients(part, sp.compute_projections(part, 0.5 * e))
    full = sp.closed_form_coefficients(part, sp.compute_projections(part, e))
    # halving E halves every coefficient bitwise (power-of-two scaling)
    assert np.array_equal(full.g2, 2.0 * half.g2)
    assert np.array_equal(full.h2, 2.0 * half.h2)
    assert np.array_equal(full.g3, 2.0 * half.g3)
    assert full.theta1 == 2.0 * half.theta1
    # assembled vectors pick up one rounding against u1/v1, nothing more
    one = sp.expand_triplet(part, 0.5 * e)
    two = sp.expand_triplet(part, e)
    du = (two.u_tilde - part.u1) - 2.0 * (one.u_tilde - part.u1)
    dv = (two.v_tilde - part.v1) - 2.0 * (one.v_tilde - part.v1)
    assert np.all(np.abs(du) <= 1e-15)
    assert np.all(np.abs(dv) <= 1e-15)


def test_square_input_complement_variants_coincide_bitwise():
    x, e = make_instance(5, 5, 21)
    a = sp.expand_matrix(x, 1e-3 * e)
    b = sp.expand_matrix(x, 1e-3 * e, variant=FormulaVariant.U3_OMITTED)
    assert np.array_equal(a.u_tilde, b.u_tilde)
    assert np.array_equal(a.v_tilde, b.v_tilde)
    assert a.sigma_tilde == b.sigma_tilde
    c = sp.expand_matrix(x, 1e-3 * e, variant=FormulaVariant.SIGN_FLIPPED)
    d = sp.expand_matrix(x, 1e-3 * e, variant=FormulaVariant.BOTH_DEFECTS)
    assert np.array_equal(c.u_tilde, d.u_tilde)


def test_corrections_are_orthogonal_to_unperturbed_vectors():
    x, e = make_instance(7, 4, 13)
    part = sp.partition_svd(sp.svd(x), 1)
    exp = sp.expand_triplet(part, 1e-3 * e)
    assert abs((exp.u_tilde - part.u1) @ part.u1) <= 1e-13
    assert abs((exp.v_tilde - part.v1) @ part.v1) <= 1e-13


def test_expand_matrix_wide_input_swaps_roles():
    x, e = make_instance(6, 3, 17)
    tall = sp.expand_matrix(x, 1e-3 * e)
    wide = sp.expand_matrix(x.T, 1e-3 * e.T)
    assert np.array_equal(wide.u_tilde, tall.v_tilde)
    assert np.array_equal(wide.v_tilde, tall.u_tilde)
    assert wide.sigma_tilde == tall.sigma_tilde


def test_expand_zero_perturbation_is_identity():
    x, _ = make_instance(5, 3, 40)
    part = sp.partition_svd(sp.svd(x), 1)
    for variant in FormulaVariant:
        exp = sp.expand_triplet(part, np.zeros((5, 3)), variant)
        assert np.array_equal(exp.u_tilde, part.u1)
        assert np.array_equal(exp.v_tilde, part.v1)
        assert exp.sigma_tilde == part.sigma1


def test_transpose_dual_agrees_on_squares():
    for seed in range(5):
        x, e = make_instance(6, 6, 300 + seed)
        direct = sp.expand_matrix(x, 1e-3 * e)
        dual = sp.transpose_dual_expansion(x, 1e-3 * e)
        u = sp.align_sign(direct.u_tilde, dual.u_tilde)
        v = sp.align_sign(direct.v_tilde, dual.v_tilde)
        assert float(np.linalg.norm(u - direct.u_tilde)) <= 1e-12
        assert float(np.linalg.norm(v - direct.v_tilde)) <= 1e-12
        assert abs(dual.sigma_tilde - direct.sigma_tilde) <= 1e-12


# ------------------------------------------------------------- shape audit

def test_shape_audit_tall_reports_three_findings():
    report = sp.shape_audit_as_printed(5, 3)
    assert report.n == 5 and report.p == 3
    assert len(report.findings) == 3
    items = [f.errata_item for f in report.findings]
    kinds = [f.kind for f in report.findings]
    assert items == [2, 3, 4]
    assert kinds.count("missing-transpose") == 2
    assert kinds.count("omitted-factor") == 1
    # concrete dimensions appear in the explanation strings
    assert "2x2 @ V2 3x2" in report.findings[0].printed_dims
    assert "2 != 3" in report.findings[0].printed_dims


def test_shape_audit_square_drops_complement_finding():
    report = sp.shape_audit_as_printed(3, 3)
    assert len(report.findings) == 2
    assert [f.errata_item for f in report.findings] == [2, 4]
    assert all(f.kind == "missing-transpose" for f in report.findings)


def test_shape_audit_minimal_widths():
    report = sp.shape_audit_as_printed(4, 2)
    assert len(report.findings) == 3
    assert "1x1 @ V2 2x1" in report.findings[0].printed_dims


def test_shape_audit_rejects_bad_dims():
    with pytest.raises(InvalidDims):
        sp.shape_audit_as_printed(2, 3)
    with pytest.raises(InvalidDims):
        sp.shape_audit_as_printed(3, 1)
