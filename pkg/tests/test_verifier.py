import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from burstyx import bounds
from burstyx.matrix_core import sample_channel
from burstyx.model import T, ChannelParams, eta_eval, make_params
from burstyx.schemes import build
from burstyx.verifier import (
    SLOPE_TOL,
    appendixB_property,
    designated_family,
    empirical_marginals,
    entropy_objective,
    entropy_slopes,
    optimize_exponent,
    public_region,
    rank_dof,
    run_suite,
    stated_objective,
    trial_seed,
    witness,
    zf_audit,
)


def wp(M, N, p_d=0.7, p_c=0.5, p_dgc=0.9):
    return make_params(M, N, p_d, p_c, p_dgc)


def test_trial_seed_is_stable_and_distinct():
    assert trial_seed(7, 3) == trial_seed(7, 3)
    assert len({trial_seed(7, i) for i in range(50)}) == 50


def test_rank_dof_type1_r1():
    r = sample_channel(2, 3, 0)
    res = rank_dof(build("type1_r1", r), r)
    assert res.per_receiver[1] == T(1, 2, 0) == res.per_receiver[2]


def test_rank_dof_type2_r2_hkia_private():
    p = wp(3, 2)
    r = sample_channel(3, 2, 5)
    res = rank_dof(build("type2_r2_hkia", r), r, p)
    assert res.total_triple == 2 * T(2, 1, 1)
    assert res.total == pytest.approx(2.4, abs=1e-12)


@pytest.mark.parametrize("fam,M,N", [("type1_r1", 2, 3), ("type1_r2", 3, 5), ("simplified_t1", 2, 5),
                                     ("simplified_t2", 5, 2), ("type2_r2_hkia", 5, 3)])
def test_rank_dof_matches_closed_form(fam, M, N):
    closed = {"type1_r1": lambda: bounds.inbf_triple(M, N, "type1_r1"),
              "type1_r2": lambda: bounds.inbf_triple(M, N, "type1_r2"),
              "simplified_t1": lambda: bounds.inbf_triple(M, N, "simplified"),
              "simplified_t2": lambda: bounds.inbf_triple(M, N, "simplified"),
              "type2_r2_hkia": lambda: 2 * T(min(N, 2 * (M - N)), M - N, M - N)}[fam]()
    for seed in range(20):
        r = sample_channel(M, N, seed)
        assert rank_dof(build(fam, r), r).total_triple == closed


def test_zf_audit_flags_only_type2_r1_state_a():
    r = sample_channel(3, 2, 1)
    res = zf_audit(build("type2_r1", r), r)
    bad = res.discrepancies
    assert bad and all(x.local_state == "cd" and x.status == "WARN" for x in bad)
    assert all(x.joint_rank == x.claimed for x in bad)
    assert not res.failed
    for fam, M, N in (("type1_r1", 2, 3), ("type2_r2_hkia", 3, 2), ("hkia_lb_t1", 5, 6),
                      ("hkia_lb_t2_blend", 6, 5)):
        r = sample_channel(M, N, 2)
        assert not zf_audit(build(fam, r), r).discrepancies, fam


def test_zf_audit_detects_broken_filter():
    r = sample_channel(3, 2, 2)
    s = build("type2_r2_hkia", r)
    # the cross-message precoder no longer lies in the direct link's null space
    st = next(x for x in s.streams if x.message == "C1")
    st.precoder[:] = r.H11.T[:, : st.precoder.shape[1]]
    res = zf_audit(s, r)
    assert res.failed


def test_entropy_slopes_3x2():
    r = sample_channel(3, 2, 1)
    sl = {s.term: s for s in entropy_slopes(build("type2_r2_hkia", r), r)}
    s = sl["h(Y1|S1,U1)"]
    assert s.expected == T(2, 1, 2)
    assert np.allclose(s.measured, (2, 1, 2), atol=SLOPE_TOL)
    assert sl["h(Y1|S1,U1,U2)"].expected == T(2, 1, 1)
    assert all(abs(x.off_slope) < SLOPE_TOL and x.max_error < SLOPE_TOL for x in sl.values())


def test_public_region_worked_point():
    p = wp(3, 2)
    r = sample_channel(3, 2, 1)
    pr = public_region(build("type2_r2_hkia", r), r, p)
    assert pr.max_error < SLOPE_TOL
    assert pr.eta01 == pytest.approx(0.05, abs=0.01)
    assert pr.eta02 == pytest.approx(0.05, abs=0.01)
    assert pr.eta_pub == pytest.approx(0.1, abs=0.01)


@pytest.mark.parametrize("fam,M,N", [("hkia_lb_t2_blend", 6, 5), ("hkia_lb_t2_blend", 7, 6),
                                     ("hkia_lb_t1", 5, 6), ("hkia_lb_t1", 6, 7)])
def test_public_region_integer_exponents(fam, M, N):
    r = sample_channel(M, N, 4)
    for a in (0.0, 1.0):
        assert public_region(build(fam, r, a=a), r).max_error < SLOPE_TOL


def test_optimizer_spot_values():
    p = wp(6, 5, 0.7, 0.6, 0.9)
    res = optimize_exponent(p, "hkia_lb_t2_blend")
    assert res.a_star == pytest.approx(0.8592, abs=2e-3)
    assert res.b_star == 1.0
    q = wp(5, 6, 0.7, 0.6, 0.9)
    assert optimize_exponent(q, "hkia_lb_t1").a_star == pytest.approx(0.9432, abs=2e-3)


def test_optimizer_first_branch_full_power():
    p = wp(5, 6, 0.7, 0.45, 0.9)
    assert optimize_exponent(p, "hkia_lb_t1").a_star == 1.0


def test_optimizer_rejects_coarse_grid():
    with pytest.raises(ValueError):
        optimize_exponent(wp(6, 5, 0.7, 0.6, 0.9), "hkia_lb_t2_blend", grid_step=0.1)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([("hkia_lb_t1", 6, 7), ("hkia_lb_t1", 7, 9), ("hkia_lb_t1", 8, 9),
                        ("hkia_lb_t2_blend", 6, 5), ("hkia_lb_t2_blend", 8, 6), ("hkia_lb_t2_blend", 9, 8)]),
       st.floats(0.05, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_objective_two_ways(case, p_d, u, x, a, b):
    fam, M, N = case
    p_c = u * p_d
    if 1 - p_d - p_c + p_c * x < 0:
        return
    p = make_params(M, N, p_d, p_c, x)
    if fam == "hkia_lb_t1":
        b = 1.0
    assert stated_objective(p, fam, a, b) == pytest.approx(entropy_objective(p, fam, a, b), abs=1e-9)


def test_cross_filter_full_rank():
    assert appendixB_property(3, 2, 50, 0) == 1.0
    assert appendixB_property(5, 3, 50, 0) == 1.0
    assert appendixB_property(3, 2, 10, 0, degenerate=True) < 1.0


def test_marginals():
    chk = empirical_marginals(wp(3, 2), 100_000, 3)
    assert chk.max_deviation <= chk.bound
    assert set(chk.cells) == {f"rx{r}:{a}{b}" for r in (1, 2) for a in (0, 1) for b in (0, 1)}
    # no cross links: those cells are exactly zero
    chk = empirical_marginals(ChannelParams(2, 2, 0.6, 0.0, 0.0), 10_000, 1)
    assert chk.cells["rx1:11"]["empirical"] == 0.0 and chk.cells["rx2:01"]["empirical"] == 0.0


def test_witness_closes_worked_point():
    p = wp(3, 2)
    fam = designated_family(p)
    assert fam == "type2_r2_hkia"
    w = witness(fam, 3, 2, 0)
    assert w.total(p) == pytest.approx(bounds.eta_ub(p), abs=0.03)
    assert designated_family(wp(3, 3)) is None


def test_run_suite_shape_and_determinism():
    a = run_suite("entropy", seed=4, M=3, N=2, family="type2_r2_hkia")
    b = run_suite("entropy", seed=4, M=3, N=2, family="type2_r2_hkia")
    assert a == b and a["passed"] and a["counts"]["FAIL"] == 0
    with pytest.raises(ValueError):
        run_suite("nope")
