import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from burstyx.bounds import DomainError
from burstyx.matrix_core import dof_slope, gaussian_entropy, numeric_rank, sample_channel
from burstyx.schemes import (
    FAMILIES,
    build,
    check_conditions,
    effective_channels,
    received_covariance,
)

def legal_pairs(fam, cap=9):
    out = []
    for M in range(1, cap + 1):
        for N in range(1, cap + 1):
            try:
                build(fam, sample_channel(M, N, 0))
            except DomainError:
                continue
            out.append((M, N))
    return out


def test_type2_r2_hkia_filters_null_cross_links():
    r = sample_channel(3, 2, 1)
    f = build("type2_r2_hkia", r).filters
    for name in ("psi1", "phi1", "psi2", "phi2"):
        assert f[name].shape == (3, 1)
    for X in (r.H21 @ f["psi1"], r.H11 @ f["phi1"], r.H22 @ f["phi2"], r.H12 @ f["psi2"]):
        assert np.abs(X).max() < 1e-10 * r.norm


def test_type1_r1_filters():
    for seed in range(100):
        r = sample_channel(2, 3, seed)
        f = build("type1_r1", r).filters
        assert f["psi1"].shape == (3, 1)
        assert np.array_equal(f["psi1_tilde"], r.H12[:, :1])
        assert numeric_rank(np.hstack([f["psi1"], f["psi1_tilde"]])) == 2
        assert np.abs(f["psi1"].T @ r.H12).max() < 1e-10 * r.norm


def test_blend_block_split():
    r = sample_channel(6, 5, 3)
    s = build("hkia_lb_t2_blend", r)
    assert (s.extra["exact_dims"], s.extra["partial_dims"]) == (1, 1)
    assert s.extra["nulled_rows"] == 4
    f = s.filters
    assert np.abs(r.H21 @ f["psi1e"]).max() < 1e-10 * r.norm
    assert np.abs(r.H21[:4] @ f["psi1p"]).max() < 1e-10 * r.norm
    assert np.abs(r.H21[4:] @ f["psi1p"]).max() > 1e-3


def test_type2_r1_cross_filter_product_full_rank():
    for seed in range(100):
        r = sample_channel(3, 2, seed)
        f = build("type2_r1", r).filters
        X = f["theta1"].T @ r.H12 @ f["phi2"]
        s = np.linalg.svd(X, compute_uv=False)
        assert s[-1] > 1e-8 * s[0]
        W = np.hstack([f["psi1"], f["psi1_tilde"]])
        assert numeric_rank(f["theta1"].T @ r.H11 @ W) == 1


@pytest.mark.parametrize("fam", FAMILIES)
def test_all_conditions_hold(fam):
    for M, N in legal_pairs(fam, 7):
        for seed in range(5):
            r = sample_channel(M, N, seed)
            bad = [c.name for c in check_conditions(build(fam, r), r) if not c.passed]
            assert not bad, (fam, M, N, seed, bad)


def test_corrupted_filter_is_reported():
    r = sample_channel(3, 2, 2)
    s = build("type2_r2_hkia", r)
    s.filters["psi1"][:] = np.ones_like(s.filters["psi1"])
    assert any(not c.passed for c in check_conditions(s, r))


@pytest.mark.parametrize("fam,M,N", [("type1_r1", 3, 2), ("type2_r1", 2, 3), ("type2_r2_hkia", 4, 2),
                                     ("simplified_t1", 2, 3), ("hkia_lb_t1", 2, 4), ("bogus", 2, 2)])
def test_illegal_dims(fam, M, N):
    with pytest.raises(ValueError):
        build(fam, sample_channel(M, N, 0))


def test_exponents_validated():
    with pytest.raises(ValueError):
        build("type2_r2_hkia", sample_channel(3, 2, 0), a=1.5)


def test_construction_deterministic():
    r = sample_channel(6, 5, 9)
    a = build("hkia_lb_t2_blend", r, a=0.5, b=1).to_dict()
    b = build("hkia_lb_t2_blend", sample_channel(6, 5, 9), a=0.5, b=1).to_dict()
    assert a == b


def test_state_masks_in_effective_channels():
    r = sample_channel(3, 2, 4)
    s = build("type2_r2_hkia", r)
    assert all(np.all(e.matrix == 0) for e in effective_channels(s, r, "E"))
    tags = {(e.rx, e.message): e.tag for e in effective_channels(s, r, "A")}
    assert tags[(1, "D1")] == tags[(1, "C2")] == "desired"
    assert tags[(1, "D2")] == tags[(1, "C1")] == "interference"
    assert tags[(2, "U1")] == "public"
    # state C: Rx1 hears only its direct link, Rx2 only its cross link
    eff = {(e.rx, e.stream): e.matrix for e in effective_channels(s, r, "C", filtered=False)}
    assert np.all(eff[(1, "D2")] == 0) and np.any(eff[(1, "D1")] != 0)
    assert np.all(eff[(2, "D2")] == 0) and np.any(eff[(2, "C1")] != 0)


def test_received_covariance_edges():
    r = sample_channel(3, 2, 4)
    s = build("type2_r2_hkia", r)
    assert np.array_equal(received_covariance(s, r, "E", 1e6), np.eye(2))
    allst = [st.name for st in s.streams]
    assert np.allclose(received_covariance(s, r, "A", 1e6, allst), np.eye(2))
    with pytest.raises(ValueError):
        received_covariance(s, r, "A", 1e6, ["X9"])


def test_conditioned_entropy_slope_worked():
    r = sample_channel(3, 2, 1)
    s = build("type2_r2_hkia", r)
    vals = [(P, gaussian_entropy(received_covariance(s, r, "A", P, ["U1"], 1))) for P in (1e6, 1e8, 1e10)]
    assert dof_slope(vals).slope == pytest.approx(2, abs=0.02)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(FAMILIES), st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**31),
       st.floats(0, 1), st.floats(0, 1))
def test_power_constraint(fam, M, N, seed, a, b):
    r = sample_channel(M, N, seed)
    try:
        s = build(fam, r, a=a, b=b)
    except DomainError:
        return
    for P in (1.0, 1e4):
        for tx in (1, 2):
            assert s.tx_power(tx, P) <= P * (1 + 1e-9)
