"""Closed-form sum-DoF bounds and scheme-specific achievable DoF.

All quantities are written as eta-triples where possible so that results can
be checked both symbolically (coefficients) and numerically (evaluation).
Every function expects canonical parameters (p_c <= p_d) except
:func:`report`, which canonicalizes on its own.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .model import (
    EPS,
    ChannelParams,
    Classification,
    EtaTriple,
    T,
    _require_canonical,
    canonicalize,
    classify,
    eta_eval,
    is_regime1,
)


class DomainError(ValueError):
    """Raised when a formula is requested outside the region where it applies."""


INBF_FAMILIES = (
    "type1_r1",
    "type1_r2",
    "type2_r1",
    "type2_r2_inbf",
    "simplified",
    "no_crosslink_baseline",
    "nonbursty_ia_baseline",
)


@dataclass(frozen=True)
class Tightness:
    tight: bool
    reason: str


@dataclass(frozen=True)
class Prop1Result:
    eta_priv: float
    eta_pub: float
    eta_total: float
    case: str
    priv_triple: EtaTriple
    pub_triple: EtaTriple


@dataclass(frozen=True)
class Prop2Result:
    a_opt: Optional[float]
    b_opt: float
    eta_total: float
    k: int
    q: int
    beta2: float
    A: int
    branch: int


@dataclass(frozen=True)
class Prop3Result:
    a_opt: float
    eta_total: float
    k: int
    q: int
    beta1: float
    branch: int


@dataclass(frozen=True)
class DofReport:
    params: ChannelParams
    eta_ub: float
    eta_lb: float
    tight: bool
    reason: str
    classification: Classification
    alpha: Optional[float]
    per_scheme: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return self.eta_ub - self.eta_lb

    def to_dict(self) -> dict:
        p = self.params
        return {
            "M": p.M,
            "N": p.N,
            "p_d": p.p_d,
            "p_c": p.p_c,
            "p_cd": p.p_cd,
            "p_d_given_c": p.p_dgc,
            "type": self.classification.channel_type,
            "regime": self.classification.regime,
            "eta_ub": self.eta_ub,
            "eta_lb": self.eta_lb,
            "gap": self.gap,
            "tight": self.tight,
            "reason": self.reason,
            "alpha": self.alpha,
            "per_scheme": dict(sorted(self.per_scheme.items())),
        }


def _ev(t: EtaTriple, params: ChannelParams) -> float:
    return eta_eval(t, params)


# ---------------------------------------------------------------- upper bound

def eta_ub(params: ChannelParams) -> float:
    """Sum-DoF upper bound, piecewise linear in the probabilities."""
    _require_canonical(params)
    M, N = params.M, params.N
    p_d, p_c, p_cd = params.p_d, params.p_c, params.p_cd
    m2n, mn2, mn = min(2 * M, N), min(M, 2 * N), min(M, N)
    if is_regime1(params):
        return 2 * (p_cd * m2n + p_c * mn2 + (p_d - p_c - 2 * p_cd) * mn)
    return 2 * ((p_d - p_c) * m2n + (p_d - p_cd) * mn2 + (p_cd - 2 * p_d + 2 * p_c) * mn)


def ub_triple(M: int, N: int, regime: int) -> EtaTriple:
    """Upper bound as a triple, for either antenna type and regime."""
    if regime not in (1, 2):
        raise ValueError("regime must be 1 or 2")
    if M <= N:
        if 2 * M <= N:
            t = T(M, M, 0)
        elif regime == 1:
            t = T(N - M, M, 0)
        else:
            t = T(M, N - M, 2 * M - N)
    else:
        if 2 * N <= M:
            t = T(N, N, N)
        elif regime == 1:
            t = T(M - N, N, M - N)
        else:
            t = T(N, M - N, N)
    return 2 * t


def alpha(M: int, N: int) -> Optional[float]:
    """(3N-2M)/(2N-M); None when 2N = M."""
    return None if 2 * N == M else (3 * N - 2 * M) / (2 * N - M)


# ----------------------------------------------------------------- tightness

def in_region_i(params: ChannelParams) -> bool:
    """Type I with 2/3 < M/N <= 1 in Regime 2."""
    M, N = params.M, params.N
    return M <= N and 3 * M > 2 * N and not is_regime1(params)


def in_region_ii(params: ChannelParams) -> bool:
    """Type II with 2/3 < N/M <= 1 and p_c/p_d > 1/(1 + alpha p_{d|c})."""
    M, N = params.M, params.N
    if not (N <= M and 3 * N > 2 * M):
        return False
    # p_c + alpha p_cd > p_d, multiplied through by 2N - M > 0
    lhs = (3 * N - 2 * M) * params.p_cd - (2 * N - M) * (params.p_d - params.p_c)
    return lhs > EPS * (2 * N - M)


def tightness(params: ChannelParams) -> Tightness:
    _require_canonical(params)
    reasons = []
    if in_region_i(params):
        reasons.append("(i) 2/3 < M/N <= 1 and p_c/p_d > 1/(1+p_d|c)")
    if in_region_ii(params):
        reasons.append("(ii) 2/3 < N/M <= 1 and p_c/p_d > 1/(1+alpha*p_d|c)")
    if reasons:
        return Tightness(False, "; ".join(reasons))
    return Tightness(True, "upper bound achieved")


# -------------------------------------------------------------- lower bounds

def _lb1_terms(M: int, N: int):
    k, q = divmod(N, 3)
    return k, q, (2 * M - 4 * k - q) / (2 * k + q)


def _lb2_terms(M: int, N: int):
    k, q = divmod(M, 3)
    return k, q, q / (k + q)


def _prop3_first_branch(params: ChannelParams, k: int, q: int) -> bool:
    # p_c/p_d <= 1/(1 + beta1 p_{d|c}) with beta1 = (2M-4k-q)/(2k+q)
    M = params.M
    lhs = (2 * M - 4 * k - q) * params.p_cd - (2 * k + q) * (params.p_d - params.p_c)
    return lhs <= EPS * (2 * k + q)


def _prop2_first_branch(params: ChannelParams, k: int, q: int) -> bool:
    # p_c/p_d <= 1/(1 + beta2 p_{d|c}) with beta2 = q/(k+q)
    lhs = q * params.p_cd - (k + q) * (params.p_d - params.p_c)
    return lhs <= EPS * (k + q)


def prop3(params: ChannelParams) -> Prop3Result:
    """Optimal exponent and DoF of the Type I HKIA scheme with partial power on private streams."""
    _require_canonical(params)
    M, N = params.M, params.N
    if not in_region_i(params):
        raise DomainError("prop3 needs Type I, 2/3 < M/N <= 1 and Regime 2")
    k, q, beta1 = _lb1_terms(M, N)
    if _prop3_first_branch(params, k, q):
        total = _ev(T(4 * k + q, 2 * k + q, 2 * M - 2 * k - q), params)
        return Prop3Result(1.0, total, k, q, beta1, 1)
    ch, fl = (q + 1) // 2, q // 2
    num = _ev(T(2 * M - N, -M, M), params)
    den = _ev(T(2 * M - N, -2 * k - ch, 2 * k + ch), params)
    if den <= EPS:
        raise DomainError("degenerate parameter point: exponent denominator vanishes")
    a = num / den
    total = _ev(T(N, M, M), params) + a * _ev(T(k, fl, -fl), params)
    return Prop3Result(a, total, k, q, beta1, 2)


def prop2(params: ChannelParams) -> Prop2Result:
    """Optimal exponents and DoF of the Type II blended HKIA scheme."""
    _require_canonical(params)
    M, N = params.M, params.N
    if not in_region_ii(params):
        raise DomainError("prop2 needs Type II, 2/3 < N/M <= 1 and p_c/p_d > 1/(1+alpha p_d|c)")
    k, q, beta2 = _lb2_terms(M, N)
    A = k - (M - N)
    if A == 0:
        # no partial-null block: the objective no longer depends on a
        total = min(_ev(2 * T(N, M - N, N), params), _ev(T(2 * M - N, M, M), params))
        return Prop2Result(None, 1.0, total, k, q, beta2, A, 0)
    if _prop2_first_branch(params, k, q):
        r = _ev(T(1, -1, 1), params) / _ev(T(3, -2, 2), params)
        total = M * (_ev(T(1, 1, 1), params) + params.p_cd * r)
        a = _ev(T(3 * N - 2 * M, M - 2 * N, 2 * N - M), params) / (A * _ev(T(3, -2, 2), params))
        return Prop2Result(min(max(a, 0.0), 1.0), 1.0, total, k, q, beta2, A, 1)
    total = _ev(M * T(1, 1, 1) + k * T(1, 0, 0), params)
    return Prop2Result(1.0, 1.0, total, k, q, beta2, A, 2)


def eta_lb1(params: ChannelParams) -> float:
    """Lower bound in exception region (i) (Type I)."""
    M, N = params.M, params.N
    k, q, _ = _lb1_terms(M, N)
    if _prop3_first_branch(params, k, q):
        return _ev(T(4 * k + q, 2 * k + q, 2 * M - 2 * k - q), params)
    ch, fl = (q + 1) // 2, q // 2
    ratio = _ev(T(2 * M - N, -M, M), params) / _ev(T(2 * M - N, -2 * k - ch, 2 * k + ch), params)
    return _ev(T(N, M, M), params) + _ev(T(k, fl, -fl), params) * ratio


def eta_lb2(params: ChannelParams) -> float:
    """Lower bound in exception region (ii) (Type II)."""
    M = params.M
    k, q, _ = _lb2_terms(M, params.N)
    if _prop2_first_branch(params, k, q):
        return M * (_ev(T(1, 1, 1), params)
                    + params.p_cd * _ev(T(1, -1, 1), params) / _ev(T(3, -2, 2), params))
    return _ev(M * T(1, 1, 1) + k * T(1, 0, 0), params)


def eta_lb(params: ChannelParams) -> float:
    """Best known achievable sum DoF: the upper bound where tight, else the HKIA bounds."""
    _require_canonical(params)
    cands = []
    if in_region_i(params):
        cands.append(eta_lb1(params))
    if in_region_ii(params):
        cands.append(eta_lb2(params))
    if not cands:
        return eta_ub(params)
    return max(cands)


# ---------------------------------------------------------- scheme formulas

def prop1_dof(params: ChannelParams) -> Optional[Prop1Result]:
    """Private/public split of the Type II HKIA scheme.

    Returns None when 2/3 < N/M and the probability condition of the second
    case fails.
    """
    _require_canonical(params)
    M, N = params.M, params.N
    if not (N <= M and 2 * N > M):
        raise DomainError("prop1 needs Type II with 1/2 < N/M <= 1")
    if 3 * N <= 2 * M:
        priv, pub, case = 2 * T(N, M - N, M - N), 2 * T(0, 0, 2 * N - M), "i"
    else:
        if in_region_ii(params):
            return None
        priv, pub, case = 2 * (M - N) * T(2, 1, 1), 2 * T(3 * N - 2 * M, 0, 2 * N - M), "ii"
    vp, vq = _ev(priv, params), _ev(pub, params)
    return Prop1Result(vp, vq, vp + vq, case, priv, pub)


def _ia_split(M: int, N: int) -> tuple[int, int, int, int]:
    """Stream split [d_D1, d_C1, d_C2, d_D2] of the single-shot INBF scheme for 2/3 < ratio <= 1."""
    k, q = divmod(max(M, N), 3)
    return {0: (k, k, k, k), 1: (k, k, k, k + 1), 2: (k + 1, k, k, k + 1)}[q]


def split_triple(dims: tuple[int, int, int, int]) -> EtaTriple:
    """Sum over both receivers of the triples delivered by a stream split."""
    dD1, dC1, dC2, dD2 = dims
    return T(dD1 + dC1 + dC2 + dD2, dD1 + dD2, dC1 + dC2)


def inbf_triple(M: int, N: int, family: str) -> EtaTriple:
    """Total (both receivers) triple claimed by an interference-nulling family."""
    if family not in INBF_FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    bad = DomainError(f"{family} does not apply to M={M}, N={N}")
    if family == "no_crosslink_baseline":
        return 2 * T(min(M, N), min(M, N), 0)
    if family == "simplified":
        if 2 * M <= N:
            return 2 * T(M, M, 0)
        if 2 * N <= M:
            return 2 * T(N, N, N)
        raise bad
    if family == "type1_r1":
        if M <= N < 2 * M:
            return 2 * T(N - M, M, 0)
        raise bad
    if family == "type1_r2":
        if N < 2 * M and 3 * M <= 2 * N:
            return 2 * T(M, N - M, 2 * M - N)
        raise bad
    if family == "type2_r1":
        if N <= M < 2 * N:
            return 2 * T(M - N, N, M - N)
        raise bad
    if family == "type2_r2_inbf":
        if N <= M < 2 * N:
            return 2 * T(min(N, 2 * (M - N)), M - N, M - N)
        raise bad
    # nonbursty_ia_baseline: the interference-nulling design for the always-on channel
    if M <= N:
        if 2 * M <= N:
            return 2 * T(M, M, 0)
        if 3 * M <= 2 * N:
            return 2 * T(M, N - M, 2 * M - N)
    else:
        if 2 * N <= M:
            return 2 * T(N, N, N)
        if 3 * N <= 2 * M:
            return 2 * T(N, M - N, M - N)
    return split_triple(_ia_split(M, N))


def inbf_dof(params: ChannelParams, family: str) -> float:
    return _ev(inbf_triple(params.M, params.N, family), params)


def hkia_dof(params: ChannelParams) -> Optional[float]:
    """Best HKIA-family DoF at a point, or None when no HKIA scheme applies."""
    _require_canonical(params)
    M, N = params.M, params.N
    vals = []
    if N <= M < 2 * N:
        if in_region_ii(params):
            vals.append(prop2(params).eta_total)
        else:
            vals.append(prop1_dof(params).eta_total)
    if in_region_i(params):
        vals.append(prop3(params).eta_total)
    return max(vals) if vals else None


def report(params: ChannelParams) -> DofReport:
    p = canonicalize(params)
    cls = classify(p)
    tt = tightness(p)
    ub, lb = eta_ub(p), eta_lb(p)
    per = {}
    for fam in INBF_FAMILIES:
        if fam == "no_crosslink_baseline":
            # a different channel (cross links removed), kept out of the achievable map
            continue
        try:
            per[fam] = inbf_dof(p, fam)
        except DomainError:
            pass
    per["ia"] = per["nonbursty_ia_baseline"]
    hk = hkia_dof(p)
    if hk is not None:
        per["hkia"] = hk
    return DofReport(p, ub, lb, tt.tight, tt.reason, cls, alpha(p.M, p.N), per)

