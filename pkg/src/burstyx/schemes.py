"""Explicit beamforming constructions for the bursty X channel.

Each family is built from a channel realization as a set of transmit
streams (precoder, per-dimension variance ``coef * P**exponent``) and
per-state receive filters.  Messages are named after their route:
``D1`` (Tx1 -> Rx1), ``C1`` (Tx1 -> Rx2), ``C2`` (Tx2 -> Rx1),
``D2`` (Tx2 -> Rx2) and the public streams ``U1``, ``U2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .bounds import DomainError, _ia_split
from .matrix_core import (
    ChannelRealization,
    complement_in,
    null_basis,
)
from .model import STATE_MASKS, ChannelParams, local_state

FAMILIES = (
    "type1_r1",
    "type1_r2",
    "type2_r1",
    "type2_r2_hkia",
    "simplified_t1",
    "simplified_t2",
    "hkia_lb_t1",
    "hkia_lb_t2_blend",
)
HKIA_FAMILIES = ("type2_r2_hkia", "hkia_lb_t1", "hkia_lb_t2_blend")

INTENDED = {"D1": 1, "C2": 1, "D2": 2, "C1": 2}
LOCAL_STATES = ("cd", "cbd", "cdb")
# A contracted state that realizes each receiver-local state.
REP_STATE = {
    (1, "cd"): "A", (1, "cbd"): "B", (1, "cdb"): "D",
    (2, "cd"): "A", (2, "cbd"): "B", (2, "cdb"): "C",
}

NULL_TOL = 1e-10
RANK_TOL = 1e-8


@dataclass(frozen=True)
class Stream:
    name: str
    message: str
    tx: int
    precoder: np.ndarray  # M x d
    coef: float
    exponent: float

    @property
    def dim(self) -> int:
        return self.precoder.shape[1]

    @property
    def public(self) -> bool:
        return self.message.startswith("U")

    def variance(self, P: float) -> float:
        return self.coef * P ** self.exponent

    def power(self, P: float) -> float:
        return self.variance(P) * float(np.sum(self.precoder ** 2))


@dataclass(frozen=True)
class SchemeSpec:
    """A constructed scheme.

    ``rx_filters`` maps (receiver, local state) to an N x r receive filter
    (None means the raw observation is used).  ``decoded`` and ``claims``
    record which private messages the construction decodes in each
    receiver-local state and how many dimensions it claims for them.
    """

    family: str
    M: int
    N: int
    a: float
    b: float
    dims: tuple
    streams: tuple
    filters: dict
    rx_filters: dict
    decoded: dict
    claims: dict
    public_power_fraction: float = 0.0
    extra: dict = field(default_factory=dict)

    def stream(self, name: str) -> Stream:
        for s in self.streams:
            if s.name == name:
                return s
        raise KeyError(name)

    def tx_power(self, tx: int, P: float) -> float:
        return sum(s.power(P) for s in self.streams if s.tx == tx)

    def to_dict(self) -> dict:
        def mat(x):
            return np.asarray(x).tolist()

        return {
            "family": self.family,
            "M": self.M,
            "N": self.N,
            "dims": list(self.dims),
            "exponents": {"a": self.a, "b": self.b},
            "public_power_fraction": self.public_power_fraction,
            "extra": self.extra,
            "filters": {k: mat(v) for k, v in sorted(self.filters.items())},
            "streams": [
                {"name": s.name, "message": s.message, "tx": s.tx, "coef": s.coef,
                 "exponent": s.exponent, "precoder": mat(s.precoder)}
                for s in self.streams
            ],
        }


@dataclass(frozen=True)
class EffectiveChannel:
    rx: int
    stream: str
    message: str
    matrix: np.ndarray
    tag: str  # "desired", "interference" or "public"


@dataclass(frozen=True)
class Condition:
    name: str
    kind: str  # "null" or "rank"
    value: float
    passed: bool


# ------------------------------------------------------------------ helpers

def _left(H: np.ndarray, d: Optional[int] = None) -> np.ndarray:
    B = null_basis(H, "left")
    return _take(B, d)


def _right(H: np.ndarray, d: Optional[int] = None) -> np.ndarray:
    B = null_basis(H, "right")
    return _take(B, d)


def _take(B: np.ndarray, d: Optional[int]) -> np.ndarray:
    if d is None:
        return B
    if B.shape[1] < d:
        raise DomainError(f"null space has {B.shape[1]} dimensions, {d} required")
    return B[:, :d]


def _unit(F: np.ndarray) -> np.ndarray:
    """Scale a precoder so that its squared Frobenius norm equals its column count."""
    if F.shape[1] == 0:
        return F
    return F * np.sqrt(F.shape[1] / np.sum(F ** 2))


def _streams(items: Iterable[tuple]) -> tuple:
    """Build streams from (name, message, tx, precoder, total_share, exponent), skipping empty ones.

    ``total_share`` is the fraction of P**exponent the stream carries.
    """
    out = []
    for name, msg, tx, F, share, e in items:
        if F.shape[1] == 0:
            continue
        F = _unit(F)
        out.append(Stream(name, msg, tx, F, share / F.shape[1], e))
    return tuple(out)


def _uniform(d1: dict, d2: dict) -> dict:
    out = {}
    for ls in LOCAL_STATES + ("off",):
        out[(1, ls)] = d1.get(ls)
        out[(2, ls)] = d2.get(ls)
    return out


def _decode_default() -> dict:
    return {
        (1, "cd"): frozenset({"D1", "C2"}), (1, "cbd"): frozenset({"D1"}), (1, "cdb"): frozenset({"C2"}),
        (2, "cd"): frozenset({"D2", "C1"}), (2, "cbd"): frozenset({"D2"}), (2, "cdb"): frozenset({"C1"}),
    }


def _claims(r1: tuple, r2: tuple) -> dict:
    out = {}
    for ls, v1, v2 in zip(LOCAL_STATES, r1, r2):
        out[(1, ls)] = int(v1)
        out[(2, ls)] = int(v2)
    return out


def _check_dims(family: str, M: int, N: int) -> None:
    ok = {
        "simplified_t1": 2 * M <= N,
        "simplified_t2": 2 * N <= M,
        "type1_r1": M <= N < 2 * M,
        "type1_r2": N < 2 * M and 3 * M <= 2 * N,
        "type2_r1": N <= M < 2 * N,
        "type2_r2_hkia": N <= M < 2 * N,
        "hkia_lb_t1": M <= N and 3 * M > 2 * N,
        "hkia_lb_t2_blend": N <= M and 3 * N > 2 * M,
    }
    if family not in ok:
        raise ValueError(f"unknown family {family!r}")
    if not ok[family]:
        raise DomainError(f"{family} does not apply to M={M}, N={N}")


# ------------------------------------------------------------ constructions

def _simplified_t1(r: ChannelRealization, M, N, a, b):
    psi1, psi2 = _left(r.H12, M), _left(r.H21, M)
    I = np.eye(M)
    streams = _streams([("D1", "D1", 1, I, 1.0, 1.0), ("D2", "D2", 2, I, 1.0, 1.0)])
    f1 = {ls: psi1 for ls in LOCAL_STATES + ("off",)}
    f2 = {ls: psi2 for ls in LOCAL_STATES + ("off",)}
    dec = _decode_default()
    dec[(1, "cd")], dec[(2, "cd")] = frozenset({"D1"}), frozenset({"D2"})
    return dict(dims=(M, 0, 0, M), streams=streams, filters={"psi1": psi1, "psi2": psi2},
                rx_filters=_uniform(f1, f2), decoded=dec, claims=_claims((M, M, 0), (M, M, 0)))


def _type1_r1(r, M, N, a, b):
    psi1, psi2 = _left(r.H12, N - M), _left(r.H21, N - M)
    psi1t, psi2t = r.H12[:, : 2 * M - N].copy(), r.H21[:, : 2 * M - N].copy()
    W1, W2 = np.hstack([psi1, psi1t]), np.hstack([psi2, psi2t])
    I = np.eye(M)
    streams = _streams([("D1", "D1", 1, I, 1.0, 1.0), ("D2", "D2", 2, I, 1.0, 1.0)])
    # the psi-tilde outputs are dropped whenever the cross link is on
    f1 = {"cd": psi1, "cbd": W1, "cdb": W1, "off": W1}
    f2 = {"cd": psi2, "cbd": W2, "cdb": W2, "off": W2}
    dec = _decode_default()
    dec[(1, "cd")], dec[(2, "cd")] = frozenset({"D1"}), frozenset({"D2"})
    claims = _claims((N - M, M, 0), (N - M, M, 0))
    return dict(dims=(M, 0, 0, M), streams=streams,
                filters={"psi1": psi1, "psi1_tilde": psi1t, "psi2": psi2, "psi2_tilde": psi2t},
                rx_filters=_uniform(f1, f2), decoded=dec, claims=claims)


def _type1_r2(r, M, N, a, b):
    d, c = N - M, 2 * M - N
    psi1, psi2 = _left(r.H12, d), _left(r.H21, d)
    phi1, phi2 = _left(r.H11, c), _left(r.H22, c)
    G1 = np.vstack([psi1.T @ r.H11, phi2.T @ r.H21])
    G2 = np.vstack([psi2.T @ r.H22, phi1.T @ r.H12])
    G1inv, G2inv = np.linalg.inv(G1), np.linalg.inv(G2)
    streams = _streams([
        ("D1", "D1", 1, G1inv[:, :d], 0.5, 1.0), ("C1", "C1", 1, G1inv[:, d:], 0.5, 1.0),
        ("D2", "D2", 2, G2inv[:, :d], 0.5, 1.0), ("C2", "C2", 2, G2inv[:, d:], 0.5, 1.0),
    ])
    W1, W2 = np.hstack([psi1, phi1]), np.hstack([psi2, phi2])
    f1 = {ls: W1 for ls in LOCAL_STATES + ("off",)}
    f2 = {ls: W2 for ls in LOCAL_STATES + ("off",)}
    claims = _claims((M, d, c), (M, d, c))
    return dict(dims=(d, c, c, d), streams=streams,
                filters={"psi1": psi1, "psi2": psi2, "phi1": phi1, "phi2": phi2,
                         "G1": G1, "G2": G2, "G1_inv": G1inv, "G2_inv": G2inv},
                rx_filters=_uniform(f1, f2), decoded=_decode_default(), claims=claims)


def _type2_r1(r, M, N, a, b):
    e = M - N
    psi1, psi2 = _right(r.H21, e), _right(r.H12, e)
    psi1t, psi2t = r.H21.T[:, : 2 * N - M].copy(), r.H12.T[:, : 2 * N - M].copy()
    phi1, phi2 = _right(r.H11, e), _right(r.H22, e)
    # theta_i removes the psi-tilde interference of the other transmitter,
    # which leaves exactly M - N receive dimensions
    theta1 = _left(r.H12 @ psi2t, e)
    theta2 = _left(r.H21 @ psi1t, e)
    share = 0.5 if e > 0 else 1.0
    streams = _streams([
        ("D1", "D1", 1, np.hstack([psi1, psi1t]), share, 1.0), ("C1", "C1", 1, phi1, 0.5, 1.0),
        ("D2", "D2", 2, np.hstack([psi2, psi2t]), share, 1.0), ("C2", "C2", 2, phi2, 0.5, 1.0),
    ])
    f1 = {"cd": theta1, "cbd": None, "cdb": theta1, "off": None}
    f2 = {"cd": theta2, "cbd": None, "cdb": theta2, "off": None}
    dec = _decode_default()
    # stated accounting: only the direct message is decoded when all links are on
    dec[(1, "cd")], dec[(2, "cd")] = frozenset({"D1"}), frozenset({"D2"})
    claims = _claims((e, N, e), (e, N, e))
    return dict(dims=(N, e, e, N), streams=streams,
                filters={"psi1": psi1, "psi1_tilde": psi1t, "psi2": psi2, "psi2_tilde": psi2t,
                         "phi1": phi1, "phi2": phi2, "theta1": theta1, "theta2": theta2},
                rx_filters=_uniform(f1, f2), decoded=dec, claims=claims)


def _simplified_t2(r, M, N, a, b):
    psi1, psi2 = _right(r.H21, N), _right(r.H12, N)
    phi1, phi2 = _right(r.H11, N), _right(r.H22, N)
    streams = _streams([
        ("D1", "D1", 1, psi1, 0.5, 1.0), ("C1", "C1", 1, phi1, 0.5, 1.0),
        ("D2", "D2", 2, psi2, 0.5, 1.0), ("C2", "C2", 2, phi2, 0.5, 1.0),
    ])
    return dict(dims=(N, N, N, N), streams=streams,
                filters={"psi1": psi1, "psi2": psi2, "phi1": phi1, "phi2": phi2},
                rx_filters=_uniform({}, {}), decoded=_decode_default(),
                claims=_claims((N, N, N), (N, N, N)))


def _type2_r2_hkia(r, M, N, a, b):
    e = M - N
    psi1, psi2 = _right(r.H21, e), _right(r.H12, e)
    phi1, phi2 = _right(r.H11, e), _right(r.H22, e)
    I = np.eye(M)
    streams = _streams([
        ("U1", "U1", 1, I, 0.5, 1.0), ("D1", "D1", 1, psi1, 0.25, 1.0), ("C1", "C1", 1, phi1, 0.25, 1.0),
        ("U2", "U2", 2, I, 0.5, 1.0), ("D2", "D2", 2, psi2, 0.25, 1.0), ("C2", "C2", 2, phi2, 0.25, 1.0),
    ])
    cd = min(N, 2 * e)
    return dict(dims=(e, e, e, e), streams=streams,
                filters={"psi1": psi1, "psi2": psi2, "phi1": phi1, "phi2": phi2},
                rx_filters=_uniform({}, {}), decoded=_decode_default(),
                claims=_claims((cd, e, e), (cd, e, e)), public_power_fraction=0.5)


def _hkia_lb_t2_blend(r, M, N, a, b):
    k, q = divmod(M, 3)
    e, A = M - N, k - (M - N)
    rows = M - k  # partial nulling acts on the first M - k receive coordinates
    psi1e, psi2e = _right(r.H21, e), _right(r.H12, e)
    phi1e, phi2e = _right(r.H11, e), _right(r.H22, e)
    psi1p = _take(complement_in(psi1e, _right(r.H21[:rows])), A)
    psi2p = _take(complement_in(psi2e, _right(r.H12[:rows])), A)
    phi1p = _take(complement_in(phi1e, _right(r.H11[:rows])), A)
    phi2p = _take(complement_in(phi2e, _right(r.H22[:rows])), A)
    I = np.eye(M)
    # each private message splits its quarter of the budget between the two blocks
    streams = _streams([
        ("U1", "U1", 1, I, 0.5, 1.0),
        ("D1e", "D1", 1, psi1e, 0.125, b), ("D1p", "D1", 1, psi1p, 0.125, a),
        ("C1e", "C1", 1, phi1e, 0.125, b), ("C1p", "C1", 1, phi1p, 0.125, a),
        ("U2", "U2", 2, I, 0.5, 1.0),
        ("D2e", "D2", 2, psi2e, 0.125, b), ("D2p", "D2", 2, psi2p, 0.125, a),
        ("C2e", "C2", 2, phi2e, 0.125, b), ("C2p", "C2", 2, phi2p, 0.125, a),
    ])
    return dict(dims=(k, k, k, k), streams=streams,
                filters={"psi1e": psi1e, "psi1p": psi1p, "psi2e": psi2e, "psi2p": psi2p,
                         "phi1e": phi1e, "phi1p": phi1p, "phi2e": phi2e, "phi2p": phi2p},
                rx_filters=_uniform({}, {}), decoded=_decode_default(),
                claims=_claims((2 * k, k, k), (2 * k, k, k)), public_power_fraction=0.5,
                extra={"k": k, "q": q, "exact_dims": e, "partial_dims": A, "nulled_rows": rows})


def _hkia_lb_t1(r, M, N, a, b):
    k, q = divmod(N, 3)
    dD1, dC1, dC2, dD2 = _ia_split(M, N)
    m1, m2 = dD1 + dC1, dD2 + dC2
    if max(m1, m2) > M:
        raise DomainError("stream split needs more transmit antennas than available")
    Hh11, Hh21 = r.H11[:, :m1], r.H21[:, :m1]
    Hh12, Hh22 = r.H12[:, :m2], r.H22[:, :m2]
    psi1, phi1 = _left(Hh12, dD1), _left(Hh11, dC2)
    psi2, phi2 = _left(Hh21, dD2), _left(Hh22, dC1)
    G1 = np.vstack([psi1.T @ Hh11, phi2.T @ Hh21])
    G2 = np.vstack([psi2.T @ Hh22, phi1.T @ Hh12])
    G1inv = np.linalg.inv(G1) if m1 else np.zeros((0, 0))
    G2inv = np.linalg.inv(G2) if m2 else np.zeros((0, 0))
    E1 = np.eye(M)[:, :m1]
    E2 = np.eye(M)[:, :m2]
    I = np.eye(M)
    streams = _streams([
        ("U1", "U1", 1, I, 0.5, 1.0),
        ("D1", "D1", 1, E1 @ G1inv[:, :dD1], 0.25, a), ("C1", "C1", 1, E1 @ G1inv[:, dD1:], 0.25, a),
        ("U2", "U2", 2, I, 0.5, 1.0),
        ("D2", "D2", 2, E2 @ G2inv[:, :dD2], 0.25, a), ("C2", "C2", 2, E2 @ G2inv[:, dD2:], 0.25, a),
    ])
    W1, W2 = np.hstack([psi1, phi1]), np.hstack([psi2, phi2])
    f1 = {ls: W1 for ls in LOCAL_STATES + ("off",)}
    f2 = {ls: W2 for ls in LOCAL_STATES + ("off",)}
    claims = _claims((dD1 + dC2, dD1, dC2), (dD2 + dC1, dD2, dC1))
    return dict(dims=(dD1, dC1, dC2, dD2), streams=streams,
                filters={"psi1": psi1, "psi2": psi2, "phi1": phi1, "phi2": phi2,
                         "G1": G1, "G2": G2, "G1_inv": G1inv, "G2_inv": G2inv},
                rx_filters=_uniform(f1, f2), decoded=_decode_default(), claims=claims,
                public_power_fraction=0.5, extra={"k": k, "q": q, "m1": m1, "m2": m2})


_BUILDERS: dict[str, Callable] = {
    "simplified_t1": _simplified_t1,
    "type1_r1": _type1_r1,
    "type1_r2": _type1_r2,
    "type2_r1": _type2_r1,
    "simplified_t2": _simplified_t2,
    "type2_r2_hkia": _type2_r2_hkia,
    "hkia_lb_t1": _hkia_lb_t1,
    "hkia_lb_t2_blend": _hkia_lb_t2_blend,
}


def build(family: str, realization: ChannelRealization, params: Optional[ChannelParams] = None,
          a: float = 1.0, b: float = 1.0) -> SchemeSpec:
    """Construct ``family`` for a channel realization.

    ``params`` only supplies the antenna counts when given (they must agree
    with the realization); the constructions do not depend on the
    probabilities.
    """
    N, M = realization.shape
    if params is not None and (params.M, params.N) != (M, N):
        raise ValueError("params and realization disagree on antenna counts")
    if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
        raise ValueError("exponents a, b must lie in [0, 1]")
    _check_dims(family, M, N)
    try:
        parts = _BUILDERS[family](realization, M, N, float(a), float(b))
    except np.linalg.LinAlgError as exc:
        raise DomainError("singular effective channel; resample the realization") from exc
    return SchemeSpec(family=family, M=M, N=N, a=float(a), b=float(b), **parts)


# ------------------------------------------------------------ conditions

def _null(name, X, scale) -> Condition:
    v = float(np.max(np.abs(X))) / scale if X.size else 0.0
    return Condition(name, "null", v, v <= NULL_TOL)


def _rank(name, X, r=None) -> Condition:
    """Full-rank (or rank ``r``) claim; the value is sigma_r / sigma_max."""
    X = np.atleast_2d(X)
    r = min(X.shape) if r is None else r
    if r == 0:
        return Condition(name, "rank", 1.0, True)
    s = np.linalg.svd(X, compute_uv=False)
    if s[0] == 0.0:
        return Condition(name, "rank", 0.0, False)
    v = float(s[r - 1] / s[0])
    ok = v > RANK_TOL and (len(s) == r or s[r] / s[0] <= NULL_TOL)
    return Condition(name, "rank", v, bool(ok))


def condition_list(spec: SchemeSpec, r: ChannelRealization) -> list[Condition]:
    f, fam, M, N = spec.filters, spec.family, spec.M, spec.N
    sc = r.norm
    out: list[Condition] = []
    if fam == "simplified_t1":
        out += [_null("psi1^T H12 = 0", f["psi1"].T @ r.H12, sc),
                _null("psi2^T H21 = 0", f["psi2"].T @ r.H21, sc),
                _rank("psi1^T H11 full rank", f["psi1"].T @ r.H11),
                _rank("psi2^T H22 full rank", f["psi2"].T @ r.H22)]
    elif fam == "type1_r1":
        for i, (Hx, Hd) in ((1, (r.H12, r.H11)), (2, (r.H21, r.H22))):
            p, pt = f[f"psi{i}"], f[f"psi{i}_tilde"]
            W = np.hstack([p, pt])
            out += [_null(f"psi{i}^T H{'12' if i == 1 else '21'} = 0", p.T @ Hx, sc),
                    _rank(f"[psi{i} psi{i}~] full column rank", W),
                    _rank(f"[psi{i} psi{i}~]^T H{i}{i} full rank", W.T @ Hd),
                    _rank(f"psi{i}^T H{i}{i} full rank", p.T @ Hd)]
    elif fam in ("type1_r2", "hkia_lb_t1"):
        if fam == "hkia_lb_t1":
            m1, m2 = spec.extra["m1"], spec.extra["m2"]
            H11, H21 = r.H11[:, :m1], r.H21[:, :m1]
            H12, H22 = r.H12[:, :m2], r.H22[:, :m2]
            hat = "^"
        else:
            H11, H12, H21, H22 = r.H11, r.H12, r.H21, r.H22
            hat = ""
        out += [_null(f"psi1^T H{hat}12 = 0", f["psi1"].T @ H12, sc),
                _null(f"psi2^T H{hat}21 = 0", f["psi2"].T @ H21, sc),
                _null(f"phi1^T H{hat}11 = 0", f["phi1"].T @ H11, sc),
                _null(f"phi2^T H{hat}22 = 0", f["phi2"].T @ H22, sc),
                _rank("G1 invertible", f["G1"]), _rank("G2 invertible", f["G2"])]
    elif fam == "type2_r1":
        for i, j in ((1, 2), (2, 1)):
            Hji, Hii, Hij = r.H(j, i), r.H(i, i), r.H(i, j)
            p, pt, ph, th = f[f"psi{i}"], f[f"psi{i}_tilde"], f[f"phi{i}"], f[f"theta{i}"]
            other_t, other_phi = f[f"psi{j}_tilde"], f[f"phi{j}"]
            W = np.hstack([p, pt])
            out += [_null(f"H{j}{i} psi{i} = 0", Hji @ p, sc),
                    _null(f"H{i}{i} phi{i} = 0", Hii @ ph, sc),
                    _null(f"theta{i}^T H{i}{j} psi{j}~ = 0", th.T @ Hij @ other_t, sc),
                    _rank(f"[psi{i} psi{i}~] full rank", W),
                    _rank(f"H{i}{i} [psi{i} psi{i}~] full rank", Hii @ W),
                    _rank(f"theta{i}^T H{i}{i} [psi{i} psi{i}~] full rank", th.T @ Hii @ W),
                    _rank(f"theta{i}^T H{i}{j} phi{j} full rank", th.T @ Hij @ other_phi)]
    elif fam in ("simplified_t2", "type2_r2_hkia"):
        out += [_null("H21 psi1 = 0", r.H21 @ f["psi1"], sc),
                _null("H11 phi1 = 0", r.H11 @ f["phi1"], sc),
                _null("H12 psi2 = 0", r.H12 @ f["psi2"], sc),
                _null("H22 phi2 = 0", r.H22 @ f["phi2"], sc)]
        for i, j in ((1, 2), (2, 1)):
            D = r.H(i, i) @ f[f"psi{i}"]
            C = r.H(i, j) @ f[f"phi{j}"]
            out += [_rank(f"H{i}{i} psi{i} full rank", D),
                    _rank(f"H{i}{j} phi{j} full rank", C),
                    _rank(f"[H{i}{i} psi{i}, H{i}{j} phi{j}] rank min(2d, N)", np.hstack([D, C]),
                          min(N, D.shape[1] + C.shape[1]))]
    elif fam == "hkia_lb_t2_blend":
        rows, A, k = spec.extra["nulled_rows"], spec.extra["partial_dims"], spec.extra["k"]
        for i, j in ((1, 2), (2, 1)):
            Hji, Hii, Hij = r.H(j, i), r.H(i, i), r.H(i, j)
            pe, pp, fe, fp = f[f"psi{i}e"], f[f"psi{i}p"], f[f"phi{i}e"], f[f"phi{i}p"]
            out += [_null(f"H{j}{i} psi{i}e = 0", Hji @ pe, sc),
                    _null(f"H^{j}{i} psi{i}p = 0", Hji[:rows] @ pp, sc),
                    _null(f"H{i}{i} phi{i}e = 0", Hii @ fe, sc),
                    _null(f"H^{i}{i} phi{i}p = 0", Hii[:rows] @ fp, sc),
                    _rank(f"[psi{i}e psi{i}p] full rank", np.hstack([pe, pp])),
                    _rank(f"[phi{i}e phi{i}p] full rank", np.hstack([fe, fp]))]
            # residual interference at Rx i from C_i (own phi_p) and D_j aligns on A dims
            res = np.hstack([Hii @ fp, Hij @ f[f"psi{j}p"]])
            out.append(_rank(f"residual at Rx{i} aligned in A dims", res, A))
            des = np.hstack([Hii @ pe, Hii @ pp, Hij @ f[f"phi{j}e"], Hij @ f[f"phi{j}p"], Hii @ fp])
            out.append(_rank(f"Rx{i} private stack rank 2k + A", des, 2 * k + A))
    else:  # pragma: no cover - guarded by build
        raise ValueError(fam)
    return out


def check_conditions(spec: SchemeSpec, realization: ChannelRealization, P: float = 1.0) -> list[Condition]:
    """All null and rank claims of the family plus transmit-power accounting."""
    out = condition_list(spec, realization)
    for tx in (1, 2):
        pw = spec.tx_power(tx, P) / P
        out.append(Condition(f"Tx{tx} power <= P", "power", pw, pw <= 1 + 1e-9))
    return out


# ------------------------------------------------------------ observations

def _mask_gain(state: str, rx: int, tx: int) -> int:
    s11, s12, s21, s22 = STATE_MASKS[state]
    return {(1, 1): s11, (1, 2): s12, (2, 1): s21, (2, 2): s22}[(rx, tx)]


def _tag(stream: Stream, rx: int) -> str:
    if stream.public:
        return "public"
    return "desired" if INTENDED[stream.message] == rx else "interference"


def effective_channels(spec: SchemeSpec, realization: ChannelRealization, state: str,
                       filtered: bool = True) -> list[EffectiveChannel]:
    """Per-stream matrices from stream symbols to each receiver's output in ``state``."""
    out = []
    for rx in (1, 2):
        W = spec.rx_filters[(rx, local_state(STATE_MASKS[state], rx))] if filtered else None
        for s in spec.streams:
            Hm = _mask_gain(state, rx, s.tx) * realization.H(rx, s.tx)
            X = Hm @ s.precoder
            if W is not None:
                X = W.T @ X
            out.append(EffectiveChannel(rx, s.name, s.message, X, _tag(s, rx)))
    return out


def _resolve(spec: SchemeSpec, names: Iterable[str]) -> set:
    chosen = set()
    for n in names:
        hits = {s.name for s in spec.streams if n in (s.name, s.message)}
        if not hits and n not in {"D1", "C1", "C2", "D2", "U1", "U2"}:
            raise ValueError(f"unknown stream {n!r}")
        chosen |= hits
    return chosen


def received_covariance(spec: SchemeSpec, realization: ChannelRealization, state: str, P: float,
                        conditioned: Iterable[str] = (), rx: int = 1) -> np.ndarray:
    """Covariance of the raw observation at ``rx`` given the conditioned streams."""
    skip = _resolve(spec, conditioned)
    N = spec.N
    K = np.eye(N)
    for s in spec.streams:
        if s.name in skip:
            continue
        X = _mask_gain(state, rx, s.tx) * realization.H(rx, s.tx) @ s.precoder
        K = K + s.variance(P) * (X @ X.T)
    return K
