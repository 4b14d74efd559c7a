"""Channel parameters, state probabilities and eta-triple algebra.

A bursty X channel has two transmitters with M antennas each and two
receivers with N antennas each.  Every link is switched on or off by a
Bernoulli state: direct links with probability ``p_d``, cross links with
probability ``p_c``, and both links seen by one receiver are on together
with probability ``p_cd``.  Receiver-side DoF expressions are weighted sums
over the three active states (cross and direct on, direct only, cross only),
which is what :class:`EtaTriple` represents.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Slack used for probability bookkeeping and regime boundaries.  Equality at
# a boundary is resolved towards the "<=" side, so exact ties on a decimal
# grid must not flip because of round-off.
EPS = 1e-12

STATE_LABELS = ("A", "B", "C", "D", "E")

# Link masks in the order (S11, S12, S21, S22); S_ji is the link Tx i -> Rx j.
STATE_MASKS = {
    "A": (1, 1, 1, 1),
    "B": (1, 0, 0, 1),
    "C": (1, 0, 1, 0),
    "D": (0, 1, 0, 1),
    "E": (0, 0, 0, 0),
}


class ParameterError(ValueError):
    """Raised when channel parameters violate a model invariant."""


@dataclass(frozen=True)
class ChannelParams:
    """Antenna counts and burstiness probabilities.

    ``p_cd`` is the probability that the direct and the cross link seen by
    one receiver are on simultaneously.  Use :func:`make_params` to build an
    instance from the conditional probability ``p_{d|c}``.
    """

    M: int
    N: int
    p_d: float
    p_c: float
    p_cd: float

    def __post_init__(self):
        if int(self.M) != self.M or int(self.N) != self.N:
            raise ParameterError("antenna counts must be integers")
        if self.M < 1 or self.N < 1:
            raise ParameterError(f"antenna counts must be >= 1 (M={self.M}, N={self.N})")
        for name in ("p_d", "p_c", "p_cd"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < -EPS or v > 1 + EPS:
                raise ParameterError(f"{name}={v} is not a probability")
        if self.p_cd > min(self.p_c, self.p_d) + EPS:
            raise ParameterError(
                f"p_cd={self.p_cd:g} exceeds min(p_c, p_d)={min(self.p_c, self.p_d):g}")
        if 1.0 - self.p_d - self.p_c + self.p_cd < -EPS:
            raise ParameterError("all-off probability 1 - p_d - p_c + p_cd is negative")

    @property
    def p_dgc(self) -> float:
        """Conditional probability that the direct link is on given the cross link is."""
        return self.p_cd / self.p_c if self.p_c > 0 else 0.0

    @property
    def is_canonical(self) -> bool:
        return self.p_c <= self.p_d + EPS

    def with_dims(self, M: int, N: int) -> "ChannelParams":
        return ChannelParams(M, N, self.p_d, self.p_c, self.p_cd)


@dataclass(frozen=True)
class StateProbs:
    """Per-receiver state probabilities (cross-and-direct, direct only, cross only, off)."""

    p_cd: float
    p_cbar_d: float
    p_c_dbar: float
    p_off: float


@dataclass(frozen=True)
class EtaTriple:
    """Coefficients <c_cd, c_cbd, c_cdb> of a DoF expression over receiver states.

    The triple stands for the scalar ``c_cd*p_cd + c_cbd*p_cbar_d + c_cdb*p_c_dbar``
    and supports the usual vector-space arithmetic.
    """

    c_cd: float
    c_cbd: float
    c_cdb: float

    def __add__(self, other: "EtaTriple") -> "EtaTriple":
        return EtaTriple(self.c_cd + other.c_cd, self.c_cbd + other.c_cbd, self.c_cdb + other.c_cdb)

    def __sub__(self, other: "EtaTriple") -> "EtaTriple":
        return EtaTriple(self.c_cd - other.c_cd, self.c_cbd - other.c_cbd, self.c_cdb - other.c_cdb)

    def __mul__(self, s: float) -> "EtaTriple":
        return EtaTriple(s * self.c_cd, s * self.c_cbd, s * self.c_cdb)

    __rmul__ = __mul__

    def __neg__(self) -> "EtaTriple":
        return self * -1

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.c_cd, self.c_cbd, self.c_cdb)

    def evaluate(self, params: ChannelParams) -> float:
        return eta_eval(self, params)

    def __str__(self) -> str:
        return "<%g,%g,%g>" % self.as_tuple()


def T(a: float, b: float, c: float) -> EtaTriple:
    """Shorthand constructor for an :class:`EtaTriple`."""
    return EtaTriple(a, b, c)


@dataclass(frozen=True)
class Classification:
    """Antenna-ratio type and burstiness regime of a parameter point."""

    channel_type: str  # "I" (M < N), "II" (M > N) or "square"
    regime: int        # 1 or 2

    @property
    def type1(self) -> bool:
        return self.channel_type in ("I", "square")

    @property
    def type2(self) -> bool:
        return self.channel_type in ("II", "square")


@dataclass(frozen=True)
class ContractedState:
    label: str
    mask: tuple[int, int, int, int]
    prob: float


def make_params(M: int, N: int, p_d: float, p_c: float, p_dgc: float) -> ChannelParams:
    """Build :class:`ChannelParams` from the conditional probability ``p_dgc``."""
    for name, v in (("p_d", p_d), ("p_c", p_c), ("p_d_given_c", p_dgc)):
        if not np.isfinite(v) or v < 0 or v > 1:
            raise ParameterError(f"{name}={v} is not in [0, 1]")
    p_cd = p_c * p_dgc if p_c > 0 else 0.0
    if p_cd > p_d + EPS:
        raise ParameterError(f"p_cd = p_c*p_d_given_c = {p_cd:g} exceeds p_d = {p_d:g}")
    return ChannelParams(M, N, float(p_d), float(p_c), float(p_cd))


def state_probs(params: ChannelParams) -> StateProbs:
    p = params
    return StateProbs(p.p_cd, p.p_d - p.p_cd, p.p_c - p.p_cd, 1.0 - p.p_d - p.p_c + p.p_cd)


def eta_eval(t: EtaTriple, params: ChannelParams) -> float:
    """Evaluate a triple at the state probabilities of ``params``."""
    s = state_probs(params)
    return t.c_cd * s.p_cd + t.c_cbd * s.p_cbar_d + t.c_cdb * s.p_c_dbar


def eta_axpy(alpha: float, t1: EtaTriple, beta: float, t2: EtaTriple) -> EtaTriple:
    return alpha * t1 + beta * t2


def _require_canonical(params: ChannelParams) -> None:
    if not params.is_canonical:
        raise ParameterError(
            f"p_c={params.p_c:g} > p_d={params.p_d:g}; canonicalize the parameters first")


def is_regime1(params: ChannelParams) -> bool:
    """p_c/p_d <= 1/(1+p_{d|c}), written without divisions as p_cd <= p_d - p_c."""
    return params.p_cd <= params.p_d - params.p_c + EPS


def classify(params: ChannelParams) -> Classification:
    _require_canonical(params)
    M, N = params.M, params.N
    ctype = "I" if M < N else ("II" if M > N else "square")
    return Classification(ctype, 1 if is_regime1(params) else 2)


def canonicalize(params: ChannelParams) -> ChannelParams:
    """Swap p_d and p_c when needed so that p_c <= p_d; p_cd is preserved."""
    if params.p_c <= params.p_d:
        return params
    return ChannelParams(params.M, params.N, params.p_c, params.p_d, params.p_cd)


def contracted_states(params: ChannelParams) -> list[ContractedState]:
    """The five-state joint law whose per-receiver marginals match the channel's."""
    _require_canonical(params)
    p = params
    probs = {
        "A": p.p_cd,
        "B": max(p.p_d - p.p_c, 0.0),
        "C": p.p_c - p.p_cd,
        "D": p.p_c - p.p_cd,
        "E": 1.0 - p.p_d - p.p_c + p.p_cd,
    }
    return [ContractedState(s, STATE_MASKS[s], probs[s]) for s in STATE_LABELS]


def receiver_view(mask: Sequence[int], rx: int) -> tuple[int, int]:
    """(direct, cross) link status seen by receiver ``rx`` under a 4-bit mask."""
    s11, s12, s21, s22 = mask
    return (s11, s12) if rx == 1 else (s22, s21)


def local_state(mask: Sequence[int], rx: int) -> str:
    """Name of the receiver-local state: 'cd', 'cbd' (direct only), 'cdb' (cross only) or 'off'."""
    d, c = receiver_view(mask, rx)
    return {(1, 1): "cd", (1, 0): "cbd", (0, 1): "cdb", (0, 0): "off"}[(d, c)]


def receiver_marginals(states: Sequence[ContractedState], rx: int) -> dict[tuple[int, int], float]:
    """Marginal law of (direct, cross) at receiver ``rx`` under a joint state law."""
    out = {(1, 1): 0.0, (1, 0): 0.0, (0, 1): 0.0, (0, 0): 0.0}
    for st in states:
        out[receiver_view(st.mask, rx)] += st.prob
    return out


def sample_states(params: ChannelParams, n: int, seed) -> np.ndarray:
    """Draw ``n`` i.i.d. contracted-state labels; deterministic given ``seed``."""
    states = contracted_states(params)
    prob = np.clip(np.array([s.prob for s in states]), 0.0, None)
    prob = prob / prob.sum()
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(states), size=int(n), p=prob)
    return np.array(STATE_LABELS)[idx]
