"""Sign-pattern statistics, inequality families and the compatibility test.

Everything here works on correlations: an outcome vector p maps to
``r_ij = 4 p_ij - 1`` and a connection vector e maps to ``r = 1 - 4 e``.
The two statistics ``s0``/``s1`` are the maxima of ``(+-r1 +-r2 +-r3 +-r4)/4``
over sign patterns with an even (s0) respectively odd (s1) number of plus
signs.  An outcome vector p and a connection vector e admit a joint coupling
exactly when

    s0(e) + s1(p) <= 3/2   and   s1(e) + s0(p) <= 3/2.

All decisions are exact for exact scalars (including values in Q[sqrt(2)]).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .model import ConnectionVector, OutcomeVector
from .scalars import DEFAULT_TOLERANCE, Scalar, as_scalar

__all__ = [
    "Compliance",
    "CorrelationQuad",
    "SPair",
    "s_pair",
    "s_pair_closed_form",
    "chsh_satisfied",
    "tsirelson_satisfied",
    "qm_compliant",
    "compatible",
    "compatible_stats",
    "enumerate_E0",
    "realize_s_pair",
    "noforcing_counterexample",
    "TSIRELSON_LOW",
    "TSIRELSON_HIGH",
]

#: The two CHSH-expression bounds permitted by quantum mechanics, (1 -+ sqrt2)/2.
TSIRELSON_LOW = Scalar.quadratic(Fraction(1, 2), Fraction(-1, 2))
TSIRELSON_HIGH = Scalar.quadratic(Fraction(1, 2), Fraction(1, 2))

_SIGN_PATTERNS = tuple(product((1, -1), repeat=4))
_EVEN_PATTERNS = tuple(s for s in _SIGN_PATTERNS if s.count(1) % 2 == 0)
_ODD_PATTERNS = tuple(s for s in _SIGN_PATTERNS if s.count(1) % 2 == 1)

_THREE_HALVES = Scalar(Fraction(3, 2))


class Compliance(enum.Enum):
    """Ternary classification against the quantum-realizability boundary."""

    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class CorrelationQuad:
    """Four correlations in [-1, 1]."""

    r1: Scalar
    r2: Scalar
    r3: Scalar
    r4: Scalar

    def __post_init__(self):
        for name in ("r1", "r2", "r3", "r4"):
            object.__setattr__(self, name, as_scalar(getattr(self, name)))
        for name, r in zip(("r1", "r2", "r3", "r4"), self.components):
            if r.is_exact:
                if r < -1 or r > 1:
                    raise ValueError(f"{name} = {r} outside [-1, 1]")
            else:
                v = r.to_float()
                if v < -1 - DEFAULT_TOLERANCE or v > 1 + DEFAULT_TOLERANCE:
                    raise ValueError(f"{name} = {r} outside [-1, 1]")

    @property
    def components(self) -> tuple[Scalar, Scalar, Scalar, Scalar]:
        return (self.r1, self.r2, self.r3, self.r4)

    @classmethod
    def from_outcomes(cls, p: OutcomeVector) -> CorrelationQuad:
        return cls(*(4 * c - 1 for c in p.components))

    @classmethod
    def from_connections(cls, eps: ConnectionVector) -> CorrelationQuad:
        return cls(*(1 - 4 * c for c in eps.components))

    def to_outcome_vector(self) -> OutcomeVector:
        return OutcomeVector(*((r + 1) / 4 for r in self.components))

    def to_connection_vector(self) -> ConnectionVector:
        return ConnectionVector(*((1 - r) / 4 for r in self.components))


@dataclass(frozen=True)
class SPair:
    """An (s0, s1) pair; always lies in the triangle (0,0)-(1/2,1)-(1,1/2)."""

    s0: Scalar
    s1: Scalar

    def __post_init__(self):
        object.__setattr__(self, "s0", as_scalar(self.s0))
        object.__setattr__(self, "s1", as_scalar(self.s1))
        s0, s1 = self.s0, self.s1
        ok = (
            s0 >= 0
            and s1 >= 0
            and s0 <= 1
            and s1 <= 1
            and s0 + s1 <= Fraction(3, 2)
            and 2 * s1 >= s0
            and 2 * s0 >= s1
        )
        if not ok:
            raise ValueError(f"(s0, s1) = ({s0}, {s1}) outside the attainable triangle")


def s_pair(r: CorrelationQuad) -> SPair:
    """Maximize the signed quarter-sums over even and odd plus-count patterns."""
    comps = r.components
    if all(c.is_rational for c in comps):
        values = [c.a for c in comps]
        out = []
        for patterns in (_EVEN_PATTERNS, _ODD_PATTERNS):
            out.append(
                max(
                    sum(v if sgn == 1 else -v for sgn, v in zip(signs, values))
                    for signs in patterns
                )
                / 4
            )
        return SPair(Scalar(out[0]), Scalar(out[1]))
    best: dict[int, Scalar] = {}
    for patterns, key in ((_EVEN_PATTERNS, 0), (_ODD_PATTERNS, 1)):
        top = None
        for signs in patterns:
            total = None
            for sgn, c in zip(signs, comps):
                term = c if sgn == 1 else -c
                total = term if total is None else total + term
            if top is None or total > top:
                top = total
        best[key] = top / 4
    return SPair(best[0], best[1])


def s_pair_closed_form(r: CorrelationQuad) -> SPair:
    """Equivalent closed form: the larger statistic is the mean of |r_k|,
    attained at the parity of the count of positive components; the smaller
    is that minus half the smallest |r_k|."""
    mags = [abs(c) for c in r.components]
    big = sum(mags[1:], mags[0]) / 4
    small = big - min(mags) / 2
    positives = sum(1 for c in r.components if c > 0)
    if positives % 2 == 0:
        return SPair(big, small)
    return SPair(small, big)


def _chsh_expressions(p: OutcomeVector) -> list[Scalar]:
    total = p.p11 + p.p12 + p.p21 + p.p22
    return [total - 2 * c for c in p.components]


def _rational_components(p: OutcomeVector) -> list[Fraction] | None:
    comps = p.components
    if all(c.is_rational for c in comps):
        return [c.a for c in comps]
    return None


def chsh_satisfied(p: OutcomeVector) -> bool:
    """0 <= p11+p12+p21+p22 - 2 p_ij <= 1 for all four choices of ij."""
    fr = _rational_components(p)
    if fr is not None:
        total = sum(fr)
        return all(0 <= total - 2 * c <= 1 for c in fr)
    return all(expr >= 0 and expr <= 1 for expr in _chsh_expressions(p))


def tsirelson_satisfied(p: OutcomeVector) -> bool:
    """(1-sqrt2)/2 <= p11+p12+p21+p22 - 2 p_ij <= (1+sqrt2)/2 for all ij."""
    fr = _rational_components(p)
    if fr is not None:
        # |expr - 1/2| <= sqrt2/2 for rational expr reduces to (2 expr - 1)^2 <= 2
        total = sum(fr)
        for c in fr:
            t = 2 * (total - 2 * c) - 1
            if t * t > 2:
                return False
        return True
    if p.is_exact:
        lo, hi = TSIRELSON_LOW, TSIRELSON_HIGH
    else:
        lo, hi = TSIRELSON_LOW.to_approximate(), TSIRELSON_HIGH.to_approximate()
    return all(expr >= lo and expr <= hi for expr in _chsh_expressions(p))


def qm_compliant(p: OutcomeVector, tol: float = DEFAULT_TOLERANCE) -> Compliance:
    """Classify p against |r11 r12 - r21 r22| <= sum of sqrt(1-r^2) products.

    For exact scalars the comparison is staged through squares, so it stays
    inside Q[sqrt(2)] and the verdict (inside/boundary/outside) is exact.
    Approximate scalars are classified within ``tol``.
    """
    fr = _rational_components(p)
    if fr is not None:
        r1, r2, r3, r4 = (4 * c - 1 for c in fr)
        lhs = abs(r1 * r2 - r3 * r4)
        x = (1 - r1 * r1) * (1 - r2 * r2)
        y = (1 - r3 * r3) * (1 - r4 * r4)
        d = lhs * lhs - x - y
        if d < 0:
            return Compliance.INSIDE
        if d == 0:
            return Compliance.BOUNDARY if x * y == 0 else Compliance.INSIDE
        e = d * d - 4 * x * y
        if e < 0:
            return Compliance.INSIDE
        return Compliance.BOUNDARY if e == 0 else Compliance.OUTSIDE
    r = CorrelationQuad.from_outcomes(p)
    r1, r2, r3, r4 = r.components
    if not p.is_exact:
        lhs = abs(r1.to_float() * r2.to_float() - r3.to_float() * r4.to_float())
        rhs = _sqrt01(r1) * _sqrt01(r2) + _sqrt01(r3) * _sqrt01(r4)
        d = rhs - lhs
        if abs(d) <= tol:
            return Compliance.BOUNDARY
        return Compliance.INSIDE if d > 0 else Compliance.OUTSIDE
    lhs = abs(r1 * r2 - r3 * r4)
    x = (1 - r1 * r1) * (1 - r2 * r2)
    y = (1 - r3 * r3) * (1 - r4 * r4)
    # lhs vs sqrt(x) + sqrt(y): compare lhs^2 - x - y against 2*sqrt(x*y).
    d = lhs * lhs - x - y
    if d < 0:
        return Compliance.INSIDE
    if d == 0:
        return Compliance.BOUNDARY if x * y == 0 else Compliance.INSIDE
    e = d * d - 4 * x * y
    if e < 0:
        return Compliance.INSIDE
    return Compliance.BOUNDARY if e == 0 else Compliance.OUTSIDE


def _sqrt01(r: Scalar) -> float:
    return (max(0.0, 1.0 - r.to_float() ** 2)) ** 0.5


def compatible_stats(s_eps: SPair, s_p: SPair) -> bool:
    """The coupling-existence criterion on precomputed statistics."""
    limit = _THREE_HALVES if s_eps.s0.is_exact else _THREE_HALVES.to_approximate()
    return s_eps.s0 + s_p.s1 <= limit and s_eps.s1 + s_p.s0 <= limit


def compatible(p: OutcomeVector, eps: ConnectionVector) -> bool:
    """Can p and eps be realized as marginals of one 256-entry coupling?"""
    return compatible_stats(
        s_pair(CorrelationQuad.from_connections(eps)),
        s_pair(CorrelationQuad.from_outcomes(p)),
    )


def enumerate_E0() -> list[ConnectionVector]:
    """All eight connection vectors with s0 = 1 (each also has s1 = 1/2).

    These are the all-zero vector and the vectors obtained from it by
    replacing any two, or all four, zeros with 1/2.
    """
    half = Fraction(1, 2)
    out = []
    for mask in range(16):
        if bin(mask).count("1") % 2 == 0:
            out.append(
                ConnectionVector(
                    *(Scalar(half if mask & (1 << i) else 0) for i in range(4))
                )
            )
    return out


def realize_s_pair(target: SPair, parity: str) -> CorrelationQuad:
    """Construct correlations whose statistics reproduce ``target`` exactly.

    ``parity`` names the statistic holding the larger value: ``"even"`` for
    s0, ``"odd"`` for s1.  The result is ``(t, t, t, sigma*u)`` with
    ``t = 2(M+m)/3`` and ``u = 2(M-m)`` where M/m are the larger/smaller
    target values; the sign sigma on the distinguished fourth component
    selects the parity.
    """
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    s0, s1 = target.s0, target.s1
    if parity == "even" and s0 < s1:
        raise ValueError("parity 'even' requires s0 >= s1 in the target")
    if parity == "odd" and s1 < s0:
        raise ValueError("parity 'odd' requires s1 >= s0 in the target")
    big, small = (s0, s1) if parity == "even" else (s1, s0)
    t = 2 * (big + small) / 3
    u = 2 * (big - small)
    sigma = 1 if parity == "even" else -1
    return CorrelationQuad(t, t, t, sigma * u)


def noforcing_counterexample(eps: ConnectionVector) -> OutcomeVector:
    """An outcome vector compatible with ``eps`` yet not quantum-realizable.

    Exists for every connection vector with s0 < 1.  Construction: put the
    outcome statistics on the edge s0 + s1 = 3/2 of the triangle with
    s0(p) = max(1/2, s0(eps)); both coupling-existence inequalities then
    hold, while s0(p) < 1 forces a strict quantum violation.

    Raises ValueError when s0(eps) = 1: those connection vectors only admit
    quantum-realizable outcomes, so no counterexample exists.
    """
    se = s_pair(CorrelationQuad.from_connections(eps))
    if se.s0 == 1:
        raise ValueError(
            "s0(eps) = 1: every compatible outcome vector is quantum-realizable, "
            "no counterexample exists"
        )
    half = Fraction(1, 2)
    if se.s0 <= half:
        target = SPair(Scalar(half), Scalar(1))
        parity = "odd"
    else:
        s0p = se.s0
        s1p = Scalar(Fraction(3, 2)) - s0p if s0p.is_exact else 1.5 - s0p
        parity = "even" if s0p >= s1p else "odd"
        target = SPair(s0p, s1p)
    return realize_s_pair(target, parity).to_outcome_vector()
