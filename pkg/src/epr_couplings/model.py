"""Domain types: outcome vectors, connection vectors, couplings, marginals.

The eight spin variables are coupled through a single 256-entry probability
table.  Indexing convention, fixed once and for all so files and constraint
matrices are bit-exact:

* canonical variable order ``A11, B11, A12, B12, A21, B21, A22, B22``;
* table index bit ``k`` (bit 0 most significant, bit 7 least) carries the
  variable at canonical position ``k``; bit value 1 means the variable
  equals +1, bit 0 means -1.

So the all-plus assignment has index 255 and "A11 = +1, everything else
-1" has index 128.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .scalars import DEFAULT_TOLERANCE, ONE, ZERO, Scalar, as_scalar

__all__ = [
    "VariableId",
    "OutcomeVector",
    "ConnectionVector",
    "CouplingTable",
    "MarginalSpec",
    "index_of",
    "decode",
    "full_table",
    "connection_marginals",
    "outcome_marginals",
    "marginal_spec_to_json",
    "marginal_spec_from_json",
    "marginal_specs_from_json",
]

N_VARIABLES = 8
N_ASSIGNMENTS = 1 << N_VARIABLES


class VariableId(enum.IntEnum):
    """The eight coupled spin variables, in canonical order."""

    A11 = 0
    B11 = 1
    A12 = 2
    B12 = 3
    A21 = 4
    B21 = 5
    A22 = 6
    B22 = 7

    @classmethod
    def from_name(cls, name: str) -> VariableId:
        try:
            return cls[name.strip()]
        except KeyError:
            raise ValueError(f"unknown variable {name!r}") from None


def index_of(assignment: Mapping[VariableId, int]) -> int:
    """Canonical table index of a full +-1 assignment."""
    if len(assignment) != N_VARIABLES:
        missing = [v.name for v in VariableId if v not in assignment]
        raise ValueError(f"assignment must cover all 8 variables (missing {missing})")
    index = 0
    for var in VariableId:
        value = assignment[var]
        if value not in (-1, 1):
            raise ValueError(f"{var.name} must be +1 or -1, got {value!r}")
        if value == 1:
            index |= 1 << (N_VARIABLES - 1 - var)
    return index


def decode(index: int) -> dict[VariableId, int]:
    """Inverse of :func:`index_of`."""
    if not 0 <= index < N_ASSIGNMENTS:
        raise ValueError(f"index {index} out of range [0, 255]")
    return {
        var: 1 if index & (1 << (N_VARIABLES - 1 - var)) else -1 for var in VariableId
    }


_HALF_FRACTION = Fraction(1, 2)


def _check_probability(name: str, value: Scalar) -> None:
    if value.is_rational:
        if not 0 <= value.a <= _HALF_FRACTION:
            raise ValueError(f"{name} = {value} outside [0, 1/2]")
    elif value.is_exact:
        if value < 0 or value > _HALF_FRACTION:
            raise ValueError(f"{name} = {value} outside [0, 1/2]")
    else:
        v = value.to_float()
        if v < -DEFAULT_TOLERANCE or v > 0.5 + DEFAULT_TOLERANCE:
            raise ValueError(f"{name} = {value} outside [0, 1/2]")


def _check_uniform_mode(values: Iterable[Scalar], what: str) -> None:
    modes = {v.is_exact for v in values}
    if len(modes) > 1:
        raise ValueError(f"{what} mixes exact and approximate scalars")


@dataclass(frozen=True)
class OutcomeVector:
    """The four observable joint probabilities p_ij = Pr[A_ij = B_ij = +1]."""

    p11: Scalar
    p12: Scalar
    p21: Scalar
    p22: Scalar

    def __post_init__(self):
        for name in ("p11", "p12", "p21", "p22"):
            object.__setattr__(self, name, as_scalar(getattr(self, name)))
        _check_uniform_mode(self.components, "outcome vector")
        for name, value in zip(("p11", "p12", "p21", "p22"), self.components):
            _check_probability(name, value)

    @property
    def components(self) -> tuple[Scalar, Scalar, Scalar, Scalar]:
        return (self.p11, self.p12, self.p21, self.p22)

    @property
    def is_exact(self) -> bool:
        return self.p11.is_exact

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.components) + ")"


@dataclass(frozen=True)
class ConnectionVector:
    """The four imposed connection probabilities.

    ``a1``/``a2`` constrain the pairs (A11, A12) and (A21, A22);
    ``b1``/``b2`` constrain (B11, B21) and (B12, B22).  Component value e
    means Pr[pair differs] = 2e, i.e. Pr[both = +1] = 1/2 - e.
    """

    a1: Scalar
    a2: Scalar
    b1: Scalar
    b2: Scalar

    def __post_init__(self):
        for name in ("a1", "a2", "b1", "b2"):
            object.__setattr__(self, name, as_scalar(getattr(self, name)))
        _check_uniform_mode(self.components, "connection vector")
        for name, value in zip(("a1", "a2", "b1", "b2"), self.components):
            _check_probability(name, value)

    @property
    def components(self) -> tuple[Scalar, Scalar, Scalar, Scalar]:
        return (self.a1, self.a2, self.b1, self.b2)

    @property
    def is_exact(self) -> bool:
        return self.a1.is_exact

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.components) + ")"


def _subset_mask(variables: Iterable[VariableId]) -> int:
    mask = 0
    for var in variables:
        mask |= 1 << (N_VARIABLES - 1 - var)
    return mask


@dataclass(frozen=True)
class CouplingTable:
    """A joint distribution over all 2^8 sign assignments."""

    entries: tuple[Scalar, ...]

    def __post_init__(self):
        entries = tuple(as_scalar(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        if len(entries) != N_ASSIGNMENTS:
            raise ValueError(f"coupling table needs 256 entries, got {len(entries)}")
        _check_uniform_mode(entries, "coupling table")
        exact = entries[0].is_exact
        total = ZERO if exact else Scalar.approximate(0.0)
        for i, e in enumerate(entries):
            if e < 0:
                raise ValueError(f"entry {i} is negative: {e}")
            total = total + e
        if total != (ONE if exact else Scalar.approximate(1.0)):
            raise ValueError(f"entries sum to {total}, not 1")

    def probability(self, assignment: Mapping[VariableId, int]) -> Scalar:
        return self.entries[index_of(assignment)]

    def prob_all_plus(self, variables: Iterable[VariableId]) -> Scalar:
        """Pr[all listed variables = +1] under this coupling."""
        mask = _subset_mask(variables)
        total = ZERO if self.entries[0].is_exact else Scalar.approximate(0.0)
        for index, e in enumerate(self.entries):
            if index & mask == mask:
                total = total + e
        return total

    def outcome_vector(self) -> OutcomeVector:
        pairs = [
            (VariableId.A11, VariableId.B11),
            (VariableId.A12, VariableId.B12),
            (VariableId.A21, VariableId.B21),
            (VariableId.A22, VariableId.B22),
        ]
        return OutcomeVector(*(self.prob_all_plus(pair) for pair in pairs))

    def connection_vector(self) -> ConnectionVector:
        # e = Pr[first = +1] - Pr[both = +1] = Pr[first = +1, second = -1]
        pairs = [
            (VariableId.A11, VariableId.A12),
            (VariableId.A21, VariableId.A22),
            (VariableId.B11, VariableId.B21),
            (VariableId.B12, VariableId.B22),
        ]
        comps = []
        for first, second in pairs:
            comps.append(self.prob_all_plus([first]) - self.prob_all_plus([first, second]))
        return ConnectionVector(*comps)

    def to_strings(self) -> list[str]:
        return [str(e) for e in self.entries]

    @classmethod
    def from_strings(cls, items: Sequence[str]) -> CouplingTable:
        return cls(tuple(as_scalar(s) for s in items))


def _canonical_subset(variables: Iterable[VariableId]) -> tuple[VariableId, ...]:
    return tuple(sorted(set(variables)))


class MarginalSpec:
    """A fixed distribution on a subset of the eight variables.

    Internally stored as the full 2^k joint table over +-1 values (index bit
    j, most significant first, carries ``variables[j]``; bit 1 = +1).  Can be
    built either from that table or from the "probability that every listed
    variable equals +1" parameterization over all subsets.
    """

    __slots__ = ("variables", "table")

    def __init__(self, variables: Sequence[VariableId], table: Sequence[Scalar]):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError("duplicate variables in marginal")
        table = tuple(as_scalar(t) for t in table)
        if len(table) != 1 << len(variables):
            raise ValueError(
                f"table for {len(variables)} variables needs {1 << len(variables)} "
                f"entries, got {len(table)}"
            )
        if table:
            _check_uniform_mode(table, "marginal table")
        exact = not table or table[0].is_exact
        total = ZERO if exact else Scalar.approximate(0.0)
        for i, t in enumerate(table):
            if t < 0:
                raise ValueError(f"marginal table entry {i} is negative: {t}")
            total = total + t
        if total != (ONE if exact else Scalar.approximate(1.0)):
            raise ValueError(f"marginal table sums to {total}, not 1")
        self.variables = variables
        self.table = table

    @classmethod
    def from_prob_all_plus(
        cls,
        variables: Sequence[VariableId],
        probs: Mapping[frozenset[VariableId], Scalar],
    ) -> MarginalSpec:
        """Build from Pr[all of S = +1] given for every subset S of ``variables``.

        The empty subset may be omitted; if present it must equal 1.  The
        induced joint table must be a distribution, otherwise the
        parameterization is inconsistent and a ValueError is raised.
        """
        variables = tuple(variables)
        k = len(variables)
        probs = {frozenset(s): as_scalar(v) for s, v in probs.items()}
        varset = frozenset(variables)
        for s in probs:
            if not s <= varset:
                bad = [v.name for v in s - varset]
                raise ValueError(f"subset mentions variables not in the marginal: {bad}")
        sample = next(iter(probs.values()), ONE)
        one = ONE if sample.is_exact else Scalar.approximate(1.0)
        empty = probs.setdefault(frozenset(), one)
        if empty != one:
            raise ValueError(f"Pr[] must be 1, got {empty}")
        zeta = []
        for mask in range(1 << k):
            subset = frozenset(variables[j] for j in range(k) if mask & (1 << (k - 1 - j)))
            if subset not in probs:
                raise ValueError(
                    "missing probability for subset "
                    f"{{{', '.join(v.name for v in sorted(subset))}}}"
                )
            zeta.append(probs[subset])
        # Inclusion-exclusion: Pr[exactly T = +1, rest -1]
        #   = sum over S >= T of (-1)^|S \ T| * Pr[all of S = +1]
        table = []
        for tmask in range(1 << k):
            rest = ((1 << k) - 1) ^ tmask
            value = None
            extra = rest
            while True:
                smask = tmask | extra
                term = zeta[smask]
                if bin(extra).count("1") % 2:
                    term = -term
                value = term if value is None else value + term
                if extra == 0:
                    break
                extra = (extra - 1) & rest
            if value < 0:
                names = [
                    f"{variables[j].name}={'+1' if tmask & (1 << (k - 1 - j)) else '-1'}"
                    for j in range(k)
                ]
                raise ValueError(
                    f"inconsistent marginal parameterization: Pr[{', '.join(names)}] "
                    f"= {value} < 0"
                )
            table.append(value)
        return cls(variables, table)

    def prob_all_plus(self, subset: Iterable[VariableId]) -> Scalar:
        subset = frozenset(subset)
        if not subset <= set(self.variables):
            bad = [v.name for v in subset - set(self.variables)]
            raise ValueError(f"variables not in this marginal: {bad}")
        k = len(self.variables)
        smask = 0
        for j, var in enumerate(self.variables):
            if var in subset:
                smask |= 1 << (k - 1 - j)
        total = ZERO if not self.table or self.table[0].is_exact else Scalar.approximate(0.0)
        for mask, value in enumerate(self.table):
            if mask & smask == smask:
                total = total + value
        return total

    def all_ones_parameterization(self) -> dict[frozenset[VariableId], Scalar]:
        """All Pr[every variable of S = +1] values, one per subset S."""
        out: dict[frozenset[VariableId], Scalar] = {}
        for size in range(len(self.variables) + 1):
            for combo in combinations(self.variables, size):
                out[frozenset(combo)] = self.prob_all_plus(combo)
        return out

    @property
    def is_exact(self) -> bool:
        return not self.table or self.table[0].is_exact

    def __eq__(self, other):
        if not isinstance(other, MarginalSpec):
            return NotImplemented
        return self.variables == other.variables and self.table == other.table

    def __repr__(self):
        names = ",".join(v.name for v in self.variables)
        return f"MarginalSpec({names})"


def full_table(spec: MarginalSpec) -> tuple[Scalar, ...]:
    """The 2^k joint table of a marginal spec (+1 = set bit, msb first)."""
    return spec.table


def _equal_margin_pair(x: VariableId, y: VariableId, both_plus: Scalar) -> MarginalSpec:
    """Pair marginal with equiprobable one-variable marginals and the given
    Pr[both = +1]; its joint table is (v, 1/2-v, 1/2-v, v)."""
    half = Scalar(Fraction(1, 2)) if both_plus.is_exact else Scalar.approximate(0.5)
    off = half - both_plus
    return MarginalSpec((x, y), (both_plus, off, off, both_plus))


def connection_marginals(eps: ConnectionVector) -> list[MarginalSpec]:
    """The four pair marginals imposed by a connection vector.

    Each pair has equiprobable one-variable marginals and
    Pr[both = +1] = 1/2 - e for its component e.
    """
    half = Scalar(Fraction(1, 2)) if eps.is_exact else Scalar.approximate(0.5)
    pairs = [
        ((VariableId.A11, VariableId.A12), eps.a1),
        ((VariableId.A21, VariableId.A22), eps.a2),
        ((VariableId.B11, VariableId.B21), eps.b1),
        ((VariableId.B12, VariableId.B22), eps.b2),
    ]
    return [_equal_margin_pair(x, y, half - e) for (x, y), e in pairs]


def outcome_marginals(p: OutcomeVector) -> list[MarginalSpec]:
    """The four observable pair marginals of an outcome vector."""
    pairs = [
        ((VariableId.A11, VariableId.B11), p.p11),
        ((VariableId.A12, VariableId.B12), p.p12),
        ((VariableId.A21, VariableId.B21), p.p21),
        ((VariableId.A22, VariableId.B22), p.p22),
    ]
    return [_equal_margin_pair(x, y, pij) for (x, y), pij in pairs]


# -- JSON wire format ----------------------------------------------------------


def _subset_key(subset: Iterable[VariableId]) -> str:
    return ",".join(v.name for v in sorted(subset))


def marginal_spec_to_json(spec: MarginalSpec) -> dict:
    return {
        "variables": [v.name for v in spec.variables],
        "prob_all_plus": {
            _subset_key(s): str(v) for s, v in sorted(
                spec.all_ones_parameterization().items(),
                key=lambda kv: (len(kv[0]), sorted(kv[0])),
            )
        },
    }


def marginal_spec_from_json(data: Mapping) -> MarginalSpec:
    """Accepts either the prob_all_plus form or a full table form."""
    if "variables" not in data:
        raise ValueError("marginal spec needs a 'variables' list")
    variables = tuple(VariableId.from_name(n) for n in data["variables"])
    if "prob_all_plus" in data:
        probs = {}
        for key, text in data["prob_all_plus"].items():
            names = [n for n in key.split(",") if n.strip()]
            subset = frozenset(VariableId.from_name(n) for n in names)
            probs[subset] = as_scalar(text)
        return MarginalSpec.from_prob_all_plus(variables, probs)
    if "table" in data:
        return MarginalSpec(variables, tuple(as_scalar(t) for t in data["table"]))
    raise ValueError("marginal spec needs 'prob_all_plus' or 'table'")


def marginal_specs_from_json(data) -> list[MarginalSpec]:
    if isinstance(data, Mapping):
        data = data.get("marginals", data)
    if isinstance(data, Mapping):
        raise ValueError("expected a list of marginal specs or {'marginals': [...]}")
    return [marginal_spec_from_json(item) for item in data]
