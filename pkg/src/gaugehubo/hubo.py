"""High-order binary polynomials over ±1 spins.

An instance is a sparse multilinear polynomial

    H(s) = sum_T  c_T * prod_{i in T} s_i,        s in {-1, +1}^n,

stored in canonical form: variable sets are sorted and duplicate-free,
terms with equal variable sets are merged, zero coefficients are dropped.
Each term additionally remembers the order in which its variables were
written when the instance was constructed or parsed; that order is the
cyclic arrangement of the term's edges used by the graph-mapping module
and is irrelevant to evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, ParseError, SizeGuardError

BRUTE_FORCE_MAX_VARS = 24


@dataclass(frozen=True)
class Term:
    """One monomial: coefficient times the product of the listed spins.

    ``variables`` is the canonical sorted tuple; ``rotation`` holds the
    same indices in their original written order.
    """

    coefficient: float
    variables: tuple[int, ...]
    rotation: tuple[int, ...]

    def __post_init__(self):
        if not self.variables:
            raise ValueError("term has no variables")
        if tuple(sorted(set(self.variables))) != self.variables:
            raise ValueError(f"variables not sorted/unique: {self.variables}")
        if tuple(sorted(self.rotation)) != self.variables:
            raise ValueError("rotation must be a permutation of variables")


@dataclass(frozen=True)
class HuboPolynomial:
    """Canonicalized multilinear polynomial over ±1 spins."""

    n_vars: int
    terms: tuple[Term, ...]

    def __post_init__(self):
        if self.n_vars <= 0:
            raise ValueError(f"n_vars must be positive, got {self.n_vars}")
        seen: set[tuple[int, ...]] = set()
        for t in self.terms:
            if t.variables[-1] >= self.n_vars:
                raise ValueError(
                    f"variable {t.variables[-1]} out of range [0, {self.n_vars})"
                )
            if t.variables in seen:
                raise ValueError(f"duplicate term {t.variables}")
            seen.add(t.variables)

    @classmethod
    def from_terms(
        cls, n_vars: int, terms: Iterable[tuple[float, Sequence[int]]]
    ) -> "HuboPolynomial":
        """Build from (coefficient, variable indices) pairs.

        Duplicate variable sets are merged by coefficient addition; the
        first occurrence fixes the written order. Exact zero coefficients
        are dropped after merging.
        """
        coeffs: dict[tuple[int, ...], float] = {}
        rotations: dict[tuple[int, ...], tuple[int, ...]] = {}
        order: list[tuple[int, ...]] = []
        for coeff, vs in terms:
            rot = tuple(int(v) for v in vs)
            key = tuple(sorted(rot))
            if len(set(key)) != len(key):
                raise ValueError(f"term {rot} repeats a variable")
            if key not in coeffs:
                coeffs[key] = 0.0
                rotations[key] = rot
                order.append(key)
            coeffs[key] += float(coeff)
        kept = tuple(
            Term(coeffs[k], k, rotations[k]) for k in order if coeffs[k] != 0.0
        )
        return cls(n_vars=n_vars, terms=kept)

    @property
    def degree(self) -> int:
        return max((len(t.variables) for t in self.terms), default=0)

    def variable_sets(self) -> tuple[tuple[int, ...], ...]:
        return tuple(t.variables for t in self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HuboPolynomial):
            return NotImplemented
        mine = {t.variables: t.coefficient for t in self.terms}
        theirs = {t.variables: t.coefficient for t in other.terms}
        return self.n_vars == other.n_vars and mine == theirs

    def __hash__(self):
        return hash((self.n_vars, frozenset((t.variables, t.coefficient) for t in self.terms)))


def as_spins(values: Sequence[int] | np.ndarray, n_vars: int | None = None) -> np.ndarray:
    """Validate and return a ±1 spin configuration as an int8 array."""
    s = np.asarray(values)
    if s.ndim != 1:
        raise DimensionError(f"spin configuration must be 1-D, got shape {s.shape}")
    if n_vars is not None and s.shape[0] != n_vars:
        raise DimensionError(f"expected {n_vars} spins, got {s.shape[0]}")
    out = s.astype(np.int8, copy=True)
    if not np.all((out == 1) | (out == -1)) or not np.array_equal(out, s):
        raise ValueError("spins must be exactly -1 or +1")
    return out


def _flat_index(poly: HuboPolynomial) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """CSR-style (pointers, flat variable indices, coefficients)."""
    ptr = np.zeros(len(poly.terms) + 1, dtype=np.int64)
    for i, t in enumerate(poly.terms):
        ptr[i + 1] = ptr[i] + len(t.variables)
    idx = np.fromiter(
        (v for t in poly.terms for v in t.variables), dtype=np.int64, count=int(ptr[-1])
    )
    coeffs = np.array([t.coefficient for t in poly.terms], dtype=np.float64)
    return ptr, idx, coeffs


def evaluate(poly: HuboPolynomial, spins: Sequence[int] | np.ndarray) -> float:
    """Energy of a ±1 configuration: sum over terms of c_T * prod s_i."""
    s = as_spins(spins, poly.n_vars)
    if not poly.terms:
        return 0.0
    ptr, idx, coeffs = _flat_index(poly)
    prods = np.multiply.reduceat(s[idx].astype(np.float64), ptr[:-1])
    return float(coeffs @ prods)


def spins_from_bits(code: int, n_vars: int) -> np.ndarray:
    """Decode an integer: bit i == 0 means s_i = +1, bit i == 1 means -1."""
    bits = (code >> np.arange(n_vars, dtype=np.int64)) & 1
    return (1 - 2 * bits).astype(np.int8)


def brute_force_minimum(poly: HuboPolynomial) -> tuple[float, np.ndarray]:
    """Exhaustive minimum over all 2^n configurations.

    Ties break to the lowest binary encoding (bit 0 <-> s_i = +1), so the
    all-up configuration wins any tie it participates in.
    """
    n = poly.n_vars
    if n > BRUTE_FORCE_MAX_VARS:
        raise SizeGuardError(
            f"brute force limited to {BRUTE_FORCE_MAX_VARS} variables, got {n}"
        )
    masks = np.array(
        [sum(1 << v for v in t.variables) for t in poly.terms], dtype=np.uint32
    )
    coeffs = np.array([t.coefficient for t in poly.terms], dtype=np.float64)
    best_energy = np.inf
    best_code = 0
    chunk = 1 << 18
    for start in range(0, 1 << n, chunk):
        codes = np.arange(start, min(start + chunk, 1 << n), dtype=np.uint32)
        energies = np.zeros(codes.shape[0])
        for m, c in zip(masks, coeffs):
            parity = np.bitwise_count(codes & m) & 1
            energies += c * (1.0 - 2.0 * parity)
        k = int(np.argmin(energies))  # first occurrence = lowest code
        if energies[k] < best_energy:
            best_energy = float(energies[k])
            best_code = int(codes[k])
    return best_energy, spins_from_bits(best_code, n)


# ----------------------------------------------------------------------
# Instance text format:
#   - '#' starts a comment, blank lines ignored
#   - first payload line:  vars <n>
#   - term lines:          <coefficient> <i1> <i2> ... <ik>   (1-based)
# ----------------------------------------------------------------------

def parse_instance(text: str) -> HuboPolynomial:
    n_vars = None
    raw_terms: list[tuple[float, list[int]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if n_vars is None:
            if fields[0] != "vars" or len(fields) != 2:
                raise ParseError(f"expected 'vars <n>', got {line!r}", lineno)
            try:
                n_vars = int(fields[1])
            except ValueError:
                raise ParseError(f"bad variable count {fields[1]!r}", lineno) from None
            if n_vars <= 0:
                raise ParseError(f"variable count must be positive, got {n_vars}", lineno)
            continue
        if len(fields) < 2:
            raise ParseError("term line needs a coefficient and at least one index", lineno)
        try:
            coeff = float(fields[0])
            indices = [int(f) for f in fields[1:]]
        except ValueError:
            raise ParseError(f"malformed term line {line!r}", lineno) from None
        if any(i < 1 or i > n_vars for i in indices):
            raise ParseError(
                f"variable index out of range 1..{n_vars}: {indices}", lineno
            )
        if len(set(indices)) != len(indices):
            raise ParseError(f"repeated variable in term {indices}", lineno)
        raw_terms.append((coeff, [i - 1 for i in indices]))
    if n_vars is None:
        raise ParseError("missing 'vars <n>' header")
    return HuboPolynomial.from_terms(n_vars, raw_terms)


def serialize_instance(poly: HuboPolynomial) -> str:
    lines = [f"vars {poly.n_vars}"]
    for t in poly.terms:
        indices = " ".join(str(v + 1) for v in t.rotation)
        lines.append(f"{t.coefficient!r} {indices}")
    return "\n".join(lines) + "\n"
