"""Birth-death chains and bidiagonal factors as coefficient sequences.

A chain is the coefficient triple (a_n, b_n, c_n) of an irreducible
tridiagonal stochastic matrix; factors are the coefficient pairs of
stochastic bidiagonal matrices.  Sequences are either generator-backed
(a closure evaluating a closed form at any index) or array-backed
(finite user data).  All operations take an explicit working depth:
the matrices are infinite and truncation must be caller-visible.

Arithmetic is type-generic: coefficient functions returning
`fractions.Fraction` keep every derived quantity exact.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class BirthDeathChain:
    """Coefficients (a_n, b_n, c_n) of a birth-death transition matrix.

    ``row(n)`` returns the triple at index n.  The entry c_0 does not
    exist in the matrix (there is no state -1); ``row(0)`` reports it
    as 0 so that row sums are uniform.
    """

    row_fn: Callable[[int], tuple]
    description: str = ""
    meta: Optional[dict] = None

    def row(self, n: int) -> tuple:
        a, b, c = self.row_fn(n)
        if n == 0:
            return (a, b, 0 * a)
        return (a, b, c)

    def a(self, n: int):
        return self.row(n)[0]

    def b(self, n: int):
        return self.row(n)[1]

    def c(self, n: int):
        return self.row(n)[2]

    @classmethod
    def from_arrays(cls, a: Sequence, b: Sequence, c: Sequence,
                    description: str = "") -> "BirthDeathChain":
        """Array-backed chain. c[0] is ignored and may be 0 or absent."""
        a = list(a)
        b = list(b)
        c = list(c)
        if len(c) == len(a) - 1:
            c = [0.0] + c

        def row(n):
            return (a[n], b[n], c[n])

        return cls(row, description=description,
                   meta={"a": a, "b": b, "c": c})


@dataclass(frozen=True)
class UpperBidiagonal:
    """Pure-birth factor: diagonal y_n, superdiagonal x_n (rows sum to 1)."""

    row_fn: Callable[[int], tuple]  # n -> (y_n, x_n)
    description: str = ""

    def pair(self, n: int) -> tuple:
        return self.row_fn(n)

    def y(self, n: int):
        return self.row_fn(n)[0]

    def x(self, n: int):
        return self.row_fn(n)[1]

    @classmethod
    def from_arrays(cls, y: Sequence, x: Sequence, description: str = "") -> "UpperBidiagonal":
        y = list(y)
        x = list(x)
        return cls(lambda n: (y[n], x[n]), description=description)


@dataclass(frozen=True)
class LowerBidiagonal:
    """Pure-death factor: diagonal s_n, subdiagonal r_n; r_0 is 0."""

    row_fn: Callable[[int], tuple]  # n -> (s_n, r_n)
    description: str = ""

    def pair(self, n: int) -> tuple:
        s, r = self.row_fn(n)
        if n == 0:
            return (s, 0 * s)
        return (s, r)

    def s(self, n: int):
        return self.pair(n)[0]

    def r(self, n: int):
        return self.pair(n)[1]

    @classmethod
    def from_arrays(cls, s: Sequence, r: Sequence, description: str = "") -> "LowerBidiagonal":
        s = list(s)
        r = list(r)
        return cls(lambda n: (s[n], r[n]), description=description)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    first_violation_index: Optional[int]
    max_row_sum_error: float
    messages: list = field(default_factory=list)


def validate_chain(chain: BirthDeathChain, depth: int, tol: float = 1e-12) -> ValidationReport:
    """Check row sums and strict interior bounds for indices 0..depth.

    Row sums are tested within ``tol``; irreducibility bounds
    (0 < a_n < 1, 0 < c_n < 1 for n >= 1, b_n >= 0) are strict.
    Violations are reported, never raised.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    messages = []
    first_bad = None
    max_err = 0.0
    for n in range(depth + 1):
        a, b, c = chain.row(n)
        err = abs(float(a + b + c) - 1.0)
        max_err = max(max_err, err)
        bad = []
        if err > tol:
            bad.append(f"row sum off by {err:.3e}")
        if not (0 < a < 1):
            bad.append(f"a_{n} = {a} not in (0,1)")
        if b < 0:
            bad.append(f"b_{n} = {b} negative")
        if n >= 1 and not (0 < c < 1):
            bad.append(f"c_{n} = {c} not in (0,1)")
        if bad and first_bad is None:
            first_bad = n
            messages.extend(bad)
    return ValidationReport(ok=first_bad is None,
                            first_violation_index=first_bad,
                            max_row_sum_error=max_err,
                            messages=messages)


def multiply_ul(upper: UpperBidiagonal, lower: LowerBidiagonal, depth: int) -> BirthDeathChain:
    """Band product of an upper factor times a lower factor.

    Row n of the product is
    a_n = x_n s_{n+1},  b_n = x_n r_{n+1} + y_n s_n,  c_n = y_n r_n,
    so the factors must be defined up to index depth.
    """
    rows = []
    for n in range(depth):
        y_n, x_n = upper.pair(n)
        s_n, r_n = lower.pair(n)
        s_n1, r_n1 = lower.pair(n + 1)
        rows.append((x_n * s_n1, x_n * r_n1 + y_n * s_n, y_n * r_n))
    return BirthDeathChain(lambda n: rows[n], description="UL product")


def multiply_lu(lower: LowerBidiagonal, upper: UpperBidiagonal, depth: int) -> BirthDeathChain:
    """Band product of a lower factor times an upper factor.

    a_n = s_n x_n,  b_n = r_n x_{n-1} + s_n y_n,  c_n = r_n y_{n-1}.
    """
    rows = []
    for n in range(depth):
        s_n, r_n = lower.pair(n)
        y_n, x_n = upper.pair(n)
        if n == 0:
            rows.append((s_n * x_n, s_n * y_n, 0 * s_n))
        else:
            y_p, x_p = upper.pair(n - 1)
            rows.append((s_n * x_n, r_n * x_p + s_n * y_n, r_n * y_p))
    return BirthDeathChain(lambda n: rows[n], description="LU product")


def truncate_dense(chain: BirthDeathChain, depth: int) -> np.ndarray:
    """Leading depth x depth principal submatrix of the transition matrix.

    The last row keeps only its in-range entries, so boundary rows sum
    to less than 1: probability mass leaks at the truncation edge.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    P = np.zeros((depth, depth))
    for n in range(depth):
        a, b, c = (float(v) for v in chain.row(n))
        P[n, n] = b
        if n + 1 < depth:
            P[n, n + 1] = a
        if n >= 1:
            P[n, n - 1] = c
    return P


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

# kind -> constructor(params_dict) -> BirthDeathChain; populated by models.
CHAIN_KINDS: dict = {}


def register_chain_kind(kind: str, builder: Callable[[dict], BirthDeathChain]) -> None:
    CHAIN_KINDS[kind] = builder


def chain_to_json(chain: BirthDeathChain, depth: Optional[int] = None) -> dict:
    """JSON form: {"kind", "params"} when generator-backed, arrays otherwise."""
    if chain.meta is not None and "kind" in chain.meta:
        return {"kind": chain.meta["kind"], "params": dict(chain.meta["params"])}
    if depth is None:
        if chain.meta is not None and "a" in chain.meta:
            return {"a": [float(v) for v in chain.meta["a"]],
                    "b": [float(v) for v in chain.meta["b"]],
                    "c": [float(v) for v in chain.meta["c"]]}
        raise ValueError("depth required to serialize a generator-backed chain as arrays")
    rows = [chain.row(n) for n in range(depth)]
    return {"a": [float(r[0]) for r in rows],
            "b": [float(r[1]) for r in rows],
            "c": [float(r[2]) for r in rows]}


def chain_from_json(data) -> BirthDeathChain:
    if isinstance(data, str):
        data = json.loads(data)
    if "kind" in data:
        kind = data["kind"]
        if kind not in CHAIN_KINDS:
            raise ValueError(f"unknown chain kind {kind!r}")
        return CHAIN_KINDS[kind](data.get("params", {}))
    return BirthDeathChain.from_arrays(data["a"], data["b"], data["c"])


def chain_to_csv(chain: BirthDeathChain, depth: int) -> str:
    """One row per index with columns n,a,b,c."""
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["n", "a", "b", "c"])
    for n in range(depth):
        a, b, c = chain.row(n)
        w.writerow([n, repr(float(a)), repr(float(b)), repr(float(c))])
    return buf.getvalue()


def factors_to_csv(upper: UpperBidiagonal, lower: LowerBidiagonal, depth: int) -> str:
    """Columns n,x,y,s,r for a UL factor pair."""
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["n", "x", "y", "s", "r"])
    for n in range(depth):
        y, x = upper.pair(n)
        s, r = lower.pair(n)
        w.writerow([n, repr(float(x)), repr(float(y)), repr(float(s)), repr(float(r))])
    return buf.getvalue()


def factors_from_csv(text: str) -> tuple:
    """Inverse of :func:`factors_to_csv`."""
    rows = list(csv.DictReader(io.StringIO(text)))
    xs = [float(r["x"]) for r in rows]
    ys = [float(r["y"]) for r in rows]
    ss = [float(r["s"]) for r in rows]
    rs = [float(r["r"]) for r in rows]
    return (UpperBidiagonal.from_arrays(ys, xs), LowerBidiagonal.from_arrays(ss, rs))
