"""Closed-form chain families and their factor formulas.

Two families: constant transition probabilities (with the special
a = c = 1/4 and a = 1/9, c = 4/9 cases where every factor coefficient
has a closed form) and the chain whose three-term recurrence generates
the Jacobi orthogonal polynomials normalized to 1 at x = 1.

Every constructor is arithmetic-generic: pass `fractions.Fraction`
parameters and all coefficients come out exact, which is the strongest
possible oracle against the generic recurrence factorizer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .chains import (BirthDeathChain, LowerBidiagonal, UpperBidiagonal,
                     register_chain_kind)
from .contfrac import ChainSequence
from .errors import DomainError
from .factorize import LUFactors, ULFactors


def pochhammer(q, n: int):
    """Rising factorial (q)_n; (q)_0 = 1 and (q)_{-1} = 1/(q - 1)."""
    if n == -1:
        return 1 / (q - 1)
    if n < -1:
        raise ValueError("pochhammer defined here for n >= -1 only")
    out = q ** 0  # 1 in the argument's arithmetic type
    for i in range(n):
        out = out * (q + i)
    return out


def factorial(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


# ---------------------------------------------------------------------------
# Constant transition probabilities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantChainParams:
    """Interior rows (c, b, a); row zero is (1 - a0, a0).

    ``k`` is the optional urn parameter of the a = c = 1/4 family,
    selecting the free parameter y0 = 1 - k*a0.
    """

    a0: object
    a: object
    b: object
    c: object
    k: Optional[int] = None

    def __post_init__(self):
        if abs(float(self.a + self.b + self.c) - 1.0) > 1e-12:
            raise DomainError("a + b + c must equal 1")
        if not (0 < float(self.a0) < 1):
            raise DomainError("a0 must lie in (0, 1)")
        for name in ("a", "c"):
            v = float(getattr(self, name))
            if not (0 < v < 1):
                raise DomainError(f"{name} must lie in (0, 1)")
        if float(self.b) < 0:
            raise DomainError("b must be nonnegative")
        if self.k is not None:
            if self.k < 2:
                raise DomainError("k must be an integer >= 2")
            if float(self.k * self.a0) > 1.0 + 1e-12:
                raise DomainError("k*a0 must not exceed 1")

    @property
    def y0_from_k(self):
        if self.k is None:
            raise ValueError("no k set on these parameters")
        return 1 - self.k * self.a0


def constant_chain(p: ConstantChainParams) -> BirthDeathChain:
    """Chain with constant interior coefficients."""

    def row(n):
        if n == 0:
            return (p.a0, 1 - p.a0, 0 * p.a0)
        return (p.a, p.b, p.c)

    meta = {"kind": "constant",
            "params": {"a0": float(p.a0), "a": float(p.a), "b": float(p.b),
                       "c": float(p.c)}}
    if p.k is not None:
        meta["params"]["k"] = p.k
    return BirthDeathChain(row, description=f"constant(a0={p.a0}, a={p.a}, b={p.b}, c={p.c})",
                           meta=meta)


def _require_quarter_family(p: ConstantChainParams):
    if abs(float(p.a) - 0.25) > 1e-14 or abs(float(p.c) - 0.25) > 1e-14:
        raise DomainError("closed form only valid for the a = c = 1/4 family")


def constant_ul_closed_form(p: ConstantChainParams, y0, s0=1) -> ULFactors:
    """Closed-form up/down factors of the a = c = 1/4 family.

    With d = 1 - y0 - 2 a0,
      y_n = (2 a0 + (2n-1) d) / (4 a0 + 4 n d),
      s_n = (a0 + (n-1) d) / (2 a0 + (2n-1) d),     n >= 1.
    y0 = 1 - k a0 makes every coefficient independent of a0.
    """
    _require_quarter_family(p)
    a0 = p.a0
    d = 1 - y0 - 2 * a0

    def upper(n):
        if n == 0:
            return (y0, 1 - y0)
        y = (2 * a0 + (2 * n - 1) * d) / (4 * a0 + 4 * n * d)
        return (y, 1 - y)

    def lower(n):
        if n == 0:
            return (s0, 0 * a0)
        s = (a0 + (n - 1) * d) / (2 * a0 + (2 * n - 1) * d)
        return (s, 1 - s)

    return ULFactors(upper=UpperBidiagonal(upper, "constant family, closed form"),
                     lower=LowerBidiagonal(lower, "constant family, closed form"),
                     y0=y0, s0=s0)


def constant_lu_closed_form(p: ConstantChainParams) -> LUFactors:
    """Closed-form down/up factors of the a = c = 1/4 family.

    With d = 1 - 2 a0,
      x~_n = (a0 + n d) / (2 a0 + (2n+1) d),        n >= 0,
      r~_n = (2 a0 + (2n-1) d) / (4 a0 + 4 n d),    n >= 1.
    The x~ denominator carries (2n+1), not 2n: that is what the seed
    x~_0 = a0 and the product identity force, as the band-product
    oracle confirms.
    """
    _require_quarter_family(p)
    a0 = p.a0
    d = 1 - 2 * a0

    def upper(n):
        x = (a0 + n * d) / (2 * a0 + (2 * n + 1) * d)
        return (1 - x, x)

    def lower(n):
        if n == 0:
            return (1 + 0 * a0, 0 * a0)
        r = (2 * a0 + (2 * n - 1) * d) / (4 * a0 + 4 * n * d)
        return (1 - r, r)

    return LUFactors(lower=LowerBidiagonal(lower, "constant family, closed form"),
                     upper=UpperBidiagonal(upper, "constant family, closed form"))


def constant_case_b_ul(a0, y0, s0=1) -> ULFactors:
    """Closed-form up/down factors for a = 1/9, c = 4/9 (so F = 1/3).

    The even and odd subsequences of y_n follow different formulas;
    s_n follows from s_n = 1/(9 (1 - y_{n-1})) for n >= 2.
    Requires y0 <= 1 - 3 a0.
    """
    d = 1 - y0 - 3 * a0

    def y(n):
        if n == 0:
            return y0
        if n % 2 == 0:
            m = n // 2
            return (6 * a0 + (6 * m - 1) * d) / (9 * a0 + 9 * m * d)
        m = (n + 1) // 2
        return (12 * a0 + (12 * m - 8) * d) / (18 * a0 + 9 * (2 * m - 1) * d)

    def upper(n):
        yn = y(n)
        return (yn, 1 - yn)

    def lower(n):
        if n == 0:
            return (s0, 0 * a0)
        if n == 1:
            s = a0 / (1 - y0)
        else:
            s = 1 / (9 * (1 - y(n - 1)))
        return (s, 1 - s)

    return ULFactors(upper=UpperBidiagonal(upper, "a=1/9 c=4/9, closed form"),
                     lower=LowerBidiagonal(lower, "a=1/9 c=4/9, closed form"),
                     y0=y0, s0=s0)


# ---------------------------------------------------------------------------
# Jacobi family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JacobiParams:
    """Parameters alpha, beta > -1 plus the reparameterized free parameter.

    h0 in [0, 1] scales the admissible interval: y0 = h0 * alpha/(alpha+beta+1).
    """

    alpha: object
    beta: object
    h0: Optional[object] = None

    def __post_init__(self):
        if float(self.alpha) <= -1 or float(self.beta) <= -1:
            raise DomainError("alpha and beta must exceed -1")
        if self.h0 is not None and not (0 <= float(self.h0) <= 1):
            raise DomainError("h0 must lie in [0, 1]")

    @property
    def y0(self):
        if self.h0 is None:
            raise ValueError("no h0 set on these parameters")
        return self.h0 * self.alpha / (self.alpha + self.beta + 1)


def jacobi_chain(p: JacobiParams) -> BirthDeathChain:
    """Chain of the three-term recurrence of the unit-normalized Jacobi family."""
    al, be = p.alpha, p.beta

    def row(n):
        a = (n + be + 1) * (n + 1 + al + be) / ((2 * n + al + be + 1) * (2 * n + 2 + al + be))
        if n == 0:
            return (a, 1 - a, 0 * a)
        c = n * (n + al) / ((2 * n + al + be + 1) * (2 * n + al + be))
        b = ((n + be + 1) * (n + 1) / ((2 * n + al + be + 1) * (2 * n + 2 + al + be))
             + (n + al) * (n + al + be) / ((2 * n + al + be + 1) * (2 * n + al + be)))
        return (a, b, c)

    meta = {"kind": "jacobi", "params": {"alpha": float(al), "beta": float(be)}}
    if p.h0 is not None:
        meta["params"]["h0"] = float(p.h0)
    return BirthDeathChain(row, description=f"jacobi(alpha={al}, beta={be})", meta=meta)


@dataclass(frozen=True)
class JacobiAuxSequences:
    """Auxiliary sequences entering the general-y0 Jacobi factor formulas.

    gamma_n = (alpha+1)_n (alpha+beta+2)_n,
    epsilon_n = (alpha+1)_n (alpha+beta+2)_{n-1},
    alpha*delta_n = n! (beta+1)_{n+1} - (alpha+beta+1) gamma_n,
    alpha*nu_n = n! (beta+1)_n - (alpha+beta+1) epsilon_n.

    delta and nu require alpha != 0.
    """

    alpha: object
    beta: object

    def gamma(self, n: int):
        return pochhammer(self.alpha + 1, n) * pochhammer(self.alpha + self.beta + 2, n)

    def epsilon(self, n: int):
        return pochhammer(self.alpha + 1, n) * pochhammer(self.alpha + self.beta + 2, n - 1)

    def delta(self, n: int):
        if float(self.alpha) == 0:
            raise DomainError("delta_n requires alpha != 0")
        return (factorial(n) * pochhammer(self.beta + 1, n + 1)
                - (self.alpha + self.beta + 1) * self.gamma(n)) / self.alpha

    def nu(self, n: int):
        if float(self.alpha) == 0:
            raise DomainError("nu_n requires alpha != 0")
        return (factorial(n) * pochhammer(self.beta + 1, n)
                - (self.alpha + self.beta + 1) * self.epsilon(n)) / self.alpha


def jacobi_ul_closed_form(p: JacobiParams, s0=1) -> tuple:
    """Closed-form up/down factors of the Jacobi chain for any h0 in [0, 1].

    Each coefficient is a product of two factors in (0, 1).  The
    endpoints h0 = 0 and h0 = 1 collapse to the two simple displays
      h0 = 0:  x_n = (n+a+b+1)/(2n+a+b+1),  s_n = (n+b)/(2n+a+b),
      h0 = 1:  x_n = (n+b+1)/(2n+a+b+1),    s_n = (n+a+b)/(2n+a+b).
    Returns the factor pair together with the auxiliary sequences.
    """
    if p.h0 is None:
        raise ValueError("JacobiParams.h0 must be set for the UL closed form")
    al, be, h0 = p.alpha, p.beta, p.h0
    g = 1 - h0

    # The printed formulas weigh n!(beta+1)_n against (alpha+1)_n(alpha+beta+1)_n,
    # products that overflow floats by n ~ 150.  Dividing both through by the
    # second product leaves the bounded ratio
    #   rho_n = n!(beta+1)_n / ((alpha+1)_n (alpha+beta+1)_n),
    # built up incrementally, with identical values in exact arithmetic.
    one = (al + 1) / (al + 1)
    rho_memo = [one]

    def rho(n):
        while len(rho_memo) <= n:
            k = len(rho_memo)
            rho_memo.append(rho_memo[-1] * (k * (be + k))
                            / ((al + k) * (al + be + k)))
        return rho_memo[n]

    def upper(n):
        if n == 0:
            y = h0 * al / (al + be + 1)
            return (y, 1 - y)
        rh = rho(n)
        x = ((n + al + be + 1) / (2 * n + al + be + 1)
             * (h0 * rh * (n + be + 1) + g * (n + al + be + 1))
             / (h0 * rh * (n + al + be + 1) + g * (n + al + be + 1)))
        y = ((n + al) / (2 * n + al + be + 1)
             * (h0 * rh * (n + al) + g * n)
             / (h0 * rh * (n + al) + g * (n + al)))
        return (y, x)

    def lower(n):
        if n == 0:
            return (s0, 0 * al)
        rh_prev = rho(n) * (n + al) / n   # (n-1)!(beta+1)_n / ((alpha+1)_{n-1}(alpha+beta+1)_n)
        s = ((n + al + be) / (2 * n + al + be)
             * (h0 * rh_prev * (n + al + be) + g * (n + be))
             / (h0 * rh_prev * (n + al + be) + g * (n + al + be)))
        r = ((n + al) / (2 * n + al + be)
             * (h0 * rho(n) + g)
             / (h0 * rh_prev + g))
        return (s, r)

    factors = ULFactors(upper=UpperBidiagonal(upper, f"jacobi({al},{be}) h0={h0}"),
                        lower=LowerBidiagonal(lower, f"jacobi({al},{be}) h0={h0}"),
                        y0=p.y0, s0=s0)
    return factors, JacobiAuxSequences(alpha=al, beta=be)


def jacobi_lu_closed_form(p: JacobiParams) -> LUFactors:
    """Closed-form down/up factors of the Jacobi chain (no free parameter).

    x~_n = (n+b+1)/(2n+a+b+2),  y~_n = (n+a+1)/(2n+a+b+2),
    s~_n = (n+a+b+1)/(2n+a+b+1),  r~_n = n/(2n+a+b+1),  s~_0 = 1.
    """
    al, be = p.alpha, p.beta

    def upper(n):
        den = 2 * n + al + be + 2
        return ((n + al + 1) / den, (n + be + 1) / den)

    def lower(n):
        if n == 0:
            return (1 + 0 * al, 0 * al)
        den = 2 * n + al + be + 1
        return ((n + al + be + 1) / den, n / den)

    return LUFactors(lower=LowerBidiagonal(lower, f"jacobi({al},{be}) LU closed form"),
                     upper=UpperBidiagonal(upper, f"jacobi({al},{be}) LU closed form"))


def jacobi_ul_chain_sequence(alpha, beta) -> ChainSequence:
    """Chain-sequence form of the partial numerators a_0, c_1, a_1, c_2, ...

    m_{2n} = n/(2n+a+b+1) and m_{2n+1} = (n+b+1)/(2n+a+b+2); m_0 = 0, so
    the fraction's value is 1/(1+L).
    """

    def m(j):
        if j % 2 == 0:
            i = j // 2
            return i / (2 * i + alpha + beta + 1)
        i = (j - 1) // 2
        return (i + beta + 1) / (2 * i + alpha + beta + 2)

    return ChainSequence(m0=0.0, m=m)


def jacobi_lu_chain_sequence(alpha, beta) -> ChainSequence:
    """Chain-sequence form of the partial numerators c_1, a_1, c_2, a_2, ...

    m_{2n} = (n+b+1)/(2n+a+b+2) and m_{2n+1} = (n+1)/(2n+a+b+3); here
    m_0 = (b+1)/(a+b+2) is nonzero.
    """

    def m(j):
        if j % 2 == 0:
            i = j // 2
            return (i + beta + 1) / (2 * i + alpha + beta + 2)
        i = (j - 1) // 2
        return (i + 1) / (2 * i + alpha + beta + 3)

    return ChainSequence(m0=(beta + 1) / (alpha + beta + 2), m=m)


def chain_sequence_for(chain: BirthDeathChain, which: str = "ul") -> Optional[ChainSequence]:
    """Chain-sequence representation for a known family, else None."""
    if chain.meta is None or chain.meta.get("kind") != "jacobi":
        return None
    prm = chain.meta["params"]
    if which == "ul":
        return jacobi_ul_chain_sequence(prm["alpha"], prm["beta"])
    return jacobi_lu_chain_sequence(prm["alpha"], prm["beta"])


# ---------------------------------------------------------------------------
# JSON registry hooks
# ---------------------------------------------------------------------------

def _constant_from_params(params: dict) -> BirthDeathChain:
    return constant_chain(ConstantChainParams(a0=params["a0"], a=params["a"],
                                              b=params["b"], c=params["c"],
                                              k=params.get("k")))


def _jacobi_from_params(params: dict) -> BirthDeathChain:
    return jacobi_chain(JacobiParams(alpha=params["alpha"], beta=params["beta"],
                                     h0=params.get("h0")))


register_chain_kind("constant", _constant_from_params)
register_chain_kind("jacobi", _jacobi_from_params)
