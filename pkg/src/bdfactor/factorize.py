"""Stochastic factorization of birth-death chains and Darboux transforms.

The up/down factorization carries one free parameter, admissible on the
closed interval [0, H] with H a continued fraction; the down/up
factorization has no freedom and instead requires a_0 <= H~.  Swapping
the factor order produces a new stochastic chain in either case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .chains import BirthDeathChain, LowerBidiagonal, UpperBidiagonal
from .contfrac import (ChainSequence, ContinuedFractionEvaluation, evaluate_H,
                       evaluate_H_tilde)
from .errors import (AdmissibilityViolation, Inconclusive, NotFactorizable,
                     NumericBreakdown)


@dataclass(frozen=True)
class ULFactors:
    """Up/down factor pair with the free parameter it was built from.

    ``s0`` is meaningful only when y0 = 0, where the lower factor's
    first diagonal entry is itself free in [0, 1].  ``boundary`` marks
    a y0 within the numerical guard band of the admissibility bound.
    """

    upper: UpperBidiagonal
    lower: LowerBidiagonal
    y0: object
    s0: object = 1.0
    boundary: bool = False


@dataclass(frozen=True)
class LUFactors:
    lower: LowerBidiagonal
    upper: UpperBidiagonal


@dataclass(frozen=True)
class AdmissibleRange:
    """Closed interval [0, hi] of admissible free parameters."""

    lo: float
    hi: float
    evaluation: ContinuedFractionEvaluation


def y0_admissible_range(chain: BirthDeathChain, tol: float = 1e-12,
                        max_terms: int = 10_000,
                        chain_sequence: Optional[ChainSequence] = None) -> AdmissibleRange:
    """Interval of free parameters giving an all-stochastic factor pair.

    Raises :class:`NotFactorizable` when the convergent dominance
    condition fails (no parameter works) and :class:`Inconclusive` when
    the continued fraction cannot be resolved within ``max_terms``.
    """
    ev = evaluate_H(chain, tol=tol, max_terms=max_terms, chain_sequence=chain_sequence)
    if not ev.dominance_ok:
        raise NotFactorizable(
            f"convergent dominance fails at index {ev.dominance_violation_index}")
    if not ev.converged:
        raise Inconclusive(f"H not resolved within {max_terms} convergents")
    return AdmissibleRange(lo=0.0, hi=ev.value, evaluation=ev)


def _wrap_precision(value, precision_bits):
    if precision_bits is None:
        return value
    import mpmath
    return mpmath.mpf(value)


def ul_factorize(chain: BirthDeathChain, y0, s0=1, depth: int = 1000,
                 tol: float = 1e-9, force: bool = False,
                 precision_bits: Optional[int] = None,
                 h_value: Optional[float] = None) -> ULFactors:
    """Up/down factors from the alternating recurrence.

    s_{n+1} = a_n / (1 - y_n) and y_{n+1} = c_{n+1} / (1 - s_{n+1}),
    with x_n = 1 - y_n and r_n = 1 - s_n.  Any coefficient leaving
    [0, 1] by more than ``tol`` raises :class:`AdmissibilityViolation`
    at its index (the signature of y0 beyond the admissible bound)
    unless ``force`` is set; a vanishing denominator raises
    :class:`NumericBreakdown`.

    ``s0`` is only free when y0 = 0; positive y0 forces s0 = 1.  Pass
    ``h_value`` (a computed admissibility bound) to get boundary
    flagging when y0 sits within 10*tol of it.  ``precision_bits``
    switches the recurrence to extended precision for deep indices.
    """
    y0f = float(y0)
    if not (0 <= y0f < 1):
        raise AdmissibilityViolation(0, y0, name="y0")
    if y0f > 0 and float(s0) != 1:
        raise ValueError("s0 is only a free parameter when y0 = 0")
    if not (0 <= float(s0) <= 1):
        raise ValueError("s0 must lie in [0, 1]")

    if precision_bits is not None:
        import mpmath
        ctx = mpmath.mp
        with ctx.workprec(precision_bits):
            return _ul_recurrence(chain, _wrap_precision(y0, precision_bits),
                                  _wrap_precision(s0, precision_bits), depth, tol,
                                  force, h_value, convert=ctx.mpf)
    return _ul_recurrence(chain, y0, s0, depth, tol, force, h_value, convert=None)


def _ul_recurrence(chain, y0, s0, depth, tol, force, h_value, convert):
    ys = [y0]
    ss = [s0]
    violation = None
    for n in range(depth):
        a_n = chain.a(n)
        c_n1 = chain.c(n + 1)
        if convert is not None:
            a_n, c_n1 = convert(a_n), convert(c_n1)
        den = 1 - ys[n]
        if abs(float(den)) < 1e-300:
            raise NumericBreakdown(n, den)
        s = a_n / den
        if violation is None and not (-tol <= float(s) <= 1 + tol):
            violation = AdmissibilityViolation(n + 1, float(s), name="s")
        den = 1 - s
        if abs(float(den)) < 1e-300:
            raise NumericBreakdown(n + 1, den)
        y = c_n1 / den
        if violation is None and not (-tol <= float(y) <= 1 + tol):
            violation = AdmissibilityViolation(n + 1, float(y), name="y")
        ss.append(s)
        ys.append(y)
        if violation is not None and not force:
            raise violation

    boundary = h_value is not None and abs(float(y0) - h_value) < 10 * tol
    upper = UpperBidiagonal(lambda n: (ys[n], 1 - ys[n]), "UL recurrence")
    lower = LowerBidiagonal(lambda n: (ss[n], 1 - ss[n]), "UL recurrence")
    return ULFactors(upper=upper, lower=lower, y0=y0, s0=s0, boundary=boundary)


def lu_factorize(chain: BirthDeathChain, depth: int = 1000, tol: float = 1e-9,
                 force: bool = False, precision_bits: Optional[int] = None,
                 check_admissible: bool = True,
                 chain_sequence: Optional[ChainSequence] = None) -> LUFactors:
    """Down/up factors; unique, no free parameter.

    Seeds r~_0 = 0, x~_0 = a_0, then
    r~_{n+1} = c_{n+1} / (1 - x~_n) and x~_{n+1} = a_{n+1} / (1 - r~_{n+1}).
    Requires a_0 <= H~; with ``check_admissible`` the bound is evaluated
    first and a conclusive excess raises :class:`NotFactorizable`.  The
    recurrence itself still detects any violation index by index.
    """
    if check_admissible and not force:
        ev = evaluate_H_tilde(chain, chain_sequence=chain_sequence)
        if not ev.dominance_ok:
            raise NotFactorizable(
                f"convergent dominance fails at index {ev.dominance_violation_index}")
        if ev.converged and float(chain.a(0)) > ev.value + 10 * tol:
            raise NotFactorizable(f"a_0 = {float(chain.a(0))} exceeds H~ = {ev.value}")

    if precision_bits is not None:
        import mpmath
        ctx = mpmath.mp
        with ctx.workprec(precision_bits):
            return _lu_recurrence(chain, depth, tol, force, convert=ctx.mpf)
    return _lu_recurrence(chain, depth, tol, force, convert=None)


def _lu_recurrence(chain, depth, tol, force, convert):
    a0 = chain.a(0)
    if convert is not None:
        a0 = convert(a0)
    xs = [a0]
    rs = [0 * a0]
    violation = None
    for n in range(depth):
        c_n1 = chain.c(n + 1)
        a_n1 = chain.a(n + 1)
        if convert is not None:
            c_n1, a_n1 = convert(c_n1), convert(a_n1)
        den = 1 - xs[n]
        if abs(float(den)) < 1e-300:
            raise NumericBreakdown(n, den)
        r = c_n1 / den
        if violation is None and not (-tol <= float(r) <= 1 + tol):
            violation = AdmissibilityViolation(n + 1, float(r), name="r~")
        den = 1 - r
        if abs(float(den)) < 1e-300:
            raise NumericBreakdown(n + 1, den)
        x = a_n1 / den
        if violation is None and not (-tol <= float(x) <= 1 + tol):
            violation = AdmissibilityViolation(n + 1, float(x), name="x~")
        rs.append(r)
        xs.append(x)
        if violation is not None and not force:
            raise violation

    upper = UpperBidiagonal(lambda n: (1 - xs[n], xs[n]), "LU recurrence")
    lower = LowerBidiagonal(lambda n: (1 - rs[n], rs[n]), "LU recurrence")
    return LUFactors(lower=lower, upper=upper)


def darboux_ul(f: ULFactors, depth: int) -> BirthDeathChain:
    """Swap the factor order: the down-then-up product.

    a~_n = s_n x_n,  b~_n = r_n x_{n-1} + s_n y_n,  c~_n = r_n y_{n-1}.
    With y0 = 0 the output starts b~_0 = 0, a~_0 = s_0 and has c~_1 = 0.
    """
    rows = []
    for n in range(depth):
        s_n, r_n = f.lower.pair(n)
        y_n, x_n = f.upper.pair(n)
        if n == 0:
            rows.append((s_n * x_n, s_n * y_n, 0 * s_n))
        else:
            y_p, x_p = f.upper.pair(n - 1)
            rows.append((s_n * x_n, r_n * x_p + s_n * y_n, r_n * y_p))
    return BirthDeathChain(lambda n: rows[n], description="Darboux transform (UL factors)")


def darboux_lu(f: LUFactors, depth: int) -> BirthDeathChain:
    """Swap the down/up factor order: the up-then-down product.

    a^_n = x~_n s~_{n+1},  b^_n = x~_n r~_{n+1} + y~_n s~_n,  c^_n = y~_n r~_n.
    """
    rows = []
    for n in range(depth):
        y_n, x_n = f.upper.pair(n)
        s_n, r_n = f.lower.pair(n)
        s_n1, r_n1 = f.lower.pair(n + 1)
        rows.append((x_n * s_n1, x_n * r_n1 + y_n * s_n, y_n * r_n))
    return BirthDeathChain(lambda n: rows[n], description="Darboux transform (LU factors)")
