"""Continued fractions controlling factorization admissibility.

Evaluates the fraction built from the chain's up/down probabilities by
the two-term convergent recurrence, with three routes to the limit:
direct convergence of the convergents, Richardson extrapolation of a
monotone tail (justified only while the dominance condition
0 < A_n < B_n holds, which makes h_n = A_n/B_n strictly decreasing and
bounded), and the chain-sequence closed form when a representation of
the partial numerators is available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

from .chains import BirthDeathChain
from .errors import DomainError, EvaluationError

Partials = Union[Sequence[float], Callable[[int], float]]

# Convergent pairs are rescaled by their common magnitude this often;
# h_n = A_n/B_n is scale invariant but A_n, B_n themselves can drift
# geometrically toward overflow or underflow.
_RESCALE_EVERY = 64


@dataclass(frozen=True)
class ContinuedFractionEvaluation:
    """Result of evaluating one continued fraction.

    ``dominance_ok`` is False when 0 < A_n < B_n failed at some index,
    which callers interpret as "no stochastic factorization".  It is a
    soft flag, not an exception, so numeric failure stays
    distinguishable.
    """

    value: float
    convergents: tuple
    dominance_ok: bool
    converged: bool
    iterations: int
    accelerated: bool = False
    worpitzky_ok: bool = False
    method: str = "direct"
    dominance_violation_index: Optional[int] = None


@dataclass(frozen=True)
class ChainSequence:
    """Partial numerators in the form alpha_n = (1 - m_{n-1}) m_n.

    ``m0`` is the seed value in [0, 1); ``m(n)`` supplies m_n in (0, 1)
    for n >= 1.
    """

    m0: float
    m: Callable[[int], float]


@dataclass(frozen=True)
class ChainSequenceValue:
    C: float
    L: float
    converged: bool
    divergent: bool
    terms: int


def _as_partial_fn(partials: Partials) -> Callable[[int], float]:
    if callable(partials):
        return partials
    seq = list(partials)
    return lambda k: seq[k - 1]


def convergents(partials: Partials, count: int, tol: float = 1e-12) -> ContinuedFractionEvaluation:
    """Convergents h_n = A_n/B_n of 1 - xi_1/(1 - xi_2/(1 - ...)).

    A_n = A_{n-1} - xi_n A_{n-2} with A_{-1} = A_0 = 1, and B likewise
    with B_{-1} = 0, B_0 = 1.  Stops early once successive convergents
    differ by less than ``tol``.  Raises :class:`EvaluationError` if
    some B_n vanishes.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    xi = _as_partial_fn(partials)
    Am2, Am1 = 1.0, 1.0
    Bm2, Bm1 = 0.0, 1.0
    triples = [(1.0, 1.0, 1.0)]
    dominance_ok = True
    violation_at = None
    worpitzky = True
    converged = False
    h_prev = 1.0
    n = 0
    for n in range(1, count + 1):
        x = float(xi(n))
        if not x < 0.25:
            worpitzky = False
        A = Am1 - x * Am2
        B = Bm1 - x * Bm2
        if B == 0.0:
            raise EvaluationError(n)
        h = A / B
        triples.append((A, B, h))
        if dominance_ok and not (0.0 < A < B):
            dominance_ok = False
            violation_at = n
        Am2, Am1 = Am1, A
        Bm2, Bm1 = Bm1, B
        if abs(h - h_prev) < tol:
            converged = True
            h_prev = h
            break
        h_prev = h
        if n % _RESCALE_EVERY == 0:
            scale = max(abs(Am1), abs(Bm1))
            if scale > 0.0:
                Am2, Am1, Bm2, Bm1 = Am2 / scale, Am1 / scale, Bm2 / scale, Bm1 / scale
    return ContinuedFractionEvaluation(
        value=h_prev,
        convergents=tuple(triples),
        dominance_ok=dominance_ok,
        converged=converged,
        iterations=n,
        worpitzky_ok=worpitzky,
        dominance_violation_index=violation_at,
    )


def _richardson(hs: Sequence[float], nmax: int, levels: int = 12,
                min_index: int = 32) -> tuple:
    """Neville extrapolation of h_n to n = infinity in powers of 1/n.

    Anchors at n, n/2, n/4, ... (even indices, to suppress parity
    wobble).  Returns (limit, error_estimate).
    """
    ns = []
    n = nmax - (nmax % 2)
    while len(ns) < levels and n >= min_index:
        ns.append(n)
        n //= 2
        n -= n % 2
    if len(ns) < 3:
        return hs[nmax], math.inf
    xs = [1.0 / v for v in ns]
    row = [hs[v] for v in ns]
    prev = row[-1]
    est = math.inf
    for k in range(1, len(ns)):
        row = [row[j + 1] + (row[j + 1] - row[j]) * xs[j + k] / (xs[j] - xs[j + k])
               for j in range(len(ns) - k)]
        est = abs(row[-1] - prev)
        prev = row[-1]
    return prev, est


def _evaluate_alternating(partials_fn: Callable[[int], float], tol: float,
                          max_terms: int, accelerate: bool,
                          chain_sequence: Optional[ChainSequence]) -> ContinuedFractionEvaluation:
    ev = convergents(partials_fn, max_terms, tol=tol)
    if ev.converged or not ev.dominance_ok or not accelerate:
        return ev
    hs = [t[2] for t in ev.convergents]
    value, est = _richardson(hs, ev.iterations)
    if est < max(100.0 * tol, 1e-9):
        return ContinuedFractionEvaluation(
            value=value, convergents=ev.convergents, dominance_ok=True,
            converged=True, iterations=ev.iterations, accelerated=True,
            worpitzky_ok=ev.worpitzky_ok, method="richardson")
    if chain_sequence is not None:
        cs = chain_sequence_value(chain_sequence, tol=tol)
        if cs.converged or cs.divergent:
            return ContinuedFractionEvaluation(
                value=cs.C, convergents=ev.convergents, dominance_ok=True,
                converged=True, iterations=ev.iterations, accelerated=False,
                worpitzky_ok=ev.worpitzky_ok, method="chain-sequence")
    return ev


def evaluate_H(chain: BirthDeathChain, tol: float = 1e-12, max_terms: int = 10_000,
               accelerate: bool = True,
               chain_sequence: Optional[ChainSequence] = None) -> ContinuedFractionEvaluation:
    """Upper bound H of the free parameter of the up-then-down factorization.

    The partial numerators alternate a_0, c_1, a_1, c_2, ...  A
    dominance violation means no stochastic factorization exists;
    failure to converge within ``max_terms`` is reported, not guessed,
    unless extrapolation of the monotone tail stabilizes or a chain
    sequence representation supplies the closed form.
    """

    def xi(k):
        if k % 2 == 1:
            return chain.a((k - 1) // 2)
        return chain.c(k // 2)

    return _evaluate_alternating(xi, tol, max_terms, accelerate, chain_sequence)


def evaluate_H_tilde(chain: BirthDeathChain, tol: float = 1e-12, max_terms: int = 10_000,
                     accelerate: bool = True,
                     chain_sequence: Optional[ChainSequence] = None) -> ContinuedFractionEvaluation:
    """Admissibility bound for a_0 in the down-then-up factorization.

    Same machinery as :func:`evaluate_H` with partial numerators
    c_1, a_1, c_2, a_2, ...
    """

    def xi(k):
        if k % 2 == 1:
            return chain.c((k + 1) // 2)
        return chain.a(k // 2)

    return _evaluate_alternating(xi, tol, max_terms, accelerate, chain_sequence)


def chain_sequence_value(cs: ChainSequence, tol: float = 1e-12,
                         max_terms: int = 2_000_000) -> ChainSequenceValue:
    """Closed-form value C = m_0 + (1 - m_0)/(1 + L) of a chain sequence.

    L is the sum of the products m_1...m_n / ((1-m_1)...(1-m_n)),
    accumulated until the increment drops below ``tol``.  If the terms
    fail to fall below ``tol`` within ``max_terms`` the series is
    reported divergent: L = inf and C = m_0 (the 1/(1+L) part dies).
    """
    m0 = float(cs.m0)
    if not (0 <= m0 < 1):
        raise DomainError(f"m_0 = {m0} not in [0, 1)")
    term = 1.0
    L = 0.0
    n = 0
    for n in range(1, max_terms + 1):
        m = float(cs.m(n))
        if not (0 < m < 1):
            raise DomainError(f"m_{n} = {m} not in (0, 1)")
        term *= m / (1.0 - m)
        L += term
        if term < tol:
            return ChainSequenceValue(C=m0 + (1.0 - m0) / (1.0 + L), L=L,
                                      converged=True, divergent=False, terms=n)
    return ChainSequenceValue(C=m0, L=math.inf, converged=False,
                              divergent=True, terms=n)


def chain_sequence_partials(cs: ChainSequence) -> Callable[[int], float]:
    """Partial numerators alpha_n = (1 - m_{n-1}) m_n of a chain sequence."""

    def alpha(n: int) -> float:
        prev = cs.m0 if n == 1 else cs.m(n - 1)
        return (1.0 - prev) * cs.m(n)

    return alpha


def periodic_F(a: float, c: float) -> float:
    """Limit of the period-2 fraction with alternating numerators c, a.

    Solves F^2 - (1 + a - c) F + a = 0 and returns the larger root,
    valid while c <= (1 - sqrt(a))^2 (real roots).
    """
    if not (0 < a < 1) or not (0 < c < 1):
        raise DomainError("a and c must lie in (0, 1)")
    bound = (1.0 - math.sqrt(a)) ** 2
    if c > bound + 1e-15:
        raise DomainError(
            f"c = {c} exceeds (1 - sqrt(a))^2 = {bound}: fraction divergent")
    disc = (1.0 + a - c) ** 2 - 4.0 * a
    disc = max(disc, 0.0)
    return 0.5 * (1.0 + a - c + math.sqrt(disc))
