"""Seeded Monte Carlo for chains, composed factor pairs, and urn mechanics.

The generator is counter-based (numpy Philox, 64-bit words) keyed by
(seed, replica), so replicas are independent streams and every report
is bit-reproducible for a given (seed, replicas, steps).

Urn specifications carry integer ball counts per state; their derived
draw probabilities reproduce the factor coefficients exactly in
rational arithmetic, which the enumeration check asserts before any
sampling shortcut is trusted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy import stats

from .chains import BirthDeathChain, LowerBidiagonal, UpperBidiagonal
from .errors import SpecError

_BLOCK = 8192  # uniforms are drawn from the stream in fixed blocks


@dataclass(frozen=True)
class UrnStepSpec:
    """Ball counts of the two urn experiments for one chain family.

    ``exp1_counts(n)`` and ``exp2_counts(n)`` return (blue added, red
    added) for a state of n blue balls.  In experiment 1 a blue draw
    moves up; in experiment 2 a blue draw moves down.  For the constant
    family, state 0 of experiment 1 is a biased coin instead of an urn.
    """

    family: str
    params: dict
    exp1_counts: Callable[[int], tuple]
    exp2_counts: Callable[[int], tuple]
    chain: BirthDeathChain
    state0_heads: Optional[Fraction] = None


def jacobi_urn_spec(alpha: int, beta: int) -> UrnStepSpec:
    """Urn mechanics of the Jacobi chain at the upper parameter endpoint.

    Experiment 1 at n blue: add beta+1 blue and n+alpha red.
    Experiment 2 at n blue: add n+alpha+beta red.
    """
    if alpha < 0 or beta < 0 or alpha != int(alpha) or beta != int(beta):
        raise SpecError("alpha and beta must be nonnegative integers")
    alpha, beta = int(alpha), int(beta)
    from .models import JacobiParams, jacobi_chain
    al, be = Fraction(alpha), Fraction(beta)
    chain = jacobi_chain(JacobiParams(alpha=al, beta=be))
    return UrnStepSpec(
        family="jacobi",
        params={"alpha": alpha, "beta": beta},
        exp1_counts=lambda n: (beta + 1, n + alpha),
        exp2_counts=lambda n: (0, n + alpha + beta),
        chain=chain,
    )


def constant_urn_spec(k: int, a0: Fraction) -> UrnStepSpec:
    """Urn mechanics of the a = c = 1/4 family with y0 = 1 - k a0.

    Experiment 1 at n >= 1 blue: add k + n(2k-5) blue, 2 + (2n-1)(k-2)
    red; at state 0, a coin with heads probability k a0.  Experiment 2
    at n >= 1: add 1 + n(k-3) blue, 1 + (n-1)(k-2) red; state 0 is
    absorbing.
    """
    if k < 2 or k != int(k):
        raise SpecError("k must be an integer >= 2")
    k = int(k)
    a0 = Fraction(a0)
    if k * a0 > 1:
        raise SpecError(f"k*a0 = {k * a0} exceeds 1: coin probability impossible")
    from .models import ConstantChainParams, constant_chain
    quarter = Fraction(1, 4)
    chain = constant_chain(ConstantChainParams(a0=a0, a=quarter, b=Fraction(1, 2),
                                               c=quarter, k=k))
    return UrnStepSpec(
        family="constant-k",
        params={"k": k, "a0": a0},
        exp1_counts=lambda n: (k + n * (2 * k - 5), 2 + (2 * n - 1) * (k - 2)),
        exp2_counts=lambda n: (1 + n * (k - 3), 1 + (n - 1) * (k - 2)),
        chain=chain,
        state0_heads=k * a0,
    )


def _urn_composition(counts_fn, state: int, experiment: str) -> tuple:
    blue_add, red_add = counts_fn(state)
    if blue_add < 0 or red_add < 0:
        raise SpecError(f"negative ball count at state {state} in {experiment}: "
                        f"({blue_add}, {red_add})")
    return state + blue_add, red_add


def exp1_up_probability(spec: UrnStepSpec, n: int) -> Fraction:
    """Exact probability of a blue draw (move up) in experiment 1."""
    if n == 0 and spec.state0_heads is not None:
        return spec.state0_heads
    blue, red = _urn_composition(spec.exp1_counts, n, "experiment 1")
    return Fraction(blue, blue + red)


def exp2_down_probability(spec: UrnStepSpec, n: int) -> Fraction:
    """Exact probability of a blue draw (move down) in experiment 2."""
    if n == 0:
        return Fraction(0)
    blue, red = _urn_composition(spec.exp2_counts, n, "experiment 2")
    if blue + red == 0:
        return Fraction(0)
    return Fraction(blue, blue + red)


def urn_step(spec: UrnStepSpec, state: int, rng: np.random.Generator,
             order: str = "ul") -> tuple:
    """One macro step of the composed urn model by literal ball counting.

    Returns (new_state, trace); the trace records the urn composition
    and the color drawn in each experiment.
    """
    if state < 0:
        raise SpecError("state must be nonnegative")
    trace = {"order": order, "from": state}

    def run_exp1(n):
        if n == 0 and spec.state0_heads is not None:
            heads = rng.random() < float(spec.state0_heads)
            trace["exp1"] = {"coin_heads_prob": float(spec.state0_heads), "heads": bool(heads)}
            return n + 1 if heads else n
        blue, red = _urn_composition(spec.exp1_counts, n, "experiment 1")
        ball = int(rng.integers(0, blue + red))
        drew_blue = ball < blue
        trace["exp1"] = {"blue": blue, "red": red, "drew": "blue" if drew_blue else "red"}
        return n + 1 if drew_blue else n

    def run_exp2(n):
        if n == 0:
            trace["exp2"] = {"blue": 0, "red": 0, "drew": "none"}
            return 0
        blue, red = _urn_composition(spec.exp2_counts, n, "experiment 2")
        if blue + red == 0:
            trace["exp2"] = {"blue": 0, "red": 0, "drew": "none"}
            return n
        ball = int(rng.integers(0, blue + red))
        drew_blue = ball < blue
        trace["exp2"] = {"blue": blue, "red": red, "drew": "blue" if drew_blue else "red"}
        return n - 1 if drew_blue else n

    if order == "ul":
        mid = run_exp1(state)
        new = run_exp2(mid)
    elif order == "lu":
        mid = run_exp2(state)
        new = run_exp1(mid)
    else:
        raise ValueError("order must be 'ul' or 'lu'")
    trace["mid"] = mid
    trace["to"] = new
    return new, trace


def urn_row_exact(spec: UrnStepSpec, n: int, order: str = "ul") -> tuple:
    """Exact one-step distribution of the composed experiments at state n.

    Enumerates the four draw outcomes in rational arithmetic; for the
    'ul' order this must equal the analytic chain row exactly.
    """
    if order == "ul":
        x = exp1_up_probability(spec, n)
        y = 1 - x
        r_up = exp2_down_probability(spec, n + 1)
        r_stay = exp2_down_probability(spec, n)
        a = x * (1 - r_up)
        b = x * r_up + y * (1 - r_stay)
        c = y * r_stay
        return (a, b, c)
    if order == "lu":
        r = exp2_down_probability(spec, n)
        s = 1 - r
        x_stay = exp1_up_probability(spec, n)
        x_down = exp1_up_probability(spec, n - 1) if n >= 1 else Fraction(0)
        a = s * x_stay
        b = r * x_down + s * (1 - x_stay)
        c = r * (1 - x_down) if n >= 1 else Fraction(0)
        return (a, b, c)
    raise ValueError("order must be 'ul' or 'lu'")


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimulationReport:
    counts: dict
    steps: int
    replicas: int
    seed: int
    empirical: dict
    max_abs_deviation: float
    chi_square: dict

    def visits(self, state: int) -> int:
        return sum(v for (i, _), v in self.counts.items() if i == state)

    def to_json(self) -> str:
        return json.dumps({
            "steps": self.steps,
            "replicas": self.replicas,
            "seed": self.seed,
            "max_abs_deviation": self.max_abs_deviation,
            "counts": {f"{i}->{j}": v for (i, j), v in sorted(self.counts.items())},
            "empirical": {f"{i}->{j}": v for (i, j), v in sorted(self.empirical.items())},
            "chi_square": {str(i): v for i, v in sorted(self.chi_square.items())},
        }, indent=2)


def _row_probs(chain: BirthDeathChain, n: int) -> tuple:
    a, b, c = (float(v) for v in chain.row(n))
    return a, b, c


def _chi_square_state(counts: dict, state: int, chain: BirthDeathChain,
                      min_expected: float = 5.0):
    a, b, c = _row_probs(chain, state)
    outcomes = [(state + 1, a), (state, b)]
    if state >= 1:
        outcomes.append((state - 1, c))
    visits = sum(counts.get((state, j), 0) for j, _ in outcomes)
    if visits == 0:
        return None
    expected = [visits * p for _, p in outcomes]
    if min(e for e in expected if e > 0) < min_expected:
        return None
    stat = 0.0
    for (j, p), e in zip(outcomes, expected):
        if e == 0:
            continue
        obs = counts.get((state, j), 0)
        stat += (obs - e) ** 2 / e
    dof = sum(1 for e in expected if e > 0) - 1
    pvalue = float(stats.chi2.sf(stat, dof)) if dof > 0 else 1.0
    return {"stat": stat, "dof": dof, "pvalue": pvalue, "visits": visits}


def _build_report(counts: dict, steps: int, replicas: int, seed: int,
                  target: BirthDeathChain) -> SimulationReport:
    visits = {}
    for (i, _), v in counts.items():
        visits[i] = visits.get(i, 0) + v
    empirical = {key: v / visits[key[0]] for key, v in counts.items()}
    max_dev = 0.0
    for i in visits:
        a, b, c = _row_probs(target, i)
        for j, p in ((i + 1, a), (i, b), (i - 1, c)):
            if j < 0:
                continue
            max_dev = max(max_dev, abs(empirical.get((i, j), 0.0) - p))
    chi = {}
    for i in sorted(visits):
        res = _chi_square_state(counts, i, target)
        chi[i] = res if res is not None else {"skipped": "insufficient visits"}
    return SimulationReport(counts=dict(counts), steps=steps, replicas=replicas,
                            seed=seed, empirical=empirical,
                            max_abs_deviation=max_dev, chi_square=chi)


def compare_empirical(report: SimulationReport, chain: BirthDeathChain,
                      alpha_level: float = 0.001) -> dict:
    """Goodness-of-fit verdict per from-state: pass, fail, or skipped."""
    states = sorted({i for (i, _) in report.counts})
    out = {}
    for i in states:
        res = _chi_square_state(report.counts, i, chain)
        if res is None:
            out[i] = "skipped"
        else:
            out[i] = "pass" if res["pvalue"] > alpha_level else "fail"
    return out


# ---------------------------------------------------------------------------
# Simulators
# ---------------------------------------------------------------------------

def _stream(seed: int, replica: int) -> np.random.Generator:
    key = np.array([seed % (1 << 64), replica % (1 << 64)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


class _Uniforms:
    """Blocked draw from one replica stream; sequential and deterministic."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.block = rng.random(_BLOCK)
        self.pos = 0

    def next(self) -> float:
        if self.pos == len(self.block):
            self.block = self.rng.random(_BLOCK)
            self.pos = 0
        u = self.block[self.pos]
        self.pos += 1
        return u


def simulate_chain(chain: BirthDeathChain, start: int, steps: int,
                   replicas: int = 1, seed: int = 0) -> SimulationReport:
    """Sample the chain directly from its row probabilities."""
    if steps < 1 or replicas < 1:
        raise ValueError("steps and replicas must be >= 1")
    counts: dict = {}
    rows: dict = {}
    for r in range(replicas):
        uni = _Uniforms(_stream(seed, r))
        state = start
        for _ in range(steps):
            row = rows.get(state)
            if row is None:
                a, b, c = _row_probs(chain, state)
                row = (a, a + b)
                rows[state] = row
            u = uni.next()
            if u < row[0]:
                nxt = state + 1
            elif u < row[1]:
                nxt = state
            else:
                nxt = state - 1
            key = (state, nxt)
            counts[key] = counts.get(key, 0) + 1
            state = nxt
    return _build_report(counts, steps, replicas, seed, chain)


def _composed_target(upper: UpperBidiagonal, lower: LowerBidiagonal,
                     order: str) -> BirthDeathChain:
    if order == "ul":
        def row(n):
            y, x = upper.pair(n)
            s, r = lower.pair(n)
            s1, r1 = lower.pair(n + 1)
            return (x * s1, x * r1 + y * s, y * r)
    else:
        def row(n):
            s, r = lower.pair(n)
            y, x = upper.pair(n)
            if n == 0:
                return (s * x, s * y, 0.0)
            y_p, x_p = upper.pair(n - 1)
            return (s * x, r * x_p + s * y, r * y_p)
    return BirthDeathChain(row, description=f"{order} composition target")


def simulate_composed(upper: UpperBidiagonal, lower: LowerBidiagonal, order: str,
                      start: int, steps: int, replicas: int = 1,
                      seed: int = 0) -> SimulationReport:
    """Sample the two-stage composition of a factor pair.

    Order 'ul' plays the pure-birth move then the pure-death move and
    targets their product; 'lu' reverses the stages and targets the
    order-swapped product.
    """
    if order not in ("ul", "lu"):
        raise ValueError("order must be 'ul' or 'lu'")
    if steps < 1 or replicas < 1:
        raise ValueError("steps and replicas must be >= 1")
    counts: dict = {}
    up_cache: dict = {}
    low_cache: dict = {}

    def up_prob(n):
        v = up_cache.get(n)
        if v is None:
            v = float(upper.pair(n)[1])
            up_cache[n] = v
        return v

    def down_prob(n):
        v = low_cache.get(n)
        if v is None:
            v = float(lower.pair(n)[1])
            low_cache[n] = v
        return v

    for r in range(replicas):
        uni = _Uniforms(_stream(seed, r))
        state = start
        for _ in range(steps):
            if order == "ul":
                mid = state + 1 if uni.next() < up_prob(state) else state
                nxt = mid - 1 if (mid > 0 and uni.next() < down_prob(mid)) else mid
            else:
                mid = state - 1 if (state > 0 and uni.next() < down_prob(state)) else state
                nxt = mid + 1 if uni.next() < up_prob(mid) else mid
            key = (state, nxt)
            counts[key] = counts.get(key, 0) + 1
            state = nxt
    target = _composed_target(upper, lower, order)
    return _build_report(counts, steps, replicas, seed, target)


def simulate_urn(spec: UrnStepSpec, start: int, steps: int, replicas: int = 1,
                 seed: int = 0, order: str = "ul") -> SimulationReport:
    """Sample the urn mechanics by ball counting (no precomputed rows)."""
    if steps < 1 or replicas < 1:
        raise ValueError("steps and replicas must be >= 1")
    counts: dict = {}
    comp1: dict = {}
    comp2: dict = {}

    def composition1(n):
        v = comp1.get(n)
        if v is None:
            v = _urn_composition(spec.exp1_counts, n, "experiment 1")
            comp1[n] = v
        return v

    def composition2(n):
        v = comp2.get(n)
        if v is None:
            v = _urn_composition(spec.exp2_counts, n, "experiment 2")
            comp2[n] = v
        return v

    heads = float(spec.state0_heads) if spec.state0_heads is not None else None

    for r in range(replicas):
        uni = _Uniforms(_stream(seed, r))
        state = start

        def exp1(n):
            if n == 0 and heads is not None:
                return 1 if uni.next() < heads else 0
            blue, red = composition1(n)
            ball = int(uni.next() * (blue + red))
            return n + 1 if ball < blue else n

        def exp2(n):
            if n == 0:
                return 0
            blue, red = composition2(n)
            if blue + red == 0:
                return n
            ball = int(uni.next() * (blue + red))
            return n - 1 if ball < blue else n

        for _ in range(steps):
            if order == "ul":
                nxt = exp2(exp1(state))
            else:
                nxt = exp1(exp2(state))
            key = (state, nxt)
            counts[key] = counts.get(key, 0) + 1
            state = nxt

    target_rows: dict = {}

    def target_row(n):
        v = target_rows.get(n)
        if v is None:
            v = tuple(float(x) for x in urn_row_exact(spec, n, order=order))
            target_rows[n] = v
        return v

    target = BirthDeathChain(target_row, description=f"urn {order} target")
    return _build_report(counts, steps, replicas, seed, target)
