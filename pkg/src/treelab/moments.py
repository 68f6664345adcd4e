"""Closed-form moment formulas for uniform random labelled trees.

Exact rational arithmetic is used while the numbers stay manageable
(n <= EXACT_N_MAX); beyond that the same formulas are evaluated in log space.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .automorphisms import BranchShape, aut_full_order, lambda_branch, rooted_unlabelled_trees
from .patterns import Pattern
from .tree import LabelledTree

EXACT_N_MAX = 60


def falling(x: int, k: int) -> int:
    """(x)_k = x (x-1) ... (x-k+1); zero once a factor hits 0."""
    out = 1
    for t in range(k):
        out *= x - t
        if out == 0:
            return 0
    return out


@dataclass(frozen=True)
class MomentReport:
    formula: str
    value: float
    exact: Fraction | None = None
    flag: str | None = None

    def to_dict(self) -> dict:
        d = {"formula": self.formula, "value": self.value}
        if self.exact is not None:
            d["exact"] = f"{self.exact.numerator}/{self.exact.denominator}"
        if self.flag:
            d["flag"] = self.flag
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _report(formula: str, exact: Fraction, flag=None) -> MomentReport:
    return MomentReport(formula, float(exact), exact, flag)


# forests


@dataclass(frozen=True)
class ForestComponent:
    vertices: frozenset
    edges: tuple
    attach: frozenset


@dataclass(frozen=True)
class ForestSpec:
    n: int
    components: tuple

    @classmethod
    def build(cls, n: int, components) -> "ForestSpec":
        """``components`` is a list of (vertices, edges, attach) triples."""
        comps = []
        seen: set = set()
        for verts, edges, attach in components:
            verts = frozenset(int(v) for v in verts)
            attach = frozenset(int(v) for v in attach)
            edges = tuple(tuple(sorted((int(a), int(b)))) for a, b in edges)
            if not attach:
                raise ValueError("every component needs a non-empty attachment set")
            if not attach <= verts:
                raise ValueError("attachment set must lie inside its component")
            if len(edges) != len(verts) - 1 or any(a not in verts or b not in verts for a, b in edges):
                raise ValueError("component edges must form a tree on its vertices")
            if len(verts) > 1:
                LabelledTree(len(verts), _compress(verts, edges))
            if seen & verts:
                raise ValueError("components overlap")
            seen |= verts
            comps.append(ForestComponent(verts, edges, attach))
        if seen != set(range(1, n + 1)):
            raise ValueError("components must partition [n]")
        return cls(n, tuple(comps))

    @property
    def k(self) -> int:
        return len(self.components)

    def attach_sizes(self) -> list[int]:
        return [len(c.attach) for c in self.components]


def _compress(verts, edges):
    idx = {v: i + 1 for i, v in enumerate(sorted(verts))}
    return [(idx[a], idx[b]) for a, b in edges]


def forest_extension_count(spec: ForestSpec) -> int:
    """b_1 ... b_k (b_1 + ... + b_k)^{k-2}."""
    b = spec.attach_sizes()
    k = len(b)
    total = Fraction(sum(b)) ** (k - 2)
    for x in b:
        total *= x
    assert total.denominator == 1
    return int(total)


# pattern expectation


def pattern_expectation_exact(n: int, P: Pattern) -> MomentReport:
    """E[N_{H,theta}(T)] = (n)_l s (n-l+s)^{n-l-1} / (|Aut(H,theta)| n^{n-2})."""
    l, s = P.l, P.s
    if n <= l:
        raise ValueError(f"need n > l, got n={n}, l={l}")
    if s == 0:
        return MomentReport("pattern_expectation", 0.0, Fraction(0), flag="s=0")
    aut = P.aut_order()
    if n <= EXACT_N_MAX:
        num = falling(n, l) * s * (n - l + s) ** (n - l - 1)
        return _report("pattern_expectation", Fraction(num, aut * n ** (n - 2)))
    # (n)_l n^{1-l} (1 + (s-l)/n)^{n-l-1} s / aut
    lg = math.log(n) + sum(math.log1p(-i / n) for i in range(l))
    lg += (n - l - 1) * math.log1p((s - l) / n) + math.log(s) - math.log(aut)
    return MomentReport("pattern_expectation", math.exp(lg), None, flag="log-space")


def pattern_expectation_limit(n: int, P: Pattern) -> float:
    """Leading term n s e^{s-l} / |Aut(H,theta)|."""
    return n * P.s * math.exp(P.s - P.l) / P.aut_order()


def leaf_moments_exact(n: int) -> tuple[Fraction, Fraction]:
    """(E[L], Var[L]) for the leaf count, from P(i leaf) = (1-1/n)^{n-2} and
    P(i, j leaves) = (1-2/n)^{n-2}."""
    if n < 3:
        raise ValueError("need n >= 3")
    p1 = Fraction(n - 1, n) ** (n - 2)
    p2 = Fraction(n - 2, n) ** (n - 2)
    mean = n * p1
    return mean, n * (n - 1) * p2 + mean - mean * mean


def leaf_moments(n: int) -> tuple[float, float]:
    """Float (E[L], Var[L]); log-space for large n."""
    if n <= EXACT_N_MAX:
        m, v = leaf_moments_exact(n)
        return float(m), float(v)
    a = math.exp((n - 2) * math.log1p(-1 / n))
    b = math.exp((n - 2) * math.log1p(-2 / n))
    mean = n * a
    # n(n-1)b - n^2 a^2 suffers cancellation; expand around b - a^2
    d = math.expm1((n - 2) * (math.log1p(-2 / n) - 2 * math.log1p(-1 / n)))
    return mean, n * n * a * a * d - n * b + mean


# paths


def path_variance_asymptotic(n: int, l: int) -> float:
    """n l (l-1)^2 (l-2) / 24."""
    if l <= 2:
        raise ValueError("need l > 2")
    if l * l > n:
        raise ValueError(f"need l^2 <= n, got l={l}, n={n}")
    return n * l * (l - 1) ** 2 * (l - 2) / 24


def path_variance_identity(l: int) -> tuple[int, int]:
    """Both sides of -l^2(l-1)^2 + 2 sum_{i=2}^{l} (l-i+1)^2 (2l-i) = l(l-1)^2(l-2)/6."""
    lhs = -(l**2) * (l - 1) ** 2 + 2 * sum((l - i + 1) ** 2 * (2 * l - i) for i in range(2, l + 1))
    rhs = Fraction(l * (l - 1) ** 2 * (l - 2), 6)
    assert rhs.denominator == 1
    return lhs, int(rhs)


# degree sequences


def multinomial_factorial_moment(n: int, a: Sequence[int], b: Sequence[int]) -> MomentReport:
    """E[prod_i (X_i)_{a_i} (X_i)_{b_i}] for X multinomial(n-2; 1/n, ..., 1/n)."""
    a = [int(x) for x in a]
    b = [int(x) for x in b]
    if len(a) != n or len(b) != n:
        raise ValueError("a and b must have length n")
    if min(a + b, default=0) < 0:
        raise ValueError("a and b must be non-negative")
    # weight[J] = sum over j with sum j = J of prod j_i! C(a_i,j_i) C(b_i,j_i)
    weight = {0: 1}
    for ai, bi in zip(a, b):
        m = min(ai, bi)
        if m == 0:
            continue
        w = [math.factorial(j) * math.comb(ai, j) * math.comb(bi, j) for j in range(m + 1)]
        nxt: dict = {}
        for J, v in weight.items():
            for j, wj in enumerate(w):
                nxt[J + j] = nxt.get(J + j, 0) + v * wj
        weight = nxt
    A, B = sum(a), sum(b)
    total = Fraction(0)
    for J, v in weight.items():
        c = A + B - J
        total += Fraction(falling(n - 2, c) * v, n**c)
    return _report("multinomial_factorial_moment", total)


def conditional_pattern_expectation(x: Sequence[int], H: LabelledTree) -> MomentReport:
    """E[N_H(T) | deg T = x + 1] summed over injective l-tuples.

    A dynamic program over vertices of T and subsets of V(H) replaces the
    n^l tuple sum.
    """
    x = [int(v) for v in x]
    n = len(x)
    l = H.n
    if sum(x) != n - 2 or min(x) < 0:
        raise ValueError("x must be non-negative with sum n-2")
    if n <= l:
        raise ValueError(f"need n > l, got n={n}, l={l}")
    h = H.degrees()[1:]
    full = (1 << l) - 1
    total = 0
    for special in range(l):
        need = [h[t] - 1 + (t == special) for t in range(l)]
        dp = [0] * (1 << l)
        dp[0] = 1
        for xv in x:
            f = [falling(xv, need[t]) for t in range(l)]
            for mask in range(full, 0, -1):
                acc = 0
                m = mask
                while m:
                    low = m & -m
                    t = low.bit_length() - 1
                    if f[t]:
                        acc += dp[mask ^ low] * f[t]
                    m ^= low
                dp[mask] += acc
        total += dp[full]
    value = Fraction(total, aut_full_order(H) * falling(n - 2, l - 1))
    return _report("conditional_pattern_expectation", value)


# branches


def branch_factorial_moment_exact(n: int, B: BranchShape, k: int, root_flag: bool = False) -> MomentReport:
    """E[(N_i(B))_k] = (n-2)_{bk} L^k (n-bk)^{n-bk-2} / ((b!)^k n^{n-2}).

    With ``root_flag`` (i = r) the first factor is (n-1)_{bk}.
    """
    b = B.size
    if k < 0:
        raise ValueError("k must be >= 0")
    if b * k >= n:
        raise ValueError(f"need b*k < n, got b*k={b * k}, n={n}")
    if k == 0:
        return _report("branch_factorial_moment", Fraction(1))
    top = n - 1 if root_flag else n - 2
    m = b * k
    if n <= EXACT_N_MAX:
        num = falling(top, m) * B.labellings**k * Fraction(n - m) ** (n - m - 2)
        return _report("branch_factorial_moment", num / (math.factorial(b) ** k * Fraction(n) ** (n - 2)))
    lg = sum(math.log(top - t) for t in range(m)) - k * math.log(B.aut)
    lg += (n - m - 2) * math.log1p(-m / n) - m * math.log(n)
    return MomentReport("branch_factorial_moment", math.exp(lg), None, flag="log-space")


# Poisson helpers


def poisson_log_moments(lam: float, tol: float = 1e-15) -> tuple[float, float, float]:
    """(E[log X!], E[log (X+1)!], E[log^2 X!]) for X ~ Poisson(lam)."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    if lam == 0:
        return 0.0, 0.0, 0.0
    s1 = s2 = s3 = 0.0
    k = 0
    logp = -lam
    while True:
        p = math.exp(logp)
        lf = math.lgamma(k + 1)
        lf1 = math.lgamma(k + 2)
        s1 += p * lf
        s2 += p * lf1
        s3 += p * lf * lf
        # past the mode the terms decay at least geometrically with ratio r
        if k > 2 * lam + 2:
            r = lam / (k + 1) * ((math.lgamma(k + 3) / max(lf1, 1e-300)) ** 2)
            if r < 0.5 and p * lf1 * lf1 * r / (1 - r) < tol:
                break
        k += 1
        logp += math.log(lam) - math.log(k)
    return s1, s2, s3


def poisson_log_bounds(lam: float) -> dict[str, tuple[float, float]]:
    """Reference intervals for the three Poisson log moments at small lambda."""
    l2 = math.log(2)
    e = math.exp(-lam)
    return {
        "log_fact": (0.5 * e * lam**2 * l2, 0.5 * (1 + 0.7 * lam) * e * lam**2 * l2),
        "log_fact_shift": (e * lam * l2, (1 + 2.1 * lam) * e * lam * l2),
        "log_fact_sq": (e * lam**2 / 2 * l2**2 + e * lam**3 / 6 * math.log(6) ** 2, math.inf),
    }


@dataclass(frozen=True)
class LambdaSeries:
    s_max: int
    sums: tuple[float, float, float]
    tails: tuple[float, float, float]
    counts: tuple[int, ...]

    def interval(self, j: int) -> tuple[float, float]:
        return self.sums[j], self.sums[j] + self.tails[j]


def lambda_tail_bound(s_max: int, j: int) -> float:
    """Upper bound for sum_{s > s_max} s^{s+j-1} e^{-2s} / s!.

    Uses s^s/s! <= e^s/sqrt(2 pi s), so each term is at most
    s^{j-3/2} e^{-s}/sqrt(2 pi), then a geometric series.
    """
    s0 = s_max + 1
    first = s0 ** (j - 1.5) * math.exp(-s0) / math.sqrt(2 * math.pi)
    r = math.exp(-1) * (1 + 1 / s0) ** max(0.0, j - 1.5)
    return first / (1 - r)


def lambda_series(s_max: int = 12, n: float | None = None) -> LambdaSeries:
    """Partial sums S_j = sum_{|B| <= s_max} lambda_B^2 e^{-lambda_B} |B|^j, j = 0, 1, 2."""
    if s_max < 1:
        raise ValueError("s_max must be >= 1")
    shapes = rooted_unlabelled_trees(s_max)
    sums = [0.0, 0.0, 0.0]
    for s in range(1, s_max + 1):
        part = math.fsum(lam * lam * math.exp(-lam) for lam in (lambda_branch(B, n) for B in shapes[s]))
        for j in range(3):
            sums[j] += part * s**j
    tails = tuple(lambda_tail_bound(s_max, j) for j in range(3))
    return LambdaSeries(s_max, tuple(sums), tails, tuple(len(shapes[s]) for s in range(1, s_max + 1)))
