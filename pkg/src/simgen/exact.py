"""Exact partition functions and exact finite-n laws.

Z(m, n) is the total weight of allocations of m balls in n boxes; the
tree partition function is recovered through Z_n = Z(n-1, n)/n.  Every
sampler and every asymptotic prediction in this package is validated
against the tables built here, so this module favours exactness over
speed: direct convolution only, rational arithmetic where the weights
allow it, and a parallel boolean table so feasibility never depends on
floating-point underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import (
    CapacityExceeded,
    InfeasibleAllocation,
    PrefixIncompatible,
    RationalUnavailable,
    SimgenError,
)
from .trees import OrderedTree, all_trees
from .weights import INF, WeightSpec, phi, shift_support, tau_of

NEG_INF = float("-inf")

# rational rows are exact bignum arithmetic and the entries grow fast;
# past these sizes the log tables are the intended tool
RATIONAL_N_CAP = 64
RATIONAL_M_CAP = 160

# standalone feasibility for gap-ful supports runs a boolean power DP;
# the quadratic convolutions stop being cheap around this length
FEASIBLE_DP_CAP = 4096

BRUTE_N_CAP = 12

_F0 = Fraction(0)


# ---------------------------------------------------------------------------
# table type

@dataclass(frozen=True, eq=False)
class PartitionTable:
    """Triangular array of Z(j, i) for 0 <= i <= n_max, 0 <= j <= m_max.

    Log tables store the tilted values a^i b^j Z(j, i) (all entries are
    then probabilities <= 1 whenever a tilt was applied) together with
    an exact boolean feasibility table; queries undo the tilt.  Weights
    with w_0 = 0 are shifted internally so the DP always starts from a
    positive atom at zero, and queries undo the shift as well.
    """

    spec: WeightSpec
    n_max: int
    m_max: int
    mode: str
    tilt: Optional[tuple] = None
    _alpha: int = 0
    _loga: float = 0.0
    _logb: float = 0.0
    _logrows: Optional[np.ndarray] = field(default=None, repr=False)
    _okrows: Optional[np.ndarray] = field(default=None, repr=False)
    _qrows: Optional[tuple] = field(default=None, repr=False)

    def _index(self, m: int, n: int) -> int:
        if m < 0 or n < 0:
            raise ValueError("m and n must be nonnegative")
        if n > self.n_max or m > self.m_max:
            raise CapacityExceeded(
                f"query ({m},{n}) outside table ({self.m_max},{self.n_max})")
        # shifted coordinate; negative means infeasible, not out of range
        return m - self._alpha * n

    def ok(self, m: int, n: int) -> bool:
        """Exact positivity of Z(m, n)."""
        j = self._index(m, n)
        if j < 0:
            return False
        if self.mode == "rational":
            return self._qrows[n][j] != 0
        return bool(self._okrows[n, j])

    def log_z(self, m: int, n: int) -> float:
        """log Z(m, n), -inf when Z(m, n) = 0.

        Feasible cells more than ~700 nats below their row's scale can
        flush to -inf in log mode; ok() stays exact regardless.
        """
        j = self._index(m, n)
        if j < 0:
            return NEG_INF
        if self.mode == "rational":
            v = self._qrows[n][j]
            if v == 0:
                return NEG_INF
            return math.log(v.numerator) - math.log(v.denominator)
        if not self._okrows[n, j]:
            return NEG_INF
        return float(self._logrows[n, j]) - (n * self._loga + j * self._logb)

    def z(self, m: int, n: int) -> Fraction:
        """Exact Z(m, n); rational tables only."""
        if self.mode != "rational":
            raise RationalUnavailable("table was built in log mode")
        j = self._index(m, n)
        if j < 0:
            return _F0
        return self._qrows[n][j]

    def log_row(self, n: int) -> np.ndarray:
        """log Z(m, n) for m = 0..m_max, in original (unshifted) coordinates."""
        if n < 0 or n > self.n_max:
            raise CapacityExceeded(f"row {n} outside table (n_max={self.n_max})")
        out = np.full(self.m_max + 1, NEG_INF)
        base = self._alpha * n
        if base > self.m_max:
            return out
        width = self.m_max + 1 - base
        if self.mode == "rational":
            for j in range(width):
                v = self._qrows[n][j]
                if v != 0:
                    out[base + j] = math.log(v.numerator) - math.log(v.denominator)
            return out
        js = np.arange(width)
        row = self._logrows[n, :width] - (n * self._loga + js * self._logb)
        out[base:] = np.where(self._okrows[n, :width], row, NEG_INF)
        return out


# ---------------------------------------------------------------------------
# construction

def build_table(spec: WeightSpec, m_max: int, n_max: int,
                mode: str = "log", tol: float = 1e-12) -> PartitionTable:
    """DP over boxes: Z(j, i) = sum_k w_k Z(j-k, i-1), row by row.

    Log mode pre-tilts the weights to the canonical probability weights
    at the table's densest diagonal m_max/n_max when the declared radius
    allows it, which keeps every stored entry in [0, 1]; the tilt pair
    is recorded on the table and undone on query.  Rational mode keeps
    exact Fractions and is gated to small tables.
    """
    if m_max < 0 or n_max < 0:
        raise ValueError("m_max and n_max must be nonnegative")
    sspec, alpha = shift_support(spec)
    if mode == "rational":
        return _build_rational(spec, sspec, alpha, m_max, n_max)
    if mode == "log":
        return _build_log(spec, sspec, alpha, m_max, n_max, tol)
    raise ValueError(f"unknown mode {mode!r} (expected 'log' or 'rational')")


def _build_log(spec, sspec, alpha, m_max, n_max, tol):
    kmax = int(min(m_max, sspec.omega))
    logker = sspec.logw(0, kmax + 1).astype(float)

    loga = logb = 0.0
    tiltrec = None
    # densest queried diagonal, in shifted coordinates
    lam_c = m_max / n_max - alpha if n_max > 0 else 0.0
    if sspec.rho is not None and sspec.rho > 0 and lam_c > 0:
        try:
            t = tau_of(sspec, lam_c, tol=max(tol, 1e-13))
            ph = phi(sspec, t)
            if 0.0 < t < INF and math.isfinite(ph):
                loga, logb = -math.log(ph), math.log(t)
                tiltrec = (1.0 / ph, t)
        except (SimgenError, ValueError, OverflowError):
            pass  # raw log space still works, just with more dynamic range
    if tiltrec is not None:
        logker = loga + np.arange(kmax + 1) * logb + logker

    # support indicator from the log kernel, not the rescaled one: linear
    # entries may underflow to zero on genuinely positive weights
    ker_ind = np.isfinite(logker).astype(float)
    kshift = float(np.max(logker))
    ker_lin = np.exp(logker - kshift)

    rows = np.full((n_max + 1, m_max + 1), NEG_INF)
    okt = np.zeros((n_max + 1, m_max + 1), dtype=bool)
    rows[0, 0] = 0.0
    okt[0, 0] = True
    for i in range(1, n_max + 1):
        cnt = np.convolve(okt[i - 1].astype(float), ker_ind)[:m_max + 1]
        ok_i = cnt > 0.0
        okt[i] = ok_i
        prev = rows[i - 1]
        m = float(np.max(prev))
        if not math.isfinite(m):
            continue  # whole previous row flushed; values stay -inf, ok stays exact
        # per-row rescale: entries of the previous row sit in (-inf, m],
        # so both convolution inputs are <= 1 and sums cannot overflow
        lin = np.exp(prev - m)
        conv = np.convolve(lin, ker_lin)[:m_max + 1]
        with np.errstate(divide="ignore"):
            row = np.log(conv) + (m + kshift)
        row[~ok_i] = NEG_INF
        rows[i] = row

    return PartitionTable(spec=spec, n_max=n_max, m_max=m_max, mode="log",
                          tilt=tiltrec, _alpha=alpha, _loga=loga, _logb=logb,
                          _logrows=rows, _okrows=okt)


def _build_rational(spec, sspec, alpha, m_max, n_max):
    if n_max > RATIONAL_N_CAP or m_max > RATIONAL_M_CAP:
        raise CapacityExceeded(
            f"rational mode is gated to n_max<={RATIONAL_N_CAP}, "
            f"m_max<={RATIONAL_M_CAP}; use log mode above that")
    if not sspec.has_exact:
        raise RationalUnavailable(
            f"{spec.name} has no exact rational weights")
    kmax = int(min(m_max, sspec.omega))
    support = []
    for k in range(kmax + 1):
        wk = sspec.weight_fraction(k)
        if wk != 0:
            support.append((k, wk))

    rows = [[Fraction(1)] + [_F0] * m_max]
    for _ in range(n_max):
        prev = rows[-1]
        new = [_F0] * (m_max + 1)
        for k, wk in support:
            for j in range(k, m_max + 1):
                pv = prev[j - k]
                if pv:
                    new[j] += wk * pv
        rows.append(new)

    return PartitionTable(spec=spec, n_max=n_max, m_max=m_max, mode="rational",
                          _alpha=alpha, _qrows=tuple(tuple(r) for r in rows))


# ---------------------------------------------------------------------------
# exact finite-n laws

def z_tree(table: PartitionTable, n: int):
    """Tree partition function Z_n = Z(n-1, n)/n.

    Returns a Fraction in rational mode and log Z_n in log mode (-inf
    when no tree of size n exists).
    """
    if n < 1:
        raise ValueError("tree size n must be >= 1")
    if table.mode == "rational":
        return table.z(n - 1, n) / n
    return table.log_z(n - 1, n) - math.log(n)


def alloc_marginal(table: PartitionTable, m: int, n: int, k: int):
    """P(Y_1 = k) for the allocation of m balls in n boxes:
    w_k Z(m-k, n-1) / Z(m, n)."""
    if n < 1:
        raise ValueError("need at least one box")
    if not table.ok(m, n):
        raise InfeasibleAllocation(f"Z({m},{n}) = 0 for {table.spec.name}")
    if k < 0 or k > m:
        return _F0 if table.mode == "rational" else 0.0
    if table.mode == "rational":
        wk = table.spec.weight_fraction(k)
        if wk == 0:
            return _F0
        return wk * table.z(m - k, n - 1) / table.z(m, n)
    lw = table.spec.logw(k, k + 1)[0]
    if lw == NEG_INF:
        return 0.0
    v = lw + table.log_z(m - k, n - 1) - table.log_z(m, n)
    return math.exp(v) if v > NEG_INF else 0.0


def root_degree_pmf(table: PartitionTable, n: int, d: int):
    """Exact root-degree law of the size-n random tree:
    d w_d (n/(n-1)) Z(n-1-d, n-1) / Z(n-1, n).

    This is the size-biased version of the allocation marginal, which
    is why d = 0 has probability zero for n >= 2.
    """
    if n < 2:
        raise ValueError("root degree law needs n >= 2")
    if not table.ok(n - 1, n):
        raise InfeasibleAllocation(f"no trees of size {n} for {table.spec.name}")
    if d < 1 or d > n - 1:
        return _F0 if table.mode == "rational" else 0.0
    if table.mode == "rational":
        wd = table.spec.weight_fraction(d)
        if wd == 0:
            return _F0
        return d * wd * Fraction(n, n - 1) * table.z(n - 1 - d, n - 1) / table.z(n - 1, n)
    lw = table.spec.logw(d, d + 1)[0]
    if lw == NEG_INF:
        return 0.0
    v = (math.log(d) + lw + math.log(n / (n - 1))
         + table.log_z(n - 1 - d, n - 1) - table.log_z(n - 1, n))
    return math.exp(v) if v > NEG_INF else 0.0


def joint_degree_prob(table: PartitionTable, prefix_tree: OrderedTree,
                      d: Sequence[int], n: int):
    """P(the first len(prefix) depth-first nodes of T_n have outdegrees d).

    Requires d_i >= the outdegree of node i inside the prefix shape;
    dropping below it breaks the cyclic symmetry the formula rests on,
    so that case is rejected rather than silently mispriced.
    """
    ell = len(prefix_tree)
    dd = [int(x) for x in d]
    if len(dd) != ell:
        raise ValueError(f"got {len(dd)} degrees for a prefix of {ell} nodes")
    if any(x < 0 for x in dd):
        raise ValueError("degrees must be nonnegative")
    for i, (want, have) in enumerate(zip(prefix_tree.degrees, dd)):
        if have < want:
            raise PrefixIncompatible(
                f"d[{i}] = {have} < outdegree {want} of node {i} in the prefix")
    if n <= ell:
        raise PrefixIncompatible(f"prefix of size {ell} needs n > {ell}, got {n}")
    if not table.ok(n - 1, n):
        raise InfeasibleAllocation(f"no trees of size {n} for {table.spec.name}")

    big_d = sum(dd)
    mult = big_d - ell + 1  # number of good rotations of the suffix
    if n - big_d - 1 < 0 or mult <= 0:
        return _F0 if table.mode == "rational" else 0.0
    if table.mode == "rational":
        wprod = Fraction(1)
        for x in dd:
            wprod *= table.spec.weight_fraction(x)
        if wprod == 0:
            return _F0
        return (Fraction(n, n - ell) * mult * wprod
                * table.z(n - big_d - 1, n - ell) / table.z(n - 1, n))
    lw = 0.0
    for x in dd:
        lx = table.spec.logw(x, x + 1)[0]
        if lx == NEG_INF:
            return 0.0
        lw += lx
    v = (math.log(n / (n - ell)) + math.log(mult) + lw
         + table.log_z(n - big_d - 1, n - ell) - table.log_z(n - 1, n))
    return math.exp(v) if v > NEG_INF else 0.0


# ---------------------------------------------------------------------------
# brute-force oracle

def brute_force(spec: WeightSpec, n: int):
    """Every ordered tree of size n with its product weight.

    Independent of the DP on purpose: enumeration walks the degree
    sequences directly, so agreement with z_tree cross-checks the whole
    table pipeline.  Exact Fractions when the family has them.
    """
    if n < 1:
        raise ValueError("tree size n must be >= 1")
    if n > BRUTE_N_CAP:
        raise CapacityExceeded(f"brute force is gated to n <= {BRUTE_N_CAP}")
    exact = spec.has_exact
    out = []
    for seq in all_trees(n):
        t = OrderedTree(seq)
        if exact:
            w = Fraction(1)
            for x in seq:
                w *= spec.weight_fraction(x)
        else:
            lw = spec._logw(np.asarray(seq, dtype=np.int64))
            w = float(np.exp(lw.sum()))
        out.append((t, w))
    return out


# ---------------------------------------------------------------------------
# standalone feasibility

# spec -> (largest t with {0..t} all in the normalized support, first gap)
_interval_memo: dict = {}


def _normalized_interval_upto(spec: WeightSpec, t_need: int) -> bool:
    """Whether the support, shifted to 0 and divided by the span, contains
    every point 0..t_need."""
    done, gap = _interval_memo.get(spec, (0, None))
    if gap is not None and gap <= t_need:
        return False
    if t_need <= done:
        return True
    g = spec.span if spec.span > 0 else 1
    ks = spec.alpha_min + g * np.arange(t_need + 1, dtype=np.int64)
    fin = np.isfinite(spec._logw(ks))
    if fin.all():
        _interval_memo[spec] = (t_need, gap)
        return True
    first = int(np.argmin(fin))
    _interval_memo[spec] = (first - 1, first)
    return False


def _feasible_dp(spec: WeightSpec, mq: int, n: int) -> bool:
    # boolean polynomial power: coefficient mq of (support indicator)^n,
    # truncated at mq and re-binarized each step so counts stay exact
    if mq > FEASIBLE_DP_CAP:
        raise CapacityExceeded(
            f"feasibility DP for gap-ful supports is gated to m' <= {FEASIBLE_DP_CAP}")
    g = spec.span if spec.span > 0 else 1
    tmax = mq
    if spec.omega < INF:
        tmax = min(tmax, (int(spec.omega) - spec.alpha_min) // g)
    ks = spec.alpha_min + g * np.arange(tmax + 1, dtype=np.int64)
    cur = np.isfinite(spec._logw(ks)).astype(float)
    acc = np.zeros(mq + 1)
    acc[0] = 1.0
    e = n
    while e:
        if e & 1:
            acc = (np.convolve(acc, cur)[:mq + 1] > 0.0).astype(float)
        e >>= 1
        if e:
            cur = (np.convolve(cur, cur)[:mq + 1] > 0.0).astype(float)
    return bool(acc[mq] > 0.0)


def feasible(spec: WeightSpec, m: int, n: int) -> bool:
    """Exact positivity of Z(m, n), without building a table.

    Range and span checks settle most cases; families whose normalized
    support is an interval need nothing else (a greedy split of m into
    n parts works).  Only gap-ful supports fall through to a boolean DP.
    """
    if m < 0 or n < 0:
        return False
    if n == 0:
        return m == 0
    mp = m - spec.alpha_min * n
    if mp < 0:
        return False
    if spec.omega < INF and m > spec.omega * n:
        return False
    if spec.span == 0:
        # single-point support: only the diagonal m = alpha n survives
        return mp == 0
    if mp % spec.span:
        return False
    mq = mp // spec.span
    if mq == 0:
        return True
    t_need = mq
    if spec.omega < INF:
        t_need = min(t_need, (int(spec.omega) - spec.alpha_min) // spec.span)
    if _normalized_interval_upto(spec, t_need):
        return True
    return _feasible_dp(spec, mq, n)
