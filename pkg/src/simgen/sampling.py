"""Samplers for conditioned allocations, random trees, and limit balls.

Everything draws through numpy Generators.  RngStream names a
reproducible source: equal (seed, stream) pairs replay the same
randomness, distinct streams are independent, which is what the CLI
uses to shard work across processes without losing determinism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union
from weakref import WeakKeyDictionary

import numpy as np

from .errors import (AcceptanceTooLow, CapacityExceeded, EmptySupport,
                     InfeasibleAllocation, InvalidDegreeSequence, SimgenError)
from .exact import PartitionTable, build_table, feasible, z_tree
from .trees import OrderedTree
from .weights import (INF, CanonicalLaw, WeightSpec, canonical_law, explicit,
                      phi, shift_support, tau_of)

__all__ = [
    "GW_NODE_BUDGET", "Allocation", "KestenBall", "KestenSpec", "RngStream",
    "VoseAlias", "alloc_to_tree", "as_generator", "cyclic_shifts",
    "rotate_allocations", "sample_alloc_exact", "sample_alloc_rejection",
    "sample_allocations", "sample_forest", "sample_gw", "sample_kesten_ball",
    "sample_size_biased_ball", "sample_tree", "sample_trees",
]

GW_NODE_BUDGET = 10_000_000

_ALIAS_KCAP = 1 << 16          # alias head length for unbounded supports
_TAIL_EPS = 2.0 ** -53
_CHUNK_WORDS = 1 << 23         # ~64MB of raw bits per rejection chunk
_CHUNK_CELLS = 1 << 22         # alias-path batch cap (rows * boxes)


# ---------------------------------------------------------------------------
# randomness plumbing

@dataclass(frozen=True)
class RngStream:
    """A named, replayable randomness source.

    Two streams with equal (seed, stream) produce identical draw
    sequences; different stream indices under the same seed are
    independent for all practical purposes (SeedSequence spawn keys).
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed,
                                    spawn_key=(self.stream,))
        return np.random.default_rng(ss)


def as_generator(rng) -> np.random.Generator:
    """Coerce an RngStream, a Generator, or a bare seed to a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    return RngStream(int(rng)).generator()


# ---------------------------------------------------------------------------
# finite-pmf sampling

class VoseAlias:
    """Constant-time draws from a fixed finite pmf (alias method)."""

    def __init__(self, pmf):
        p = np.asarray(pmf, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("pmf must be a nonempty vector")
        if not np.isfinite(p).all() or (p < 0).any():
            raise ValueError("pmf entries must be finite and nonnegative")
        tot = float(p.sum())
        if tot <= 0.0:
            raise ValueError("pmf must carry positive mass")
        k = p.size
        scaled = (p * (k / tot)).tolist()
        prob = np.ones(k)
        alias = np.arange(k)
        small = [i for i in range(k) if scaled[i] < 1.0]
        large = [i for i in range(k) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] -= 1.0 - scaled[s]
            (small if scaled[g] < 1.0 else large).append(g)
        # leftovers are 1.0 up to rounding; prob already defaults there
        self.prob = prob
        self.alias = alias
        self.k = k

    def draw(self, gen: np.random.Generator, size=None):
        idx = gen.integers(0, self.k, size=size)
        take = gen.random(size=size) < self.prob[idx]
        return np.where(take, idx, self.alias[idx])


class _PmfSampler:
    """Alias over the head of a law plus an exact walk on the far tail.

    The tail slot only exists for unbounded supports whose mass beyond
    the head is above float noise (~1e-13; the clamp truncates less
    than that, far under any statistical tolerance).  Drawing the slot
    resolves by a chunked inverse-cdf walk over the true pmf values.
    """

    def __init__(self, head, tail=0.0, tail_block=None):
        self.khead = len(head) - 1
        self.tail = float(tail) if tail >= 1e-13 else 0.0
        self.tail_block = tail_block
        pmf = np.asarray(head, dtype=float)
        if self.tail > 0.0:
            pmf = np.append(pmf, self.tail)
        self.alias = VoseAlias(pmf)

    @classmethod
    def from_law(cls, law: CanonicalLaw) -> "_PmfSampler":
        omega = law.spec.omega
        if omega != INF:
            k = min(int(omega), _ALIAS_KCAP)
        else:
            k = 63
            while k < _ALIAS_KCAP and law.pi_tail(k + 1) >= _TAIL_EPS:
                k = min(_ALIAS_KCAP, 2 * k)
        head = law.pi_array(k)
        tail = 0.0
        blk = None
        if omega == INF or omega > k:
            # pi_tail can be a crude upper bound right at the radius, so
            # cross it against the head complement
            tail = max(0.0, min(law.pi_tail(k + 1),
                                1.0 - float(head.sum())))
            lt = math.log(law.tau) if 0.0 < law.tau < INF else 0.0
            lp = math.log(law.phi_tau)

            def blk(lo, hi, law=law, lt=lt, lp=lp):
                ks = np.arange(lo, hi)
                return np.exp(law.spec.logw(lo, hi) + ks * lt - lp)

        return cls(head, tail, blk)

    @classmethod
    def from_array(cls, pmf) -> "_PmfSampler":
        return cls(np.asarray(pmf, dtype=float))

    def draw(self, gen: np.random.Generator, size) -> np.ndarray:
        out = self.alias.draw(gen, size=size).astype(np.int64, copy=False)
        if self.tail > 0.0:
            hot = out == self.khead + 1
            if np.any(hot):
                flat = out.reshape(-1)
                for pos in np.flatnonzero(hot.reshape(-1)):
                    flat[pos] = self._walk(gen)
        return out

    def _walk(self, gen) -> int:
        u = gen.random() * self.tail
        lo = self.khead + 1
        c = 0.0
        step = 1024
        while True:
            cs = np.cumsum(self.tail_block(lo, lo + step)) + c
            j = int(np.searchsorted(cs, u, side="left"))
            if j < step:
                return lo + j
            c = float(cs[-1])
            lo += step
            # float drift can leave u above the reachable mass; the
            # escape then sits on ~1e-16 of probability
            if lo - self.khead > 50_000_000:
                return lo
            step = min(2 * step, 1 << 20)


@lru_cache(maxsize=64)
def _law_sampler(law: CanonicalLaw) -> _PmfSampler:
    return _PmfSampler.from_law(law)


@lru_cache(maxsize=64)
def _spine_sampler(law: CanonicalLaw) -> _PmfSampler:
    """Sampler for the size-biased law k pi_k / mu (support k >= 1)."""
    mu = law.mu
    if not mu > 0.0:
        raise ValueError("size-biasing needs a positive-mean law")
    omega = law.spec.omega
    if omega != INF:
        k = min(int(omega), _ALIAS_KCAP)
    else:
        k = 63
        while k < _ALIAS_KCAP and \
                (k + 1) * law.pi_tail(k + 1) / mu >= _TAIL_EPS:
            k = min(_ALIAS_KCAP, 2 * k)
    ks = np.arange(k + 1, dtype=float)
    head = ks * law.pi_array(k) / mu
    tail = 0.0
    blk = None
    if omega == INF or omega > k:
        tail = max(0.0, 1.0 - float(head.sum()))
        lt = math.log(law.tau) if 0.0 < law.tau < INF else 0.0
        lp = math.log(law.phi_tau)

        def blk(lo, hi, law=law, lt=lt, lp=lp, mu=mu):
            ks = np.arange(lo, hi)
            return ks * np.exp(law.spec.logw(lo, hi) + ks * lt - lp) / mu

    return _PmfSampler(head, tail, blk)


class _DrawBuf:
    """Chunked scalar reads off a vectorized sampler."""

    __slots__ = ("sampler", "gen", "buf", "pos")

    def __init__(self, sampler, gen):
        self.sampler = sampler
        self.gen = gen
        self.buf = ()
        self.pos = 0

    def take(self) -> int:
        if self.pos == len(self.buf):
            self.buf = self.sampler.draw(self.gen, 256)
            self.pos = 0
        v = int(self.buf[self.pos])
        self.pos += 1
        return v


# ---------------------------------------------------------------------------
# allocations and the cycle rotation

@dataclass(frozen=True, eq=False)
class Allocation:
    """Box occupancy vector; y[i] is the load of box i+1."""

    y: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.y, dtype=np.int64)
        if arr.ndim != 1:
            raise ValueError("occupancy must be a vector")
        if arr.size and int(arr.min()) < 0:
            raise ValueError("occupancies must be nonnegative")
        object.__setattr__(self, "y", arr)

    @property
    def n(self) -> int:
        return int(self.y.size)

    @property
    def m(self) -> int:
        return int(self.y.sum())

    def __len__(self):
        return int(self.y.size)

    def __iter__(self):
        return iter(self.y.tolist())


def cyclic_shifts(x, r: Optional[int] = None) -> list:
    """Left-rotations of x whose proper partial sums all stay above -r.

    For integer entries >= -1 summing to -r <= 0 there are exactly r
    such rotations; r defaults to -sum(x).  Returns the rotation
    amounts j (rotate left by j) in increasing order.
    """
    arr = np.asarray(x, dtype=np.int64)
    n = arr.size
    if n == 0:
        raise ValueError("empty sequence")
    s = int(arr.sum())
    if r is None:
        r = -s
    if s != -r or r < 0:
        raise ValueError(f"need sum(x) == -r <= 0, got sum {s} and r {r}")
    if r == 0:
        return []
    out = []
    for j in range(n):
        ps = np.cumsum(np.roll(arr, -j))
        if (ps[:-1] > -r).all():
            out.append(j)
    return out


def alloc_to_tree(a) -> OrderedTree:
    """The unique cyclic rotation of an (n-1, n) allocation that is a
    depth-first degree sequence.

    Rotates to start right after the first global minimum of the
    partial sums of y - 1; anything whose mass is not n - 1 has no tree
    rotation and raises invalid-degree-sequence.
    """
    y = a.y if isinstance(a, Allocation) else np.asarray(a, dtype=np.int64)
    n = int(y.size)
    if n == 0 or int(y.sum()) != n - 1:
        raise InvalidDegreeSequence(
            f"allocation mass {int(y.sum()) if n else 0} != n-1 = {n - 1}",
            index=n)
    s = np.cumsum(y - 1)
    j = int(np.argmin(s))
    d = np.roll(y, -(j + 1))
    return OrderedTree(tuple(int(v) for v in d))


def rotate_allocations(Y) -> np.ndarray:
    """Row-wise tree rotation for a matrix of (n-1, n) allocations."""
    Y = np.asarray(Y, dtype=np.int64)
    one = Y.ndim == 1
    if one:
        Y = Y[None, :]
    n = Y.shape[1]
    sums = Y.sum(axis=1)
    if not (sums == n - 1).all():
        bad = int(np.nonzero(sums != n - 1)[0][0])
        raise InvalidDegreeSequence(
            f"row {bad} has mass {int(sums[bad])} != {n - 1}", index=n)
    S = np.cumsum(Y - 1, axis=1)
    j = np.argmin(S, axis=1)
    cols = (np.arange(n)[None, :] + (j + 1)[:, None]) % n
    out = np.take_along_axis(Y, cols, axis=1)
    return out[0] if one else out


# ---------------------------------------------------------------------------
# exact sampler against a partition table

_TABLE_BITS: WeakKeyDictionary = WeakKeyDictionary()


def _table_bits(table: PartitionTable):
    got = _TABLE_BITS.get(table)
    if got is None:
        spec = table.spec
        kmax = int(min(table.m_max, spec.omega))
        ker = spec.logw(0, kmax + 1)
        rows = np.vstack([table.log_row(i) for i in range(table.n_max + 1)])
        got = (ker, rows)
        _TABLE_BITS[table] = got
    return got


def sample_alloc_exact(table: PartitionTable, m: int, n: int,
                       rng) -> Allocation:
    """One conditioned occupancy draw by sequential box conditioning.

    Box i takes k with probability w_k Z(rem - k, r - 1) / Z(rem, r)
    where rem is the unplaced mass and r the boxes left; the telescoping
    product is the conditioned law exactly, up to table rounding.  Cost
    is O(n * support width) per draw.
    """
    gen = as_generator(rng)
    if m < 0 or n < 0:
        raise ValueError("m and n must be nonnegative")
    if n == 0:
        if m:
            raise InfeasibleAllocation("no boxes but positive mass")
        return Allocation(np.zeros(0, dtype=np.int64))
    if not table.ok(m, n):
        raise InfeasibleAllocation(f"Z({m},{n}) = 0")
    ker, rows = _table_bits(table)
    y = np.zeros(n, dtype=np.int64)
    rem = m
    for i in range(n - 1):
        if rem == 0:
            break       # only the all-empty continuation is left
        row = rows[n - 1 - i]
        kk = min(rem, ker.size - 1)
        lp = ker[:kk + 1] + row[rem - kk:rem + 1][::-1]
        mx = lp.max()
        if mx == -np.inf:
            raise SimgenError(
                "conditional row underflowed; rebuild the table with "
                f"({m},{n}) near its corner")
        p = np.exp(lp - mx)
        c = np.cumsum(p)
        k = int(np.searchsorted(c, gen.random() * c[-1], side="right"))
        y[i] = min(k, kk)
        rem -= y[i]
    if rem:
        y[n - 1] = rem
    return Allocation(y)


# ---------------------------------------------------------------------------
# rejection samplers

def _log_bit_acceptance(m: int, n: int) -> float:
    # mass at m of a sum of n geometric(1/2) variables
    if n < 1:
        return -INF
    return (math.lgamma(m + n) - math.lgamma(m + 1) - math.lgamma(n)
            - (m + n) * math.log(2.0))


def _decode_bit_row(wrow: np.ndarray, L: int, n: int) -> np.ndarray:
    bits = np.unpackbits(
        np.frombuffer(wrow.astype("<u8").tobytes(), dtype=np.uint8),
        bitorder="little")[:L]
    pos = np.flatnonzero(bits)
    return np.diff(pos, prepend=-1) - 1


def _bit_rejection_rows(m: int, n: int, gen, rows: int,
                        max_trials: int) -> np.ndarray:
    """Rejection from iid geometric(1/2) boxes, run on raw bit words.

    A trial is m+n fair bits; ones close boxes, zeros are balls, so the
    trial is a valid occupancy row iff it has exactly n ones and ends
    with a one.  That event is {box sum == m}, and the gap decoding of a
    kept trial has the conditioned law of any weight family that is
    geometric after tilting.  Orders of magnitude faster than drawing
    the boxes as integers.
    """
    L = m + n
    W = (L + 63) // 64
    rbits = L - 64 * (W - 1)
    mask = np.uint64((1 << rbits) - 1)
    last = np.uint64(1 << (rbits - 1))
    out = np.empty((rows, n), dtype=np.int64)
    got = 0
    trials = 0
    budget = max_trials * rows
    p = math.exp(_log_bit_acceptance(m, n))
    while got < rows:
        if trials >= budget:
            raise AcceptanceTooLow(
                f"{got}/{rows} rows accepted after {trials} trials "
                f"at (m,n)=({m},{n})")
        want = int((rows - got) / max(p, 1e-12) * 1.25) + 64
        c = max(64, min(want, max(_CHUNK_WORDS // W, 1), budget - trials))
        words = gen.integers(0, 1 << 64, size=(c, W), dtype=np.uint64)
        words[:, -1] &= mask
        ones = np.bitwise_count(words).sum(axis=1, dtype=np.int64)
        good = np.nonzero((ones == n) & ((words[:, -1] & last) != 0))[0]
        for i in good[:rows - got]:
            out[got] = _decode_bit_row(words[i], L, n)
            got += 1
        trials += c
    return out


def _alias_rejection_rows(law: CanonicalLaw, m: int, n: int, gen, rows: int,
                          max_trials: int) -> np.ndarray:
    sampler = _law_sampler(law)
    out = np.empty((rows, n), dtype=np.int64)
    got = 0
    trials = 0
    budget = max_trials * rows
    batch = 256
    while got < rows:
        if trials >= budget:
            raise AcceptanceTooLow(
                f"{got}/{rows} rows accepted after {trials} trials "
                f"at (m,n)=({m},{n})")
        b = max(1, min(batch, _CHUNK_CELLS // max(n, 1), budget - trials))
        draws = sampler.draw(gen, (b, n))
        hit = np.nonzero(draws.sum(axis=1) == m)[0][:rows - got]
        if hit.size:
            out[got:got + hit.size] = draws[hit]
            got += hit.size
        trials += b
        batch = min(batch * 4, 1 << 20)
    return out


def _rejection_rows(law: CanonicalLaw, m: int, n: int, gen, rows: int,
                    max_trials: int) -> np.ndarray:
    if m < 0 or n < 0:
        raise ValueError("m and n must be nonnegative")
    if n == 0:
        if m:
            raise InfeasibleAllocation("no boxes but positive mass")
        return np.zeros((rows, 0), dtype=np.int64)
    try:
        if not feasible(law.spec, m, n):
            raise InfeasibleAllocation(f"Z({m},{n}) = 0")
    except CapacityExceeded:
        pass
    if law.spec.kind in ("uniform", "geometric") and \
            _log_bit_acceptance(m, n) >= math.log(1e-6):
        return _bit_rejection_rows(m, n, gen, rows, max_trials)
    return _alias_rejection_rows(law, m, n, gen, rows, max_trials)


def sample_alloc_rejection(law: CanonicalLaw, m: int, n: int, rng,
                           max_trials: int = 1_000_000) -> Allocation:
    """One occupancy draw by filtering iid proposal rows on their sum.

    The proposal tilt in law does not affect the conditioned output;
    it only moves the acceptance rate.  Raises acceptance-too-low once
    max_trials rows were rejected.
    """
    gen = as_generator(rng)
    return Allocation(_rejection_rows(law, m, n, gen, 1, max_trials)[0])


# ---------------------------------------------------------------------------
# split-conditioning engine for batched exact draws

def _split_sizes(n: int) -> list:
    need = {1}
    stack = [n]
    while stack:
        s = stack.pop()
        if s in need:
            continue
        need.add(s)
        a = s >> 1
        stack.append(a)
        stack.append(s - a)
    return sorted(need)


def _logconv(la: np.ndarray, lb: np.ndarray, cap: int) -> np.ndarray:
    ma = float(la.max())
    mb = float(lb.max())
    size = min(la.size + lb.size - 1, cap)
    if not (math.isfinite(ma) and math.isfinite(mb)):
        return np.full(size, -np.inf)
    out = np.convolve(np.exp(la - ma), np.exp(lb - mb))[:cap]
    with np.errstate(divide="ignore"):
        return np.log(out) + (ma + mb)


class _SplitRows:
    """Box-sum log rows at the halving segment sizes of n.

    Sampling conditions the half sum S_a | S_s = t recursively, so one
    batch only ever touches O(log n) distinct segment sizes instead of
    n table rows; rows share a probability tilt at the target density
    so their peaks sit near the conditioning targets.
    """

    def __init__(self, spec: WeightSpec, m: int, n: int, tol: float = 1e-12):
        if n < 1:
            raise ValueError("need n >= 1")
        sspec, alpha = shift_support(spec)
        mq = m - alpha * n
        if mq < 0:
            raise InfeasibleAllocation(f"m = {m} is below {alpha} per box")
        kmax = int(min(mq, sspec.omega))
        ker = sspec.logw(0, kmax + 1).astype(float)
        if sspec.rho is not None and sspec.rho > 0 and mq > 0:
            try:
                t = tau_of(sspec, mq / n, tol=max(tol, 1e-13))
                ph = phi(sspec, t)
                if 0.0 < t < INF and math.isfinite(ph) and ph > 0.0:
                    ker = ker + np.arange(kmax + 1) * math.log(t) \
                        - math.log(ph)
            except (SimgenError, ValueError, OverflowError):
                pass
        self.alpha = alpha
        self.mq = mq
        self.n = n
        rows = {1: ker}
        for s in _split_sizes(n)[1:]:
            a = s >> 1
            rows[s] = _logconv(rows[a], rows[s - a], mq + 1)
        self.rows = rows
        top = rows[n]
        if mq >= top.size or not math.isfinite(top[mq]):
            raise InfeasibleAllocation(
                f"Z({m},{n}) is zero or below float range")

    def sample(self, gen: np.random.Generator, size: int) -> np.ndarray:
        out = np.empty((size, self.n), dtype=np.int64)
        if size:
            tops = np.full(size, self.mq, dtype=np.int64)
            self._fill(self.n, tops, out, 0, gen)
        if self.alpha:
            out += self.alpha
        return out

    def _fill(self, s, targets, out, col, gen):
        if s == 1:
            out[:, col] = targets
            return
        a = s >> 1
        ra = self.rows[a]
        rb = self.rows[s - a]
        ja = np.empty(targets.size, dtype=np.int64)
        order = np.argsort(targets, kind="stable")
        st = targets[order]
        uniq, starts = np.unique(st, return_index=True)
        bounds = np.append(starts, targets.size)
        for g in range(uniq.size):
            t = int(uniq[g])
            sel = order[bounds[g]:bounds[g + 1]]
            lo = max(0, t - (rb.size - 1))
            hi = min(ra.size - 1, t)
            lp = ra[lo:hi + 1] + rb[t - hi:t - lo + 1][::-1]
            mx = lp.max()
            p = np.exp(lp - mx)
            c = np.cumsum(p)
            u = gen.random(sel.size) * c[-1]
            j = np.searchsorted(c, u, side="right")
            np.minimum(j, hi - lo, out=j)
            ja[sel] = lo + j
        self._fill(a, ja, out, col, gen)
        self._fill(s - a, targets - ja, out, col + a, gen)


@lru_cache(maxsize=8)
def _split_rows(spec: WeightSpec, m: int, n: int) -> _SplitRows:
    return _SplitRows(spec, m, n)


# ---------------------------------------------------------------------------
# public batched samplers

def _auto_strategy(spec: WeightSpec, m: int, n: int) -> str:
    lam = m / n
    try:
        law = canonical_law(spec, lam)
    except SimgenError:
        return "exact"
    if law.sigma2 == INF or not law.sigma2 > 0.0 or lam > law.nu + 1e-9:
        return "exact"
    acc = spec.span / math.sqrt(2.0 * math.pi * law.sigma2 * n)
    return "rejection" if acc >= 1e-5 else "exact"


def sample_allocations(spec: WeightSpec, m: int, n: int, rng, size: int = 1,
                       strategy: str = "auto",
                       max_trials: int = 1_000_000) -> np.ndarray:
    """size occupancy rows of the (m, n) conditioned law, as a matrix.

    strategy "exact" conditions recursively on half sums (no table
    needed, O(log n) cached convolution rows); "rejection" filters iid
    proposal rows on their sum and needs a declared radius; "auto"
    takes rejection when the predicted acceptance is workable (finite
    variance, subcritical density, rate >= 1e-5) and exact otherwise.
    """
    gen = as_generator(rng)
    if size < 0:
        raise ValueError("size must be nonnegative")
    if m < 0 or n < 0:
        raise ValueError("m and n must be nonnegative")
    if n == 0:
        if m:
            raise InfeasibleAllocation("no boxes but positive mass")
        return np.zeros((size, 0), dtype=np.int64)
    if not feasible(spec, m, n):
        raise InfeasibleAllocation(f"Z({m},{n}) = 0")
    if strategy == "auto":
        strategy = _auto_strategy(spec, m, n)
    if strategy == "rejection":
        law = canonical_law(spec, m / n)
        return _rejection_rows(law, m, n, gen, size, max_trials)
    if strategy != "exact":
        raise ValueError(f"unknown strategy {strategy!r}")
    return _split_rows(spec, m, n).sample(gen, size)


def sample_trees(spec: WeightSpec, n: int, rng, size: int = 1,
                 strategy: str = "auto",
                 max_trials: int = 1_000_000) -> np.ndarray:
    """size depth-first degree rows of the n-node conditioned tree."""
    if n < 1:
        raise ValueError("trees need n >= 1")
    gen = as_generator(rng)
    if n == 1:
        if not feasible(spec, 0, 1):
            raise InfeasibleAllocation("a single node needs w_0 > 0")
        return np.zeros((size, 1), dtype=np.int64)
    Y = sample_allocations(spec, n - 1, n, gen, size=size, strategy=strategy,
                           max_trials=max_trials)
    return rotate_allocations(Y)


def sample_tree(spec: WeightSpec, n: int, rng, strategy: str = "auto",
                max_trials: int = 1_000_000) -> OrderedTree:
    row = sample_trees(spec, n, rng, size=1, strategy=strategy,
                       max_trials=max_trials)[0]
    return OrderedTree(tuple(int(v) for v in row))


# ---------------------------------------------------------------------------
# unconditioned branching trees and limit balls

def _any_sampler(law) -> _PmfSampler:
    if isinstance(law, CanonicalLaw):
        return _law_sampler(law)
    if isinstance(law, KestenSpec):
        return _law_sampler(law.law)
    return _PmfSampler.from_array(law)


def sample_gw(law, rng, node_budget: int = GW_NODE_BUDGET
              ) -> Optional[OrderedTree]:
    """One unconditioned branching tree in depth-first order.

    law is a CanonicalLaw or an explicit offspring pmf vector.  Returns
    None once the node count passes node_budget; for supercritical laws
    that happens with positive probability, so None is an answer about
    the sampled tree (it grew past the budget), not a failure.
    """
    gen = as_generator(rng)
    buf = _DrawBuf(_any_sampler(law), gen)
    degs = []
    pending = 1
    while pending:
        k = buf.take()
        degs.append(k)
        pending += k - 1
        if len(degs) > node_budget:
            return None
    return OrderedTree(tuple(degs))


@dataclass(frozen=True)
class KestenSpec:
    """Offspring data for the size-biased limit tree.

    Wraps a canonical law with mean mu <= 1.  Spine nodes reproduce by
    the size-biased law k pi_k / mu and the spine ends (the degree
    comes out infinite) with probability 1 - mu at every level.
    """

    law: CanonicalLaw

    def __post_init__(self):
        if self.law.mu > 1.0 + 1e-9:
            raise ValueError(
                f"spine construction needs mean <= 1, got {self.law.mu}")

    @classmethod
    def from_spec(cls, spec: WeightSpec, lam: float = 1.0) -> "KestenSpec":
        return cls(canonical_law(spec, lam))

    @property
    def mu(self) -> float:
        return self.law.mu

    @property
    def infinity_mass(self) -> float:
        return max(0.0, 1.0 - self.law.mu)

    def pi(self, k: int) -> float:
        return self.law.pi(k)


@dataclass(frozen=True)
class KestenBall(OrderedTree):
    """Left ball of a limit tree.

    explosion is the depth-first index of the infinite-degree node when
    one lies inside the ball (its visible degree is the radius), else
    None.
    """

    explosion: Optional[int] = None


def _gw_ball(buf: _DrawBuf, m: int, depth0: int, cell: list
             ) -> Optional[list]:
    # depth-truncated unconditioned subtree with the left-ball child
    # cap; children at equal depth are iid, so stack order is harmless
    out = []
    stack = [depth0]
    while stack:
        d = stack.pop()
        cell[0] -= 1
        if cell[0] < 0:
            return None
        if d >= m:
            out.append(0)
            continue
        k = buf.take()
        keep = min(k, m)
        out.append(keep)
        stack.extend([d + 1] * keep)
    return out


def _spine_ball(law: CanonicalLaw, m: int, gen, node_budget: int,
                inf_mass: float) -> Optional[KestenBall]:
    if m < 0:
        raise ValueError("radius must be nonnegative")
    cell = [int(node_budget)]
    gwbuf = _DrawBuf(_law_sampler(law), gen)
    spine = _spine_sampler(law) if law.mu > 0.0 else None
    levels = []
    bottom = None
    exp_rel = None
    depth = 0
    while True:
        cell[0] -= 1
        if cell[0] < 0:
            return None
        if depth == m:
            bottom = [0]
            break
        if inf_mass > 0.0 and gen.random() < inf_mass:
            # the spine degree came out infinite; the ball sees exactly
            # m children, all plain subtrees
            bottom = [m]
            for _ in range(m):
                g = _gw_ball(gwbuf, m, depth + 1, cell)
                if g is None:
                    return None
                bottom.extend(g)
            exp_rel = 0
            break
        k = int(spine.draw(gen, 1)[0])
        s = int(gen.integers(1, k + 1))
        vis = min(k, m)
        if s > m:
            # spine child sits beyond the visible window: every kept
            # child is a plain subtree and the spine leaves the ball
            bottom = [vis]
            for _ in range(vis):
                g = _gw_ball(gwbuf, m, depth + 1, cell)
                if g is None:
                    return None
                bottom.extend(g)
            break
        before = []
        for _ in range(s - 1):
            g = _gw_ball(gwbuf, m, depth + 1, cell)
            if g is None:
                return None
            before.extend(g)
        after = []
        for _ in range(vis - s):
            g = _gw_ball(gwbuf, m, depth + 1, cell)
            if g is None:
                return None
            after.extend(g)
        levels.append((vis, before, after))
        depth += 1
    seq = bottom
    for vis, before, after in reversed(levels):
        if exp_rel is not None:
            exp_rel += 1 + len(before)
        seq = [vis] + before + seq + after
    return KestenBall(tuple(seq), explosion=exp_rel)


def sample_kesten_ball(kspec, m: int, rng,
                       node_budget: int = GW_NODE_BUDGET
                       ) -> Optional[KestenBall]:
    """Radius-m left ball of the size-biased limit tree.

    Walks the spine level by level: each spine node draws from the
    size-biased law (infinite with probability 1 - mu), places its
    spine child uniformly among the children, and fills the other slots
    with independent unconditioned subtrees.  Truncation matches
    left_ball: height m and the first m children per node.  Returns
    None when node_budget is exhausted.
    """
    if isinstance(kspec, CanonicalLaw):
        kspec = KestenSpec(kspec)
    gen = as_generator(rng)
    return _spine_ball(kspec.law, m, gen, node_budget, kspec.infinity_mass)


def sample_size_biased_ball(law, m: int, rng,
                            node_budget: int = GW_NODE_BUDGET
                            ) -> Optional[KestenBall]:
    """Radius-m ball of the variant whose spine never terminates.

    Same construction as the size-biased limit ball with the infinite
    atom removed; needs mu > 0.  At mu == 1 the two laws coincide.
    """
    if isinstance(law, KestenSpec):
        law = law.law
    if not law.mu > 0.0:
        raise ValueError("an infinite spine needs mu > 0")
    gen = as_generator(rng)
    return _spine_ball(law, m, gen, node_budget, 0.0)


# ---------------------------------------------------------------------------
# forests

def sample_forest(spec: WeightSpec, m: int, n: int, rng) -> list:
    """A forest draw: n conditioned trees with m nodes in total.

    Component sizes come from an exact allocation draw under the
    derived size weights v_j = Z_j (v_0 = 0); each component is then an
    independent conditioned tree of its size.  The size weights are
    geometrically rescaled to stay inside float range, which leaves the
    conditioned law unchanged.  Builds a size table, so meant for
    moderate m.
    """
    gen = as_generator(rng)
    if m < 0 or n < 0:
        raise ValueError("m and n must be nonnegative")
    if n == 0:
        if m:
            raise InfeasibleAllocation("no components but positive mass")
        return []
    if m < n:
        raise InfeasibleAllocation(f"{n} components need at least {n} nodes")
    kmax = m - n + 1
    base = build_table(spec, m_max=kmax, n_max=kmax, mode="log")
    lz = np.full(kmax + 1, -np.inf)
    for j in range(1, kmax + 1):
        lz[j] = z_tree(base, j)
    fin = np.isfinite(lz[1:])
    if not fin.any():
        raise InfeasibleAllocation("no feasible component size")
    slope = float(np.max(lz[1:][fin] / np.arange(1, kmax + 1)[fin]))
    vals = np.exp(lz - np.arange(kmax + 1) * slope)
    vals[0] = 0.0
    try:
        dspec = explicit(vals.tolist())
    except EmptySupport:
        raise InfeasibleAllocation("no feasible component size")
    ftab = build_table(dspec, m_max=m, n_max=n, mode="log")
    sizes = sample_alloc_exact(ftab, m, n, gen).y
    return [sample_tree(spec, int(s), gen) for s in sizes]
