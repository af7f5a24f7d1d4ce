"""Weight sequences and their analytic quantities.

A weight sequence (w_k)_{k>=0} of nonnegative reals drives both models in
this package: ordered trees weighted by the product of w_{outdegree} over
nodes, and allocations of m balls into n boxes weighted by the product of
w_{occupancy} over boxes.  Everything downstream (partition tables,
samplers, predictions) consumes a WeightSpec plus the derived CanonicalLaw.

The generating function is phi(t) = sum_k w_k t^k with radius of
convergence rho, which is declared per family rather than estimated.  The
mean function psi(t) = t phi'(t) / phi(t) increases strictly on [0, rho),
and its boundary value nu = psi(rho) separates the phases: a target mean
lam <= nu can be matched exactly by the tilted probability law
pi_k = tau^k w_k / phi(tau) with psi(tau) = lam, while lam > nu cannot
(tau sticks at rho and the surplus condenses).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import (BoundaryImprecise, CapacityExceeded, EmptySupport,
                     RationalUnavailable, RhoRequired)

INF = float("inf")

# iteration ceiling for boundary series; partial sums beyond this are
# declared divergent (the quantity is then reported as inf)
DIVERGENCE_CEILING = 1.0e9
SERIES_BUDGET = 1 << 25


@dataclass(frozen=True)
class TailInfo:
    """Power-law tail metadata: w_k ~ c * k**(-beta) * base**k."""
    c: float
    beta: float
    base: float = 1.0


@dataclass(frozen=True)
class WeightSpec:
    kind: str
    params: tuple = ()
    rho: Optional[float] = None
    span: int = 1
    omega: float = INF          # largest support point, inf if unbounded
    alpha_min: int = 0          # smallest support point
    tail: Optional[TailInfo] = None
    # the callables are excluded from equality and hashing: two specs built
    # from the same family and parameters are the same spec, which is what
    # lets the analytics caches hit across separately constructed instances
    _logw: Callable = field(default=None, compare=False)
    _wq: Optional[Callable] = field(default=None, compare=False)  # k -> Fraction

    @property
    def name(self) -> str:
        if not self.params:
            return self.kind
        if self.kind == "explicit":
            return f"explicit[0..{int(self.omega)}]"
        inner = ",".join(str(p) for p in self.params)
        return f"{self.kind}({inner})"

    def logw(self, lo: int, hi: int) -> np.ndarray:
        """Log-weights for k in [lo, hi), -inf where w_k = 0."""
        ks = np.arange(lo, hi, dtype=np.int64)
        return self._logw(ks)

    def weight(self, k: int) -> float:
        if k < 0:
            return 0.0
        return float(np.exp(self._logw(np.array([k], dtype=np.int64))[0]))

    def weight_fraction(self, k: int) -> Fraction:
        if self._wq is None:
            raise RationalUnavailable(f"{self.name} has no exact rational weights")
        if k < 0:
            return Fraction(0)
        return self._wq(k)

    @property
    def has_exact(self) -> bool:
        return self._wq is not None

    def support_upto(self, kmax: int):
        """Sorted support points k <= kmax."""
        hi = int(min(kmax, self.omega)) + 1
        if hi <= 0:
            return []
        lw = self.logw(0, hi)
        return [int(k) for k in np.nonzero(np.isfinite(lw))[0]]

    def describe(self) -> dict:
        return {
            "kind": self.name,
            "rho": self.rho,
            "span": self.span,
            "omega": self.omega,
            "alpha_min": self.alpha_min,
            "exact_weights": self.has_exact,
            "tail": None if self.tail is None else
                    {"c": self.tail.c, "beta": self.tail.beta, "base": self.tail.base},
        }


def _compute_support_meta(logw_fn, omega_hint=INF, probe=257):
    """Scan the first support points for alpha_min, span, and emptiness."""
    hi = probe if omega_hint == INF else int(omega_hint) + 1
    ks = np.arange(0, max(hi, 1), dtype=np.int64)
    finite = np.isfinite(logw_fn(ks))
    pts = np.nonzero(finite)[0]
    if len(pts) == 0:
        raise EmptySupport("all probed weights are zero")
    alpha = int(pts[0])
    gaps = [int(p) - alpha for p in pts[1:]]
    span = 0
    for g in gaps:
        span = math.gcd(span, g)
    return alpha, span


def _make(kind, params, logw_fn, rho, omega, wq=None, tail=None, probe=257):
    alpha, span = _compute_support_meta(logw_fn, omega_hint=omega, probe=probe)
    return WeightSpec(kind=kind, params=tuple(params), rho=rho, span=span,
                      omega=omega, alpha_min=alpha, tail=tail,
                      _logw=logw_fn, _wq=wq)


# ---------------------------------------------------------------------------
# built-in families


def uniform() -> WeightSpec:
    """w_k = 1 for all k (ordered trees counted by shape)."""
    return _make("uniform", (), lambda k: np.zeros(len(k)), rho=1.0, omega=INF,
                 wq=lambda k: Fraction(1), tail=TailInfo(1.0, 0.0, 1.0))


def geometric(p) -> WeightSpec:
    """w_k = p (1-p)^k, the Ge(p) probability weights; rho = 1/(1-p)."""
    pq = Fraction(p)
    if not 0 < pq < 1:
        raise ValueError("geometric parameter must be in (0,1)")
    pf, qf = float(pq), float(1 - pq)
    lp, lq = math.log(pf), math.log(qf)
    return _make("geometric", (pf,), lambda k: lp + k * lq, rho=1.0 / qf,
                 omega=INF, wq=lambda k, pq=pq: pq * (1 - pq) ** k)


def poisson(a: float) -> WeightSpec:
    """w_k = e^-a a^k / k!, probability weights of Po(a)."""
    if a <= 0:
        raise ValueError("poisson parameter must be positive")
    la = math.log(a)
    return _make("poisson", (a,),
                 lambda k: -a + k * la - gammaln(k + 1.0), rho=INF, omega=INF)


def inv_factorial() -> WeightSpec:
    """w_k = 1/k!; same trees as poisson up to tilt (labelled rooted trees)."""
    return _make("inv_factorial", (), lambda k: -gammaln(k + 1.0), rho=INF,
                 omega=INF, wq=lambda k: Fraction(1, math.factorial(k)))


def binary_full() -> WeightSpec:
    """w_0 = w_2 = 1: full binary trees, support span 2."""
    def lw(k):
        out = np.full(len(k), -INF)
        out[(k == 0) | (k == 2)] = 0.0
        return out
    return _make("binary_full", (), lw, rho=INF, omega=2,
                 wq=lambda k: Fraction(1 if k in (0, 2) else 0))


def binary_pos() -> WeightSpec:
    """w_k = binom(2,k): binary trees with labelled missing slots."""
    return dary(2, _kind="binary_pos")


def motzkin() -> WeightSpec:
    """w_0 = w_1 = w_2 = 1 (unary-binary trees)."""
    def lw(k):
        out = np.full(len(k), -INF)
        out[k <= 2] = 0.0
        return out
    return _make("motzkin", (), lw, rho=INF, omega=2,
                 wq=lambda k: Fraction(1 if k <= 2 else 0))


def dary(d: int, _kind=None) -> WeightSpec:
    """w_k = binom(d,k): at most d children with labelled slots."""
    if d < 1:
        raise ValueError("d must be a positive integer")
    def lw(k, d=d):
        out = np.full(len(k), -INF)
        m = k <= d
        km = k[m].astype(float)
        out[m] = gammaln(d + 1.0) - gammaln(km + 1.0) - gammaln(d - km + 1.0)
        return out
    kind = _kind or "dary"
    params = () if _kind else (d,)
    return _make(kind, params, lw, rho=INF, omega=d,
                 wq=lambda k, d=d: Fraction(math.comb(d, k) if k <= d else 0))


def powerlaw(beta: float) -> WeightSpec:
    """w_k = (k+1)^-beta; rho = 1, polynomial tail with c = 1."""
    if beta <= 1:
        raise ValueError("beta must exceed 1 for a summable boundary")
    wq = None
    if float(beta).is_integer():
        b = int(beta)
        wq = lambda k, b=b: Fraction(1, (k + 1) ** b)
    return _make("powerlaw", (beta,),
                 lambda k: -beta * np.log(k + 1.0), rho=1.0, omega=INF,
                 wq=wq, tail=TailInfo(1.0, float(beta), 1.0))


def factorial() -> WeightSpec:
    """w_k = k!; rho = 0, so only the degenerate tilt exists."""
    return _make("factorial", (), lambda k: gammaln(k + 1.0), rho=0.0,
                 omega=INF, wq=lambda k: Fraction(math.factorial(k)))


def factorial_pow(alpha: float) -> WeightSpec:
    """w_k = (k!)^alpha for alpha > 0; rho = 0."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    wq = None
    if float(alpha).is_integer():
        a = int(alpha)
        wq = lambda k, a=a: Fraction(math.factorial(k) ** a)
    return _make("factorial_pow", (alpha,),
                 lambda k: alpha * gammaln(k + 1.0), rho=0.0, omega=INF, wq=wq)


def rooted_forest() -> WeightSpec:
    """w_k = k^(k-1)/k! for k >= 1: component sizes of rooted labelled forests."""
    def lw(k):
        out = np.full(len(k), -INF)
        m = k >= 1
        km = k[m].astype(float)
        out[m] = (km - 1) * np.log(km) - gammaln(km + 1.0)
        return out
    return _make("rooted_forest", (), lw, rho=math.exp(-1), omega=INF,
                 wq=lambda k: Fraction(k ** (k - 1), math.factorial(k)) if k >= 1 else Fraction(0),
                 tail=TailInfo(1.0 / math.sqrt(2 * math.pi), 1.5, math.e))


def unrooted_forest() -> WeightSpec:
    """w_k = k^(k-2)/k! for k >= 1: component sizes of unrooted labelled forests."""
    def lw(k):
        out = np.full(len(k), -INF)
        m = k >= 1
        km = k[m].astype(float)
        out[m] = (km - 2) * np.log(km) - gammaln(km + 1.0)
        return out
    def wq(k):
        if k < 1:
            return Fraction(0)
        if k == 1:
            return Fraction(1)
        return Fraction(k ** (k - 2), math.factorial(k))
    return _make("unrooted_forest", (), lw, rho=math.exp(-1), omega=INF,
                 wq=wq, tail=TailInfo(1.0 / math.sqrt(2 * math.pi), 2.5, math.e))


def loglaw() -> WeightSpec:
    """w_k = 1/k for k >= 1; phi(t) = -log(1-t)."""
    def lw(k):
        out = np.full(len(k), -INF)
        m = k >= 1
        out[m] = -np.log(k[m].astype(float))
        return out
    return _make("loglaw", (), lw, rho=1.0, omega=INF,
                 wq=lambda k: Fraction(1, k) if k >= 1 else Fraction(0),
                 tail=TailInfo(1.0, 1.0, 1.0))


def explicit(ws: Sequence, rho: Optional[float] = None) -> WeightSpec:
    """Finite weight list w_0..w_K.

    The analytic radius must still be declared for tau/nu computations
    (rho=None defers the error to first use).  Entries may be Fractions,
    ints, or floats; exact rational arithmetic is available when every
    entry converts exactly.
    """
    wq_tuple = tuple(Fraction(w) for w in ws)
    if not any(wq_tuple):
        raise EmptySupport("explicit weight list is all zero")
    wf = np.array([float(w) for w in wq_tuple])
    with np.errstate(divide="ignore"):
        lw_arr = np.log(wf)
    omega = max(i for i, w in enumerate(wq_tuple) if w > 0)
    def lw(k, arr=lw_arr):
        out = np.full(len(k), -INF)
        m = (k >= 0) & (k < len(arr))
        out[m] = arr[k[m]]
        return out
    return _make("explicit", (wq_tuple,), lw, rho=rho, omega=omega,
                 wq=lambda k, t=wq_tuple: t[k] if k < len(t) else Fraction(0),
                 probe=omega + 1)


_FAMILY_FACTORIES = {
    "uniform": uniform, "geometric": geometric, "poisson": poisson,
    "inv_factorial": inv_factorial, "binary_full": binary_full,
    "binary_pos": binary_pos, "motzkin": motzkin, "dary": dary,
    "powerlaw": powerlaw, "factorial": factorial,
    "factorial_pow": factorial_pow, "rooted_forest": rooted_forest,
    "unrooted_forest": unrooted_forest, "loglaw": loglaw,
}


def by_name(name: str) -> WeightSpec:
    """Parse a family name like 'uniform', 'dary(3)' or 'powerlaw(2.5)'."""
    m = re.fullmatch(r"\s*([a-z_]+)\s*(?:\(([^)]*)\))?\s*", name)
    if not m or m.group(1) not in _FAMILY_FACTORIES:
        raise ValueError(f"unknown weight family: {name!r}")
    fac = _FAMILY_FACTORIES[m.group(1)]
    if m.group(2) is None:
        return fac()
    args = []
    for tok in m.group(2).split(","):
        tok = tok.strip()
        args.append(int(tok) if re.fullmatch(r"-?\d+", tok) else float(tok))
    return fac(*args)


# ---------------------------------------------------------------------------
# transforms


def tilt(spec: WeightSpec, a, b) -> WeightSpec:
    """Equivalent weights w~_k = a b^k w_k.

    Leaves every conditioned law invariant; rho, tau and partition values
    transform by the usual cocycle.
    """
    af, bf = float(a), float(b)
    if af <= 0 or bf <= 0:
        raise ValueError("tilt parameters must be positive")
    la, lb = math.log(af), math.log(bf)
    base_logw = spec._logw
    def lw(k, base=base_logw, la=la, lb=lb):
        return la + k * lb + base(k)
    wq = None
    if spec._wq is not None:
        try:
            aq, bq = Fraction(a), Fraction(b)
            wq = lambda k, base=spec._wq, aq=aq, bq=bq: aq * bq ** k * base(k)
        except (TypeError, ValueError):
            wq = None
    tail = None
    if spec.tail is not None:
        tail = TailInfo(af * spec.tail.c, spec.tail.beta, bf * spec.tail.base)
    rho = None if spec.rho is None else spec.rho / bf
    return WeightSpec(kind="tilt", params=(spec.name, af, bf), rho=rho,
                      span=spec.span, omega=spec.omega,
                      alpha_min=spec.alpha_min, tail=tail, _logw=lw, _wq=wq)


def shift_support(spec: WeightSpec):
    """Drop the leading zeros: w~_k = w_{k+alpha} with alpha = alpha_min.

    Returns (shifted_spec, alpha).  An allocation of m balls in n boxes
    under the original weights corresponds to (m - alpha n, n) under the
    shifted ones.  Identity when alpha_min == 0.
    """
    alpha = spec.alpha_min
    if alpha == 0:
        return spec, 0
    base_logw = spec._logw
    def lw(k, base=base_logw, a=alpha):
        return base(k + a)
    wq = None
    if spec._wq is not None:
        wq = lambda k, base=spec._wq, a=alpha: base(k + a)
    tail = None
    if spec.tail is not None:
        c = spec.tail.c * spec.tail.base ** alpha
        tail = TailInfo(c, spec.tail.beta, spec.tail.base)
    omega = spec.omega if spec.omega == INF else spec.omega - alpha
    return WeightSpec(kind="shift", params=(spec.name, alpha), rho=spec.rho,
                      span=spec.span, omega=omega, alpha_min=0, tail=tail,
                      _logw=lw, _wq=wq), alpha


# ---------------------------------------------------------------------------
# series engine

def _series_sum(spec: WeightSpec, t: float, moment: int = 0, start: int = 0,
                tol: float = 1e-12, budget: int = SERIES_BUDGET,
                ceiling: float = DIVERGENCE_CEILING):
    """Partial-sum evaluation of sum_k k^moment w_k t^k over k >= start.

    Returns (value, flag) with flag in {"converged", "diverged", "budget"}.
    Terms are nonnegative, so the partial sum is always a lower bound.
    Blocks double in size; the tail is bounded by the observed block-sum
    ratio, which covers geometric decay as well as polynomial boundary
    decay (block sums of k^-s terms over doubling windows shrink by
    2^(1-s) per block).
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    lo = max(start, spec.alpha_min)
    if t == 0.0:
        if lo > 0:
            return 0.0, "converged"
        w0 = spec.weight(0)
        return (w0 if moment == 0 else 0.0), "converged"
    logt = math.log(t)
    total = 0.0
    prev_block = None
    prev_q = None
    flat_blocks = 0
    size = 64
    hi_support = spec.omega if spec.omega != INF else INF
    # growing-block divergence detection is only sound at the boundary;
    # interior series may grow transiently before the geometric decay bites
    at_boundary = spec.rho is not None and spec.rho != INF and t >= spec.rho
    while lo <= hi_support and lo < budget:
        hi = lo + size
        if hi_support != INF:
            hi = min(hi, int(hi_support) + 1)
        ks = np.arange(lo, hi, dtype=np.int64)
        logterms = spec._logw(ks) + ks * logt
        if moment:
            with np.errstate(divide="ignore"):
                kl = np.where(ks > 0, np.log(ks.astype(float)), -INF)
            logterms = logterms + moment * kl
        block = float(np.sum(np.exp(logterms)))
        total += block
        if not math.isfinite(total) or total > ceiling:
            return INF, "diverged"
        if hi_support != INF and hi > hi_support:
            return total, "converged"
        if prev_block is not None and prev_block > 0 and 0.0 < block < prev_block:
            # successive doubling blocks of a k^-s tail shrink by an almost
            # constant factor 2^(1-s); once the ratio has stabilized the
            # geometric tail sum serves as a correction, with error of the
            # order of its drift
            q = block / prev_block
            # the first ratio pairs the head block against the first tail
            # block and says nothing about the tail shape; require two
            if prev_q is not None and q < 0.999:
                tail = block * q / (1.0 - q)
                drift = abs(q - prev_q) / (1.0 - q)
                # factor 4: the drift proxy tracks the correction bias only
                # to first order
                if 4.0 * tail * (drift + 4.0 / lo) < tol:
                    return total + tail, "converged"
            prev_q = q
        elif prev_block is not None and prev_block > 0 and block >= prev_block:
            # growing (or flat) doubling blocks past the warmup region mean
            # the boundary series diverges for every regular tail here
            flat_blocks = flat_blocks + 1 if (at_boundary and lo >= 4096) else 0
            if flat_blocks >= 3:
                return INF, "diverged"
            prev_q = None
        if block == 0.0 and prev_block == 0.0:
            # two empty doubling blocks past the probe region: for the
            # families here support has no gaps that large
            return total, "converged"
        prev_block = block
        lo = hi
        # keep the windows doubling: equal-width windows drive the block
        # ratio to 1 and stall the geometric tail model
        size = min(size * 2, 1 << 24)
        if size == 1 << 24:
            # windows can no longer double, so the ratio model stalls;
            # grinding on at fixed width cannot settle anything further
            return total, "budget"
    return total, "budget"


def phi(spec: WeightSpec, t: float, tol: float = 1e-12) -> float:
    """Generating function sum_k w_k t^k.

    Inside the radius the truncation error is below tol; at t = rho the
    monotone boundary protocol applies and may return inf or raise
    BoundaryImprecise; beyond rho the value is inf by definition.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if spec.omega != INF:
        val, _ = _series_sum(spec, t, tol=tol)
        return val
    if spec.rho is None:
        raise RhoRequired("phi beyond the probe range needs a declared rho")
    if t > spec.rho:
        return INF
    val, flag = _series_sum(spec, t, tol=tol)
    if flag == "converged":
        return val
    if flag == "diverged":
        return INF
    if t < spec.rho:
        # interior points converge geometrically; a budget exhaust here
        # means tol was set far too small
        raise BoundaryImprecise("interior series did not reach tol",
                                partial=val, lower_bound=val)
    raise BoundaryImprecise("boundary series undecided within budget",
                            partial=val, lower_bound=val)


def psi(spec: WeightSpec, t: float, tol: float = 1e-12) -> float:
    """Mean function t phi'(t)/phi(t), strictly increasing on [0, rho)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return float(spec.alpha_min)
    if spec.omega == INF:
        if spec.rho is None:
            raise RhoRequired("psi needs a declared rho")
        if t > spec.rho:
            raise ValueError("psi is undefined beyond rho")
    den, dflag = _series_sum(spec, t, moment=0, tol=tol)
    if dflag == "diverged":
        return INF
    num, nflag = _series_sum(spec, t, moment=1, tol=tol * max(den, 1.0))
    if nflag == "diverged":
        return INF
    if "budget" in (dflag, nflag):
        raise BoundaryImprecise("psi series undecided within budget",
                                partial=num / den, lower_bound=num / den)
    return num / den


@lru_cache(maxsize=512)
def nu(spec: WeightSpec, tol: float = 1e-7) -> float:
    """Boundary mean nu = psi(rho), the largest matchable tilt mean.

    rho = 0 gives 0; rho = inf gives omega; a divergent phi or phi' at the
    boundary gives inf; otherwise the boundary series are summed directly,
    with a geometric extrapolation ladder as fallback when they are too
    slow to settle.
    """
    if spec.rho is None:
        raise RhoRequired("nu needs a declared rho")
    if spec.rho == 0:
        return 0.0
    if spec.rho == INF:
        return float(spec.omega)
    # the numerator t phi'(t) dominates: its divergence at rho already
    # settles nu = inf whether or not phi(rho) is finite
    num, nflag = _series_sum(spec, spec.rho, moment=1, tol=tol)
    if nflag == "diverged":
        return INF
    den, dflag = _series_sum(spec, spec.rho, moment=0, tol=tol)
    if dflag == "diverged":
        return INF
    if dflag == "converged" and nflag == "converged":
        return num / den
    # ladder fallback: psi at rho(1 - 2^-j) is increasing in j
    last = None
    for j in range(3, 46):
        t = spec.rho * (1.0 - 2.0 ** (-j))
        try:
            val = psi(spec, t, tol=tol)
        except BoundaryImprecise as exc:
            val = exc.partial
        if val > DIVERGENCE_CEILING:
            return INF
        if last is not None and abs(val - last) <= tol * max(1.0, abs(val)):
            return val
        last = val
    raise BoundaryImprecise("nu ladder did not settle", partial=last,
                            lower_bound=last or 0.0)


def tau_of(spec: WeightSpec, x: float, tol: float = 1e-12) -> float:
    """Unique t with psi(t) = x when x <= nu, else rho.

    Bisection on the bracket [0, rho], or geometric bracket growth when
    rho = inf.  Endpoints are never evaluated, so boundary blowups do not
    bite.
    """
    if x < 0:
        raise ValueError("target mean must be nonnegative")
    if spec.omega != INF and x >= spec.omega:
        raise CapacityExceeded(f"mean {x} not below the max support point {spec.omega}")
    if x < spec.alpha_min:
        raise CapacityExceeded(f"mean {x} below the min support point {spec.alpha_min}")
    if spec.rho is None:
        raise RhoRequired("tau needs a declared rho")
    if spec.rho == 0:
        return 0.0
    if x == spec.alpha_min:
        return 0.0
    v = nu(spec)
    if x >= v:
        return spec.rho

    def eval_psi(t):
        # when the target sits a hair under nu the bisection walks into
        # territory where the series cannot settle within budget; the
        # truncated ratio still orders correctly at our resolution
        try:
            return psi(spec, t, tol=1e-14)
        except BoundaryImprecise as exc:
            return exc.partial

    if spec.rho != INF:
        lo, hi = 0.0, spec.rho
    else:
        hi = 1.0
        while eval_psi(hi) < x:
            hi *= 2.0
            if hi > 1e300:
                raise CapacityExceeded("no finite tilt reaches the target mean")
        lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if eval_psi(mid) < x:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# canonical law


@dataclass(frozen=True)
class CanonicalLaw:
    """Tilted offspring/occupancy law matched to a target mean.

    pi_k = tau^k w_k / phi(tau) with tau = tau_of(min(lam, nu)); mu is the
    actual mean psi(tau) = min(lam, nu).  rho_Z is the radius of the
    tree-size generating series, tau/phi(tau).
    """
    spec: WeightSpec
    lam: float
    tau: float
    phi_tau: float
    mu: float
    nu: float
    sigma2: float
    case_label: str
    rho_Z: float

    @property
    def _atom(self):
        # degenerate laws are point masses: at the bottom of the support
        # for tau = 0, at the top for tau = inf
        if self.tau == 0.0:
            return self.spec.alpha_min
        if self.tau == INF:
            return int(self.spec.omega)
        return None

    def pi(self, k: int) -> float:
        atom = self._atom
        if atom is not None:
            return 1.0 if k == atom else 0.0
        if k < 0:
            return 0.0
        lw = self.spec._logw(np.array([k], dtype=np.int64))[0]
        return float(np.exp(lw + k * math.log(self.tau) - math.log(self.phi_tau)))

    def pi_array(self, kmax: int) -> np.ndarray:
        """pi_0..pi_kmax as a vector."""
        ks = np.arange(0, kmax + 1, dtype=np.int64)
        atom = self._atom
        if atom is not None:
            out = np.zeros(kmax + 1)
            if atom <= kmax:
                out[atom] = 1.0
            return out
        lw = self.spec._logw(ks)
        return np.exp(lw + ks * math.log(self.tau) - math.log(self.phi_tau))

    def pi_tail(self, k: int) -> float:
        """P(xi >= k), summed directly from index k (no cancellation)."""
        atom = self._atom
        if atom is not None:
            return 1.0 if k <= atom else 0.0
        val, flag = _series_sum(self.spec, self.tau, moment=0, start=k,
                                tol=1e-15 * self.phi_tau)
        if flag == "diverged":
            return 1.0
        return min(1.0, val / self.phi_tau)

    @property
    def alloc_regime(self) -> str:
        if self.lam < self.nu:
            return "subcritical"
        if self.lam == self.nu:
            return "critical"
        return "supercritical"


@lru_cache(maxsize=256)
def canonical_law(spec: WeightSpec, lam: float = 1.0,
                  tol: float = 1e-12) -> CanonicalLaw:
    """Canonical tilted law for target mean lam (lam = 1 for trees)."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if spec.omega != INF and lam > spec.omega:
        raise CapacityExceeded(f"mean {lam} exceeds max support {spec.omega}")
    if lam < spec.alpha_min:
        raise CapacityExceeded(f"mean {lam} below min support {spec.alpha_min}")
    if spec.rho is None:
        raise RhoRequired("canonical law needs a declared rho")
    v = nu(spec) if spec.rho != 0 else 0.0
    target = min(lam, v)
    if spec.rho == 0 or target <= spec.alpha_min:
        alpha = spec.alpha_min
        tau = 0.0
        phi_tau = spec.weight(0) if alpha == 0 else 0.0
        law = CanonicalLaw(spec=spec, lam=lam, tau=tau, phi_tau=phi_tau,
                           mu=float(alpha), nu=v, sigma2=0.0,
                           case_label=_case_label(spec, lam, v, 0.0),
                           rho_Z=0.0)
        return law

    if spec.omega != INF and target == spec.omega:
        # degenerate at the top: every box holds omega balls
        law = CanonicalLaw(spec=spec, lam=lam, tau=INF, phi_tau=INF,
                           mu=float(spec.omega), nu=v, sigma2=0.0,
                           case_label=_case_label(spec, lam, v, 0.0),
                           rho_Z=0.0)
        return law

    tau = tau_of(spec, target, tol=tol)
    den, dflag = _series_sum(spec, tau, moment=0, tol=tol)
    phi_tau = den
    mu = target
    m2, m2flag = _series_sum(spec, tau, moment=2, tol=1e-7 * max(den, 1.0))
    if m2flag == "diverged":
        sigma2 = INF
    elif m2flag == "budget":
        raise BoundaryImprecise("second moment undecided", partial=m2 / den,
                                lower_bound=m2 / den - mu * mu)
    else:
        sigma2 = m2 / den - mu * mu
    rho_Z = tau / phi_tau if phi_tau > 0 else 0.0
    return CanonicalLaw(spec=spec, lam=lam, tau=tau, phi_tau=phi_tau, mu=mu,
                        nu=v, sigma2=sigma2,
                        case_label=_case_label(spec, lam, v, sigma2),
                        rho_Z=rho_Z)


def _case_label(spec, lam, v, sigma2):
    if lam == 1.0:
        if spec.rho == 0:
            return "III"
        if v > 1.0 + 1e-9:
            return "Ia"
        if abs(v - 1.0) <= 1e-9:
            return "Ib"
        if v > 0:
            return "II"
        return "III"
    if lam < v:
        return "subcritical"
    if lam == v:
        return "critical"
    return "supercritical"


def classify(spec: WeightSpec, tol: float = 1e-9) -> dict:
    """Tree-mode phase of the weight sequence.

    Returns label in {Ia, Ib, II, III}, the sigma-squared refinement
    (I_alpha or I_beta) when nu >= 1, and the certificate quantities.
    """
    if spec.rho is None:
        raise RhoRequired("classification needs a declared rho")
    if spec.rho == 0:
        return {"label": "III", "refinement": None,
                "nu": 0.0, "tau": 0.0, "sigma2": 0.0}
    v = nu(spec)
    if v < tol:
        return {"label": "III", "refinement": None,
                "nu": v, "tau": 0.0, "sigma2": 0.0}
    if v < 1.0 - tol:
        tau1 = spec.rho
        return {"label": "II", "refinement": None,
                "nu": v, "tau": tau1, "sigma2": None}
    label = "Ib" if v <= 1.0 + tol else "Ia"
    if label == "Ib":
        # declaring nu = 1 puts the critical tilt at the boundary itself,
        # so the variance certificate is the boundary second moment; the
        # bisected tilt would sit undecidably close to rho instead
        den, dflag = _series_sum(spec, spec.rho, moment=0, tol=1e-9)
        m2, m2flag = _series_sum(spec, spec.rho, moment=2,
                                 tol=1e-9 * max(den, 1.0))
        sigma2 = m2 / den - v * v if m2flag == "converged" else INF
        tau1 = spec.rho
    else:
        law = canonical_law(spec, 1.0)
        sigma2, tau1 = law.sigma2, law.tau
    refinement = "I_alpha" if sigma2 < INF else "I_beta"
    return {"label": label, "refinement": refinement,
            "nu": v, "tau": tau1, "sigma2": sigma2}


# ---------------------------------------------------------------------------
# weight files

def parse_weight_text(text: str, with_mode: bool = False):
    """Parse the plain weight-file format.

    Header lines ``rho = <decimal or inf>`` and optional ``mode = tree|alloc``,
    then one ``<k> <w_k>`` entry per line with decimal or p/q values.
    Unlisted indices below the largest one get weight zero.  Returns the
    WeightSpec, or (WeightSpec, mode) when with_mode is set.
    """
    rho = None
    mode = "tree"
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"(rho|mode)\s*=\s*(\S+)", line)
        if m:
            if m.group(1) == "rho":
                rho = INF if m.group(2) in ("inf", "infinity") else float(m.group(2))
            else:
                if m.group(2) not in ("tree", "alloc"):
                    raise ValueError(f"line {lineno}: mode must be tree or alloc")
                mode = m.group(2)
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected '<k> <w>'")
        k = int(parts[0])
        if k < 0:
            raise ValueError(f"line {lineno}: negative index")
        w = Fraction(parts[1])
        if w < 0:
            raise ValueError(f"line {lineno}: negative weight")
        entries[k] = w
    if not entries:
        raise EmptySupport("weight file has no entries")
    kmax = max(entries)
    ws = [entries.get(k, Fraction(0)) for k in range(kmax + 1)]
    spec = explicit(ws, rho=rho)
    return (spec, mode) if with_mode else spec


def parse_weight_file(path, with_mode: bool = False):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_weight_text(fh.read(), with_mode=with_mode)


def format_weight_file(spec: WeightSpec, mode: str = "tree",
                       kmax: Optional[int] = None) -> str:
    if kmax is None:
        if spec.omega == INF:
            raise ValueError("kmax required for unbounded support")
        kmax = int(spec.omega)
    lines = []
    if spec.rho is not None:
        lines.append("rho = inf" if spec.rho == INF else f"rho = {spec.rho!r}")
    lines.append(f"mode = {mode}")
    for k in spec.support_upto(kmax):
        if spec.has_exact:
            w = spec.weight_fraction(k)
            lines.append(f"{k} {w.numerator}/{w.denominator}")
        else:
            lines.append(f"{k} {spec.weight(k)!r}")
    return "\n".join(lines) + "\n"
