"""Limit-law predictions and empirical comparison.

Three layers: probability metrics on integer laws, mergeable empirical
summaries of sampled trees and allocations, and closed-form prediction
objects (degree laws, maximum degrees and condensation, partition-value
asymptotics, forest maxima) with machine-readable comparison reports.

Predictions are asymptotic statements; a Prediction records the checked
validity conditions and declines (valid=False, with a reason) instead of
extrapolating outside them.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import SimgenError
from .weights import (INF, CanonicalLaw, WeightSpec, canonical_law, nu as
                      nu_of, phi, tau_of)

NORM_SLACK = 1e-9


# ---------------------------------------------------------------------------
# metrics

def _as_pmf(p, allow_deficit=False):
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("pmf must be a nonempty vector")
    if not np.isfinite(arr).all() or (arr < -1e-15).any():
        raise ValueError("pmf entries must be finite and nonnegative")
    s = float(arr.sum())
    if allow_deficit:
        if s > 1.0 + NORM_SLACK:
            raise ValueError(f"pmf mass {s} exceeds 1")
    elif abs(s - 1.0) > NORM_SLACK:
        raise ValueError(f"pmf mass {s} is not 1 within {NORM_SLACK}")
    return np.clip(arr, 0.0, None)


def _pad_pair(p, q):
    width = max(p.size, q.size)
    return (np.pad(p, (0, width - p.size)), np.pad(q, (0, width - q.size)))


def dist_tv(p, q) -> float:
    """Total variation distance, half the l1 difference."""
    a, b = _pad_pair(_as_pmf(p), _as_pmf(q))
    return float(0.5 * np.abs(a - b).sum())


def dist_kolmogorov(p, q) -> float:
    """Kolmogorov distance sup_x |P(X <= x) - P(Y <= x)| on the integers."""
    a, b = _pad_pair(_as_pmf(p), _as_pmf(q))
    return float(np.abs(np.cumsum(a) - np.cumsum(b)).max())


def dist_kolmogorov_mod(p, q) -> float:
    """Weighted Kolmogorov distance sup_x |F_p(x) - F_q(x)| / (1 + x).

    Laws live on the integers plus a point at infinity; any mass missing
    from a vector is read as mass at infinity, which the cdf never
    reaches.  The 1/(1+x) weight makes the metric ignore how far out the
    infinite part sits, so it metrizes convergence on N u {inf}.
    """
    a, b = _pad_pair(_as_pmf(p, allow_deficit=True),
                     _as_pmf(q, allow_deficit=True))
    diff = np.abs(np.cumsum(a) - np.cumsum(b))
    return float((diff / (1.0 + np.arange(a.size))).max())


def dist_tv_counts(c1: dict, c2: dict) -> float:
    """Total variation between two empirical histograms given as count
    maps (any hashable keys)."""
    n1 = sum(c1.values())
    n2 = sum(c2.values())
    if n1 <= 0 or n2 <= 0:
        raise ValueError("histograms must be nonempty")
    keys = set(c1) | set(c2)
    return 0.5 * sum(abs(c1.get(k, 0) / n1 - c2.get(k, 0) / n2)
                     for k in keys)


def ecdf(samples, grid) -> np.ndarray:
    """P(sample <= g) for each g in grid."""
    xs = np.sort(np.asarray(samples, dtype=float))
    g = np.asarray(grid, dtype=float)
    return np.searchsorted(xs, g, side="right") / xs.size


def dk_samples_vs_cdf(samples, cdf: Callable, grid=None) -> float:
    """Kolmogorov distance between an empirical law and a cdf callable,
    evaluated on an integer grid covering the sample range."""
    xs = np.asarray(samples, dtype=float)
    if grid is None:
        lo = math.floor(xs.min()) - 1
        hi = math.ceil(xs.max()) + 1
        grid = np.arange(lo, hi + 1)
    emp = ecdf(xs, grid)
    ref = np.array([cdf(float(g)) for g in np.asarray(grid, dtype=float)])
    return float(np.abs(emp - ref).max())


def dk_samples_vs_continuous(samples, cdf: Callable) -> float:
    """Kolmogorov distance against a continuous cdf: the sup is attained
    at sample points, approached from both sides."""
    xs = np.sort(np.asarray(samples, dtype=float))
    ref = np.array([cdf(float(x)) for x in xs])
    steps = np.arange(xs.size + 1) / xs.size
    return float(max(np.abs(steps[1:] - ref).max(),
                     np.abs(steps[:-1] - ref).max()))


def gumbel_cdf(x: float) -> float:
    return math.exp(-math.exp(-x))


def frechet_cdf(x: float, alpha: float, cprime: float) -> float:
    """P(W <= x) = exp(-(c'/alpha) x^-alpha), the second-maximum limit
    under condensation."""
    if x <= 0.0:
        return 0.0
    return math.exp(-(cprime / alpha) * x ** (-alpha))


# ---------------------------------------------------------------------------
# empirical summaries

@dataclass
class EmpiricalSummary:
    """Mergeable counts over replicates of one (m, n) ensemble.

    degree_counts pools box occupancies (node outdegrees in tree mode)
    over all replicates; top holds the j_max largest values per
    replicate, sorted decreasing; freq_sum/freq_sumsq accumulate the
    per-replicate frequencies N_k/n for k <= kse so means carry standard
    errors.  Merging adds counts and stacks replicates; stream-ordered
    merges are deterministic regardless of worker count.
    """

    kind: str
    R: int
    n: int
    m: int
    degree_counts: np.ndarray
    top: np.ndarray
    freq_sum: np.ndarray
    freq_sumsq: np.ndarray
    root_counts: Optional[np.ndarray] = None
    fringe: Optional[dict] = None

    @property
    def node_obs(self) -> int:
        return self.R * self.n

    def degree_law(self) -> np.ndarray:
        return self.degree_counts / self.node_obs

    def root_law(self) -> np.ndarray:
        if self.root_counts is None:
            raise SimgenError("summary holds no root data (allocation mode)")
        return self.root_counts / self.R

    def freq_mean_se(self):
        mean = self.freq_sum / self.R
        if self.R < 2:
            return mean, np.full_like(mean, INF)
        var = (self.freq_sumsq / self.R - mean ** 2) * self.R / (self.R - 1)
        return mean, np.sqrt(np.clip(var, 0.0, None) / self.R)

    def top_values(self, j: int = 1) -> np.ndarray:
        if not 1 <= j <= self.top.shape[1]:
            raise ValueError(f"order statistic {j} not recorded")
        return self.top[:, j - 1]

    def fringe_law(self) -> dict:
        if self.fringe is None:
            raise SimgenError("summary holds no fringe data")
        return {shape: c / self.node_obs for shape, c in self.fringe.items()}

    def merge(self, other: "EmpiricalSummary") -> "EmpiricalSummary":
        if (self.kind, self.n, self.m) != (other.kind, other.n, other.m):
            raise ValueError("summaries describe different ensembles")
        if self.top.shape[1] != other.top.shape[1] or \
                self.freq_sum.size != other.freq_sum.size:
            raise ValueError("summaries recorded different statistics")
        dc = _pad_add(self.degree_counts, other.degree_counts)
        rc = None
        if self.root_counts is not None and other.root_counts is not None:
            rc = _pad_add(self.root_counts, other.root_counts)
        fr = None
        if self.fringe is not None and other.fringe is not None:
            fr = dict(self.fringe)
            for k, v in other.fringe.items():
                fr[k] = fr.get(k, 0) + v
        return EmpiricalSummary(
            kind=self.kind, R=self.R + other.R, n=self.n, m=self.m,
            degree_counts=dc, top=np.vstack([self.top, other.top]),
            freq_sum=self.freq_sum + other.freq_sum,
            freq_sumsq=self.freq_sumsq + other.freq_sumsq,
            root_counts=rc, fringe=fr)


def _pad_add(a, b):
    width = max(a.size, b.size)
    out = np.zeros(width, dtype=a.dtype)
    out[:a.size] += a
    out[:b.size] += b
    return out


def summarize_rows(rows, kind: str = "alloc", j_max: int = 2, kse: int = 16,
                   fringe_size: int = 0) -> EmpiricalSummary:
    """Summary of a replicate matrix (one occupancy or degree row each).

    Checks the allocation invariant (equal row sums) and, in tree mode,
    records root degrees and optionally pooled fringe-shape counts up to
    fringe_size nodes per shape.
    """
    from .trees import fringe_counts

    rows = np.asarray(rows, dtype=np.int64)
    if rows.ndim == 1:
        rows = rows[None, :]
    R, n = rows.shape
    if R == 0 or n == 0:
        raise ValueError("need at least one replicate and one box")
    sums = rows.sum(axis=1)
    m = int(sums[0])
    if not (sums == m).all():
        raise ValueError("replicates carry different total mass")
    if kind not in ("alloc", "tree"):
        raise ValueError(f"unknown summary kind {kind!r}")
    if kind == "tree" and m != n - 1:
        raise ValueError("tree rows must have mass n - 1")

    degree_counts = np.bincount(rows.ravel())
    j = min(j_max, n)
    part = np.partition(rows, n - j, axis=1)[:, n - j:]
    top = -np.sort(-part, axis=1)
    if j < j_max:
        top = np.hstack([top, np.zeros((R, j_max - j), dtype=np.int64)])

    # per-replicate frequencies of small values, one bincount pass over
    # offset indices so large matrices stay in C code
    clip = np.minimum(rows, kse + 1)
    width = kse + 2
    per = np.bincount((clip + width * np.arange(R)[:, None]).ravel(),
                      minlength=R * width).reshape(R, width)[:, :kse + 1]
    freq = per / n
    freq_sum = freq.sum(axis=0)
    freq_sumsq = (freq ** 2).sum(axis=0)

    root_counts = None
    fringe = None
    if kind == "tree":
        root_counts = np.bincount(rows[:, 0])
        if fringe_size > 0:
            fringe = {}
            for r in rows:
                for shape, c in fringe_counts(r, fringe_size).items():
                    fringe[shape] = fringe.get(shape, 0) + c
    return EmpiricalSummary(kind=kind, R=R, n=n, m=m,
                            degree_counts=degree_counts, top=top,
                            freq_sum=freq_sum, freq_sumsq=freq_sumsq,
                            root_counts=root_counts, fringe=fringe)


# ---------------------------------------------------------------------------
# predictions

@dataclass
class Prediction:
    """A closed-form limit statement with its validity certificate.

    params holds plain numbers and lists (JSON-safe); cdf, when present,
    is the predicted P(Y <= k) on the integer grid.  valid=False means
    the stated conditions failed and reason says why; params then carry
    whatever partial information was computable.
    """

    quantity: str
    theorem: str
    valid: bool
    params: dict = field(default_factory=dict)
    conditions: dict = field(default_factory=dict)
    reason: str = ""
    cdf: Optional[Callable] = None

    def to_dict(self) -> dict:
        return {"quantity": self.quantity, "theorem": self.theorem,
                "valid": self.valid, "params": _jsonable(self.params),
                "conditions": _jsonable(self.conditions),
                "reason": self.reason}

    def to_json(self, indent=None) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def _declined(quantity, theorem, reason, conditions=None, params=None):
    return Prediction(quantity=quantity, theorem=theorem, valid=False,
                      reason=reason, conditions=conditions or {},
                      params=params or {})


def fringe_prob(law: CanonicalLaw, shape) -> float:
    """Limit frequency of a fringe subtree shape: the product of pi over
    its degree sequence."""
    return float(np.prod([law.pi(int(d)) for d in shape]))


def predict_degree_law(law: CanonicalLaw, kmax: int = 32) -> Prediction:
    """Limit degree/occupancy frequencies and the root-degree law.

    Emits the tilted law pi as the limit of N_k/n, and the size-biased
    law k pi_k / mu plus an atom 1 - mu at infinity as the limit of the
    root degree.
    """
    omega = law.spec.omega
    if omega != INF and law.lam >= float(omega):
        return _declined("degree-law", "degree-lln",
                         "degenerate boundary: every box is forced full",
                         {"lam": law.lam, "omega": float(omega)})
    kk = kmax if omega == INF else min(kmax, int(omega))
    pi = law.pi_array(kk)
    root = np.arange(kk + 1) * pi
    mu = law.mu
    if mu > 0.0:
        root = root / mu
    return Prediction(
        quantity="degree-law", theorem="degree-lln", valid=True,
        params={"pi": pi.tolist(), "root": root.tolist(),
                "root_inf_mass": max(0.0, 1.0 - mu), "mu": mu,
                "tau": law.tau},
        conditions={"lam": law.lam, "nu": law.nu, "case": law.case_label})


def _pi_tail_arrays(law: CanonicalLaw, n: int):
    """pi and its survival function, long enough to bracket 1/n."""
    kcap = 256
    while True:
        pi = law.pi_array(kcap)
        tail = 1.0 - np.cumsum(pi)          # tail[k] = P(xi > k)
        live = pi >= 1.0 / n
        if (tail[-1] < 0.25 / n and not live[-64:].any()) or kcap >= 1 << 21:
            return pi, np.clip(tail, 0.0, None)
        kcap *= 2


def level_indices(law: CanonicalLaw, n: int):
    """The three concentration levels: the largest k with pi_k >= 1/n,
    with P(xi >= k) >= 1/n, and with the geometric mean of consecutive
    survival values >= 1/n."""
    pi, tail = _pi_tail_arrays(law, n)
    surv = np.empty(pi.size)               # surv[k] = P(xi >= k)
    surv[0] = 1.0
    surv[1:] = tail[:-1]
    inv = 1.0 / n
    idx1 = np.nonzero(pi >= inv)[0]
    idx2 = np.nonzero(surv >= inv)[0]
    gm = np.sqrt(surv[:-1] * surv[1:])
    idx3 = np.nonzero(gm >= inv)[0]
    if not (idx1.size and idx2.size and idx3.size):
        raise SimgenError("no concentration level at this n")
    return int(idx1[-1]), int(idx2[-1]), int(idx3[-1])


def predict_max_degree(law: CanonicalLaw, n: int) -> Prediction:
    """Predicted law of the largest box/degree at n boxes.

    Bounded support pins the maximum at its top; lam > nu yields the
    condensation triple (giant location, stable centering, Frechet
    second maximum) and needs declared power-tail metadata; lam <= nu
    yields the Poissonized cdf exp(-n P(xi > k)) with the concentration
    levels and, for geometric-type tails, the discretized Gumbel
    parameters.  At lam = nu with infinite variance the paper leaves the
    behavior open and so does this function.
    """
    spec = law.spec
    conds = {"lam": law.lam, "nu": law.nu, "sigma2": law.sigma2,
             "case": law.case_label}
    if spec.omega != INF:
        w = int(spec.omega)
        return Prediction(
            quantity="max-degree", theorem="bounded-support", valid=True,
            params={"regime": "bounded", "omega": w}, conditions=conds,
            cdf=lambda k, w=w: 1.0 if k >= w else 0.0)

    if law.lam > law.nu + 1e-9:
        tail = spec.tail
        if tail is None or tail.beta <= 2.0:
            return _declined(
                "max-degree", "condensation",
                "condensation needs declared power-tail metadata with "
                "exponent above 2", conds)
        if not (spec.rho > 0.0 and math.isfinite(spec.rho)
                and abs(tail.base * spec.rho - 1.0) < 1e-9):
            return _declined("max-degree", "condensation",
                             "tail metadata does not match the radius",
                             conds)
        alpha = tail.beta - 1.0
        phi_r = phi(spec, spec.rho)
        cprime = tail.c / phi_r
        params = {
            "regime": "condensation",
            "condensate": (law.lam - law.nu) * n,
            "alpha": alpha,
            "cprime": cprime,
            "scale": n ** (1.0 / alpha),
            # E exp(-t X) = exp(c' Gamma(-alpha) t^alpha) for the stable
            # centering of m - nu n - Y_(1)
            "stable_coef": cprime * math.gamma(-alpha) if alpha != int(alpha)
                           else None,
        }
        return Prediction(quantity="max-degree", theorem="condensation",
                          valid=True, params=params, conditions=conds)

    at_boundary = abs(law.lam - law.nu) <= 1e-9
    if at_boundary and not law.sigma2 < INF:
        return _declined("max-degree", "open-problem", "regime-open",
                         conds)

    k1, k2, k3 = level_indices(law, n)
    pi, tail_gt = _pi_tail_arrays(law, n)

    def cdf(k, n=n, tail_gt=tail_gt):
        kk = int(math.floor(k))
        if kk < 0:
            return 0.0
        t = tail_gt[kk] if kk < tail_gt.size else 0.0
        return math.exp(-n * t)

    params = {"regime": "gumbel", "k1": k1, "k2": k2, "k3": k3}
    theorem = "poissonized-max"
    if spec.rho > 0.0 and math.isfinite(spec.rho) and law.tau > 0.0:
        q = law.tau / spec.rho
        if 0.0 < q < 1.0:
            N = n * float(pi[k1]) * q ** (-k1) / (1.0 - q)
            params.update({
                "q": q,
                "N": N,
                "location": math.log(N) / math.log(1.0 / q),
                "scale": 1.0 / math.log(1.0 / q),
            })
            theorem = "geometric-max"
    elif spec.rho == INF:
        params["two_point"] = [k3, k3 + 1]
        theorem = "two-point-max"
    return Prediction(quantity="max-degree", theorem=theorem, valid=True,
                      params=params, conditions=conds, cdf=cdf)


def predict_partition_asympt(spec: WeightSpec, n: int,
                             m: Optional[int] = None) -> Prediction:
    """Numeric prediction of log Z_n (m omitted) or log Z(m, n).

    Always includes the per-box exponent limit; the point value comes
    from the sharpest applicable local theorem: the local CLT form for
    finite variance, its stable-law refinement for declared power tails
    with exponent in (1, 2], and the condensation form past nu.  Ratio
    limits (one extra ball, one extra box) ride along.
    """
    tree_form = m is None
    lam = 1.0 if tree_form else m / n
    quantity = "partition-tree" if tree_form else "partition-alloc"
    try:
        law = canonical_law(spec, lam)
    except SimgenError as e:
        return _declined(quantity, "partition-asymptotics",
                         f"no canonical law at this density: {e}",
                         {"lam": lam})
    d = spec.span
    conds = {"lam": lam, "nu": law.nu, "sigma2": law.sigma2, "span": d,
             "case": law.case_label}
    params = {}
    if law.tau > 0.0 and math.isfinite(law.phi_tau):
        # exponential scale (1/n) log Z -> log Phi(tau) - lam log tau
        params["exponent"] = math.log(law.phi_tau) - lam * math.log(law.tau)
        params["ball_ratio"] = 1.0 / law.tau
        params["box_ratio"] = (law.phi_tau / law.tau) ** d

    finite_var = law.sigma2 < INF and law.sigma2 > 0.0
    sub = law.lam < law.nu + 1e-9
    if finite_var and sub and (law.nu >= 1.0 - 1e-9 or not tree_form):
        lz = (n * math.log(law.phi_tau) - (m if not tree_form else n - 1)
              * math.log(law.tau))
        lz += math.log(d) - 0.5 * math.log(2.0 * math.pi * law.sigma2)
        if tree_form:
            lz += -1.5 * math.log(n)
        else:
            lz += -0.5 * math.log(n)
        params["log_z"] = lz
        return Prediction(quantity=quantity, theorem="local-clt", valid=True,
                          params=params, conditions=conds)

    tail = spec.tail
    rho_ok = (tail is not None and spec.rho > 0.0 and math.isfinite(spec.rho)
              and abs(tail.base * spec.rho - 1.0) < 1e-9)
    if rho_ok:
        # work in the rescaled family u_k = w_k rho^k (same conditioned
        # laws); translate back with Z_w = rho^(-mass) Z_u
        alpha = tail.beta - 1.0
        phi_r = phi(spec, spec.rho)
        mass = (n - 1) if tree_form else m
        base_shift = -mass * math.log(spec.rho)
        # the stable-density form holds for mass = nu n + o(n^(1/alpha));
        # the frozen density value is only trusted near the center
        near_center = abs(mass - law.nu * n) <= 0.1 * n ** (1.0 / alpha)
        if near_center and 1.0 < alpha <= 2.0:
            cu = tail.c
            if alpha < 2.0:
                g0 = ((cu * math.gamma(-alpha) / phi_r) ** (-1.0 / alpha)
                      / abs(math.gamma(-1.0 / alpha)))
                lz = (math.log(g0) + n * math.log(phi_r)
                      - (1.0 / alpha) * math.log(n))
            else:
                lz = (0.5 * math.log(phi_r / (math.pi * cu))
                      + n * math.log(phi_r)
                      - 0.5 * math.log(n * math.log(n)))
            if tree_form:
                lz -= math.log(n)
            params["log_z"] = lz + base_shift
            return Prediction(quantity=quantity, theorem="stable-local",
                              valid=True, params=params, conditions=conds)
        if law.lam > law.nu + 1e-9 and tail.beta > 2.0:
            lz = (math.log(tail.c) - tail.beta * math.log(law.lam - law.nu)
                  + (n - 1) * math.log(phi_r)
                  + (1.0 - tail.beta) * math.log(n))
            if tree_form:
                lz -= math.log(n)
            params["log_z"] = lz + base_shift
            return Prediction(quantity=quantity, theorem="condensation-z",
                              valid=True, params=params, conditions=conds)

    if params:
        return Prediction(quantity=quantity, theorem="exponent-only",
                          valid=True, params=params, conditions=conds)
    return _declined(quantity, "partition-asymptotics",
                     "no applicable local theorem: infinite variance "
                     "without declared power-tail metadata", conds)


def _floor_gumbel_cdf(n: int, q: float, b: float, loglog_coef: float):
    L = math.log(1.0 / q)
    shift = math.log(n) - loglog_coef * math.log(math.log(n)) + math.log(b)

    def cdf(k, L=L, shift=shift):
        return math.exp(-math.exp(-((math.floor(k) + 1) * L - shift)))

    return cdf


def predict_forest_max(kind: str, lam: float, n: int,
                       spec: Optional[WeightSpec] = None) -> Prediction:
    """Largest-component-size law for forests at m ~ lam n.

    kind "rooted" and "unrooted" use the closed forms for those two
    labelled families; kind "general" takes any weight sequence (span 1,
    finite variance at the unit tilt).  Below the respective phase
    transition the law is a discretized Gumbel; for unrooted forests
    past lam = 2 the giant-tree triple is emitted instead, and the
    critical point itself is declined.
    """
    conds = {"kind": kind, "lam": lam, "n": n}
    if kind == "rooted":
        if not lam > 1.0:
            return _declined("forest-max", "rooted-forest-max",
                             "needs lam > 1", conds)
        q = ((lam - 1.0) / lam) * math.exp(1.0 / lam)
        L = math.log(1.0 / q)
        b = lam * L ** 1.5 / (math.sqrt(2.0 * math.pi) * (lam - 1.0)
                              * (1.0 - q))
        params = {"q": q, "b": b, "loglog_coef": 1.5}
        return Prediction(quantity="forest-max", theorem="rooted-forest-max",
                          valid=True, params=params, conditions=conds,
                          cdf=_floor_gumbel_cdf(n, q, b, 1.5))

    if kind == "general":
        if spec is None:
            return _declined("forest-max", "weighted-forest-max",
                             "needs the weight sequence", conds)
        if not lam > 1.0:
            return _declined("forest-max", "weighted-forest-max",
                             "needs lam > 1", conds)
        if spec.span != 1:
            return _declined("forest-max", "weighted-forest-max",
                             "needs span 1", conds)
        try:
            v = nu_of(spec)
            if v < 1.0 - 1e-9:
                return _declined("forest-max", "weighted-forest-max",
                                 "needs attainable unit mean", conds)
            unit = canonical_law(spec, 1.0)
            tau1 = unit.tau
            tau2 = tau_of(spec, 1.0 - 1.0 / lam)
        except SimgenError as e:
            return _declined("forest-max", "weighted-forest-max", str(e),
                             conds)
        if not unit.sigma2 < INF:
            return _declined("forest-max", "weighted-forest-max",
                             "infinite variance at the unit tilt", conds)
        phi1 = phi(spec, tau1)
        phi2 = phi(spec, tau2)
        q = (tau2 / phi2) * (phi1 / tau1)
        L = math.log(1.0 / q)
        b = tau1 * L ** 1.5 / (tau2 * math.sqrt(2.0 * math.pi * unit.sigma2)
                               * (1.0 - q))
        params = {"q": q, "b": b, "tau1": tau1, "tau2": tau2,
                  "sigma2": unit.sigma2, "loglog_coef": 1.5}
        return Prediction(quantity="forest-max", theorem="weighted-forest-max",
                          valid=True, params=params, conditions=conds,
                          cdf=_floor_gumbel_cdf(n, q, b, 1.5))

    if kind == "unrooted":
        if not lam > 1.0:
            return _declined("forest-max", "unrooted-forest-max",
                             "needs lam > 1", conds)
        if abs(lam - 2.0) < 1e-12:
            return _declined(
                "forest-max", "unrooted-forest-max",
                "critical point: maxima live on the n^(2/3) point-process "
                "scale, outside this predictor", conds)
        if lam < 2.0:
            q = 2.0 * ((lam - 1.0) / lam) * math.exp(2.0 / lam - 1.0)
            L = math.log(1.0 / q)
            b = (lam ** 2 * L ** 2.5
                 / (2.0 * math.sqrt(2.0 * math.pi) * (lam - 1.0) * (1.0 - q)))
            params = {"q": q, "b": b, "loglog_coef": 2.5}
            return Prediction(quantity="forest-max",
                              theorem="unrooted-forest-max", valid=True,
                              params=params, conditions=conds,
                              cdf=_floor_gumbel_cdf(n, q, b, 2.5))
        cprime = math.sqrt(2.0 / math.pi)
        params = {
            "regime": "giant",
            "giant": (lam - 2.0) * n,
            "alpha": 1.5,
            "cprime": cprime,
            "scale": n ** (2.0 / 3.0),
            # Laplace exponent of the stable centering m - 2n - Y_(1)
            "stable_coef": 2.0 ** 2.5 / 3.0,
            "stable_power": 0.75,
        }
        return Prediction(quantity="forest-max", theorem="unrooted-giant",
                          valid=True, params=params, conditions=conds)

    return _declined("forest-max", "forest-max", f"unknown kind {kind!r}",
                     conds)


# ---------------------------------------------------------------------------
# comparison reports

@dataclass
class Report:
    """Rows of empirical-vs-predicted checks with per-row pass flags."""

    rows: list
    declined: bool = False
    reason: str = ""

    @property
    def passed(self) -> bool:
        return (not self.declined) and all(r["passed"] for r in self.rows)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "declined": self.declined,
                "reason": self.reason, "rows": _jsonable(self.rows)}

    def to_json(self, indent=None) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def to_text(self) -> str:
        if self.declined:
            return f"declined: {self.reason}"
        head = ("quantity", "empirical", "predicted", "metric", "value",
                "pass")
        body = [(str(r["quantity"]), _fmt(r["empirical"]),
                 _fmt(r["predicted"]), str(r["metric"]), _fmt(r["value"]),
                 "ok" if r["passed"] else "FAIL") for r in self.rows]
        widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h)
                  for i, h in enumerate(head)]
        lines = ["  ".join(h.ljust(w) for h, w in zip(head, widths))]
        for b in body:
            lines.append("  ".join(c.ljust(w) for c, w in zip(b, widths)))
        return "\n".join(lines)


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.5g}"
    return str(v)


def _row(quantity, empirical, predicted, metric, value, passed):
    return {"quantity": quantity, "empirical": empirical,
            "predicted": predicted, "metric": metric, "value": value,
            "passed": bool(passed)}


def compare(summary: EmpiricalSummary, pred: Prediction,
            tol: Optional[dict] = None) -> Report:
    """Check an empirical summary against a prediction object.

    Emits one row per comparable quantity; tolerances can be overridden
    per metric through tol.  Predictions that declined, or that talk
    about a different quantity than the summary holds, produce declined
    reports rather than vacuous passes.
    """
    t = {"freq_abs": 0.01, "dk": 0.05, "dtv": 0.01, "window": 2,
         "window_frac": 0.95, "cond_dev": 0.05, "cond_frac": 0.9,
         "frechet_dk": 0.1, "giant_dev": 0.1}
    if tol:
        t.update(tol)
    if not pred.valid:
        return Report([], declined=True, reason=pred.reason or "prediction "
                      "declined")

    rows = []
    if pred.quantity == "degree-law":
        pi = np.asarray(pred.params["pi"])
        emp = summary.degree_law()
        width = min(pi.size, emp.size)
        dev = float(np.abs(emp[:width] - pi[:width]).max())
        rows.append(_row("max|N_k/n - pi_k|", dev, 0.0, "abs", dev,
                         dev < t["freq_abs"]))
        a = np.append(emp[:width], max(0.0, 1.0 - emp[:width].sum()))
        b = np.append(pi[:width], max(0.0, 1.0 - pi[:width].sum()))
        dtv = dist_tv(a / a.sum(), b / b.sum())
        rows.append(_row("pooled degree law", None, None, "d_TV", dtv,
                         dtv < t["dtv"]))
        if summary.root_counts is not None:
            dk = dist_kolmogorov_mod(summary.root_law(),
                                     pred.params["root"])
            rows.append(_row("root degree law", None, None, "d_K*", dk,
                             dk < t["dk"]))
        return Report(rows)

    if pred.quantity == "max-degree":
        y1 = summary.top_values(1)
        regime = pred.params.get("regime", "gumbel")
        if regime == "bounded":
            w = pred.params["omega"]
            frac = float((y1 == w).mean())
            rows.append(_row("P(Y_(1) = omega)", frac, 1.0, "freq", frac,
                             frac >= t["window_frac"]))
            return Report(rows)
        if regime == "condensation":
            n = summary.n
            center = pred.params["condensate"] / n
            frac = float((np.abs(y1 / n - center) <= t["cond_dev"]).mean())
            rows.append(_row("Y_(1)/n near (lam - nu)", frac,
                             t["cond_frac"], "freq", frac,
                             frac >= t["cond_frac"]))
            y2 = summary.top_values(2)
            med2 = float(np.median(y2 / n))
            rows.append(_row("median Y_(2)/n", med2, 0.0, "abs", med2,
                             med2 < t["cond_dev"]))
            alpha = pred.params["alpha"]
            cp = pred.params["cprime"]
            dk = dk_samples_vs_continuous(
                y2 / n ** (1.0 / alpha),
                lambda x: frechet_cdf(x, alpha, cp))
            rows.append(_row("Y_(2) scaled vs Frechet", None, None, "d_K",
                             dk, dk < t["frechet_dk"]))
            return Report(rows)
        if pred.cdf is not None:
            dk = dk_samples_vs_cdf(y1, pred.cdf)
            rows.append(_row("Y_(1) law vs cdf", None, None, "d_K", dk,
                             dk < t["dk"]))
        if "k3" in pred.params:
            k3 = pred.params["k3"]
            frac = float((np.abs(y1 - k3) <= t["window"]).mean())
            rows.append(_row(f"Y_(1) within {t['window']} of k3", frac,
                             t["window_frac"], "freq", frac,
                             frac >= t["window_frac"]))
        return Report(rows)

    if pred.quantity == "forest-max":
        y1 = summary.top_values(1)
        if pred.params.get("regime") == "giant":
            n = summary.n
            giant = pred.params["giant"] / n
            dev = float(np.median(np.abs(y1 / n - giant)))
            rows.append(_row("median |Y_(1)/n - (lam-2)|", dev, 0.0, "abs",
                             dev, dev < t["giant_dev"]))
            y2 = summary.top_values(2)
            med2 = float(np.median(y2 / n))
            rows.append(_row("median Y_(2)/n", med2, 0.0, "abs", med2,
                             med2 < t["giant_dev"]))
            return Report(rows)
        dk = dk_samples_vs_cdf(y1, pred.cdf)
        rows.append(_row("Y_(1) vs floor-Gumbel", None, None, "d_K", dk,
                         dk < t["dk"]))
        return Report(rows)

    return Report([], declined=True,
                  reason=f"no comparison for quantity {pred.quantity!r}")
