"""Ordered rooted trees as depth-first degree sequences.

A tree on n nodes is its preorder outdegree sequence (d_1,...,d_n).  The
sequence is valid iff every proper prefix satisfies sum_{i<=k} d_i >= k and
the total is n-1.  Everything else (depths, levels, fringe subtrees, left
balls) is derived from that sequence on demand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDegreeSequence


def as_degree_array(t) -> np.ndarray:
    if isinstance(t, OrderedTree):
        return t.as_array()
    return np.asarray(t, dtype=np.int64)


def validate_degrees(d) -> np.ndarray:
    """Check the prefix-sum characterization; return the int64 array.

    Raises invalid-degree-sequence with the first failing (1-based)
    prefix position, or with index n when only the total is off.
    """
    arr = np.asarray(d, dtype=np.int64)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidDegreeSequence("degree sequence is empty", index=0)
    if (arr < 0).any():
        i = int(np.nonzero(arr < 0)[0][0])
        raise InvalidDegreeSequence(f"negative degree at position {i + 1}",
                                    index=i + 1)
    n = arr.size
    c = np.cumsum(arr)
    short = np.nonzero(c[:-1] < np.arange(1, n))[0]
    if short.size:
        k = int(short[0]) + 1
        raise InvalidDegreeSequence(
            f"prefix sum {int(c[k - 1])} < {k} at position {k}", index=k)
    if c[-1] != n - 1:
        raise InvalidDegreeSequence(
            f"total degree {int(c[-1])} != {n - 1}", index=n)
    return arr


def is_valid_degrees(d) -> bool:
    try:
        validate_degrees(d)
        return True
    except InvalidDegreeSequence:
        return False


@dataclass(frozen=True)
class OrderedTree:
    degrees: tuple

    @classmethod
    def from_degrees(cls, d) -> "OrderedTree":
        arr = validate_degrees(d)
        return cls(tuple(int(x) for x in arr))

    @property
    def n(self) -> int:
        return len(self.degrees)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.degrees, dtype=np.int64)

    def to_text(self) -> str:
        return format_degrees(self.degrees)

    def __len__(self):
        return len(self.degrees)


# ---------------------------------------------------------------------------
# derived structure

def subtree_ends(d) -> np.ndarray:
    """end[j] for every node: the subtree at j spans positions [j, end[j]).

    The running excess S_k = sum_{i<=k}(d_i - 1) drops to S_{j-1} - 1
    exactly where the subtree rooted at j closes.  Sorting the composite
    key S[i]*n + i groups positions by excess value in increasing position
    order, so each query is one binary search.
    """
    arr = as_degree_array(d)
    n = arr.size
    S = np.cumsum(arr - 1)
    key = S * n + np.arange(n)
    skey = np.sort(key)
    targets = np.empty(n, dtype=np.int64)
    targets[0] = -1          # S_{-1} = 0, so the root closes where S = -1
    targets[1:] = S[:-1] - 1
    # query key carries the position too: the excess can revisit a value
    # before node j opens, and only hits at positions >= j count
    idx = np.searchsorted(skey, targets * n + np.arange(n))
    close = skey[idx] - targets * n    # position where the excess first hits target
    return close + 1


def depths(d) -> np.ndarray:
    """Depth of every node: how many subtree spans strictly cover it."""
    arr = as_degree_array(d)
    n = arr.size
    ends = subtree_ends(arr)
    closed = np.cumsum(np.bincount(ends, minlength=n + 1)[:n])
    # nodes before position i: i of them; those already closed are not ancestors
    return np.arange(n) - closed


@dataclass(frozen=True)
class TreeStats:
    n: int
    height: int
    width: int
    level_widths: tuple       # l_0..l_H, l_0 = 1
    degree_counts: tuple      # N_0..N_dmax
    root_degree: int
    maxima: tuple             # degrees sorted decreasing

    def degree_count(self, d: int) -> int:
        return self.degree_counts[d] if d < len(self.degree_counts) else 0


def stats(t) -> TreeStats:
    arr = validate_degrees(as_degree_array(t))
    dep = depths(arr)
    lw = np.bincount(dep)
    nd = np.bincount(arr)
    return TreeStats(
        n=int(arr.size),
        height=int(dep.max()),
        width=int(lw.max()),
        level_widths=tuple(int(x) for x in lw),
        degree_counts=tuple(int(x) for x in nd),
        root_degree=int(arr[0]),
        maxima=tuple(int(x) for x in np.sort(arr)[::-1]),
    )


def fringe_counts(t, max_size: int) -> dict:
    """Count fringe subtrees by shape, for shapes up to max_size nodes.

    The fringe subtree at node j is literally the degree window
    d[j:end[j]], so shapes are keyed by those windows as tuples.
    """
    if max_size < 1:
        raise ValueError("max_size must be >= 1")
    arr = as_degree_array(t)
    sizes = subtree_ends(arr) - np.arange(arr.size)
    out = {}
    for s in range(1, max_size + 1):
        idx = np.nonzero(sizes == s)[0]
        if not idx.size:
            continue
        windows = arr[idx[:, None] + np.arange(s)]
        shapes, counts = np.unique(windows, axis=0, return_counts=True)
        for shape, cnt in zip(shapes, counts):
            out[tuple(int(x) for x in shape)] = int(cnt)
    return out


def left_ball(t, m: int):
    """Truncate to height m and to the first m children of every node.

    The result is the subtree on Ulam-Harris labels of length <= m over
    alphabet {1..m}; nodes cut at depth m become leaves.  Output type
    follows the input: OrderedTree in, OrderedTree out.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    arr = as_degree_array(t)
    n = arr.size
    S = np.cumsum(arr - 1)

    def subtree_end(j):
        target = (S[j - 1] if j > 0 else 0) - 1
        return j + 1 + int(np.argmax(S[j:] == target))

    out = []

    def visit(j, depth):
        if depth >= m:
            out.append(0)
            return
        keep = min(int(arr[j]), m)
        out.append(keep)
        child = j + 1
        for _ in range(keep):
            visit(child, depth + 1)
            child = subtree_end(child)

    # the ball has at most sum_{k<=m} m^k nodes; recursion depth <= m
    visit(0, 0)
    if isinstance(t, OrderedTree):
        return OrderedTree(tuple(out))
    return np.asarray(out, dtype=np.int64)


# ---------------------------------------------------------------------------
# serialization

def format_degrees(d) -> str:
    """Space-separated degrees; runs of 4+ equal values compress to k*v."""
    arr = as_degree_array(d)
    toks = []
    i = 0
    n = arr.size
    while i < n:
        j = i
        while j < n and arr[j] == arr[i]:
            j += 1
        run = j - i
        if run >= 4:
            toks.append(f"{run}*{int(arr[i])}")
        else:
            toks.extend(str(int(arr[i])) for _ in range(run))
        i = j
    return " ".join(toks)


def parse_degrees(text: str) -> np.ndarray:
    vals = []
    for tok in text.split():
        if "*" in tok:
            k, v = tok.split("*", 1)
            vals.extend([int(v)] * int(k))
        else:
            vals.append(int(tok))
    return np.asarray(vals, dtype=np.int64)


# ---------------------------------------------------------------------------
# exhaustive enumeration (oracle duty for the exact module and tests)

def all_trees(n: int):
    """Yield every valid degree sequence of length n as a tuple.

    Plain backtracking on the prefix constraint; n <= 12 or so.
    """
    if n < 1:
        return
    seq = [0] * n

    def rec(i, total):
        if i == n - 1:
            last = (n - 1) - total
            if last == 0:      # prefix constraints force the rest
                seq[i] = 0
                yield tuple(seq)
            return
        lo = max(0, (i + 1) - total)
        hi = (n - 1) - total
        for di in range(lo, hi + 1):
            seq[i] = di
            yield from rec(i + 1, total + di)

    yield from rec(0, 0)
