"""Poisson moment coefficients and the collapse enumerator.

A collapse of order ``k`` is a set partition of the symbols
``i_1, j_1, ..., i_k, j_k`` in which no class holds both ``i_m`` and
``j_m``. Classes sharing a pair index ``m`` are linked; the connected groups
are clusters. A collapse is clean when every cluster has exactly two classes.
"""

from __future__ import annotations

from dataclasses import dataclass

MAX_K = 5


def poisson_moment_coeffs(i: int) -> list[int]:
    """``a_{i,1..i}`` with ``E X^i = sum_k a_{i,k} mu^k`` for ``X ~ Poisson(mu)``.

    ``a_{i,k} = k a_{i-1,k} + a_{i-1,k-1}``: Stirling numbers of the second
    kind. Python integers are unbounded, so no overflow can occur.
    """
    if i < 1:
        raise ValueError("i must be positive")
    row = [1]
    for m in range(2, i + 1):
        row = [(k + 1) * (row[k] if k < len(row) else 0) + (row[k - 1] if k > 0 else 0) for k in range(m)]
    return row


def poisson_inverse_coeffs(j: int) -> list[int]:
    """``b^{j,1..j}`` with ``mu^j = sum_i b^{j,i} E X^i``.

    ``b^{j,i} = b^{j-1,i-1} - (j-1) b^{j-1,i}``: signed Stirling numbers of
    the first kind.
    """
    if j < 1:
        raise ValueError("j must be positive")
    row = [1]
    for m in range(2, j + 1):
        row = [(row[i - 1] if i > 0 else 0) - (m - 1) * (row[i] if i < len(row) else 0) for i in range(m)]
    return row


def stirling2(k: int, l: int) -> int:
    if not 1 <= l <= k:
        return 0
    return poisson_moment_coeffs(k)[l - 1]


@dataclass(frozen=True)
class Collapse:
    """One collapse; ``labels[2m]`` and ``labels[2m+1]`` are the classes of ``i_m`` and ``j_m``."""

    labels: tuple
    l1: int
    l2: int
    clean: bool

    @property
    def equivalence_classes(self) -> list[list[str]]:
        names = [f"{c}{m + 1}" for m in range(len(self.labels) // 2) for c in "ij"]
        classes = [[] for _ in range(self.l1)]
        for name, lab in zip(names, self.labels):
            classes[lab].append(name)
        return classes


def _clusters(labels, l1: int, k: int) -> list[int]:
    parent = list(range(l1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for m in range(k):
        ra, rb = find(labels[2 * m]), find(labels[2 * m + 1])
        if ra != rb:
            parent[ra] = rb
    sizes: dict[int, int] = {}
    for b in range(l1):
        r = find(b)
        sizes[r] = sizes.get(r, 0) + 1
    return list(sizes.values())


def iter_collapses(k: int):
    """Yield every collapse of order ``k`` as a :class:`Collapse`.

    Partitions are generated as restricted growth strings over the symbol
    order ``i_1, j_1, i_2, ...``; a ``j_m`` is never placed in the class of
    ``i_m``.
    """
    if not 1 <= k <= MAX_K:
        raise ValueError(f"k must be in 1..{MAX_K}")
    size = 2 * k
    labels = [0] * size

    def extend(pos: int, used: int):
        if pos == size:
            sizes = _clusters(labels, used, k)
            yield Collapse(tuple(labels), used, len(sizes), all(s == 2 for s in sizes))
            return
        banned = labels[pos - 1] if pos % 2 == 1 else -1
        for lab in range(used + 1):
            if lab == banned:
                continue
            labels[pos] = lab
            yield from extend(pos + 1, max(used, lab + 1))

    yield from extend(0, 0)


@dataclass(frozen=True)
class CollapseCounts:
    total: int
    clean: int
    mixed: int
    clean_by_cluster: dict


def enumerate_collapses(k: int) -> CollapseCounts:
    total = clean = 0
    by_cluster: dict[int, int] = {}
    for c in iter_collapses(k):
        total += 1
        if c.clean:
            clean += 1
            by_cluster[c.l2] = by_cluster.get(c.l2, 0) + 1
    return CollapseCounts(total, clean, total - clean, dict(sorted(by_cluster.items())))


def clean_collapse_count_formula(k: int, l: int) -> int:
    """``S(k, l) 2^(k - l)``: a block of ``b`` pair indices admits ``2^(b-1)`` clean pairings."""
    if not 1 <= l <= k:
        raise ValueError("need 1 <= l <= k")
    return stirling2(k, l) * 2 ** (k - l)
