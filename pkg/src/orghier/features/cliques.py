"""Clique features over the reciprocal (mutual-mail) projection."""

from __future__ import annotations

from ..graph import SocialNetwork, reciprocal_projection


class CliqueBudgetExceeded(RuntimeError):
    pass


def maximal_cliques(neighbors: list[set[int]], budget: int = 10**7) -> list[tuple[int, ...]]:
    """Bron-Kerbosch with Tomita pivoting.  Returns every maximal clique, sorted.

    ``budget`` caps the number of recursive calls.
    """
    cliques = []
    calls = 0

    def expand(r, p, x):
        nonlocal calls
        calls += 1
        if calls > budget:
            raise CliqueBudgetExceeded(f"clique enumeration exceeded {budget} recursion steps")
        if not p and not x:
            cliques.append(tuple(sorted(r)))
            return
        pivot = max(p | x, key=lambda u: (len(neighbors[u] & p), -u))
        for v in sorted(p - neighbors[pivot]):
            expand(r + [v], p & neighbors[v], x & neighbors[v])
            p = p - {v}
            x = x | {v}

    expand([], set(range(len(neighbors))), set())
    return sorted(cliques)


def all_cliques(neighbors: list[set[int]], budget: int = 10**7) -> list[tuple[int, ...]]:
    """Every complete subgraph with at least one node (exponential; small graphs only)."""
    out = []
    calls = 0

    def extend(clique, candidates):
        nonlocal calls
        for v in sorted(candidates):
            calls += 1
            if calls > budget:
                raise CliqueBudgetExceeded(f"clique enumeration exceeded {budget} steps")
            grown = clique + (v,)
            out.append(grown)
            extend(grown, {u for u in candidates & neighbors[v] if u > v})

    extend((), set(range(len(neighbors))))
    return out


def clique_stats(net: SocialNetwork, cliques: str = "maximal", budget: int = 10**7) -> dict[str, tuple[int, int]]:
    """Per node ``(clique_count, clique_max)``.

    Only cliques with two or more members count.  A node with no mutual
    contact gets ``(0, 1)``: it is its own trivial clique.
    """
    nbrs = reciprocal_projection(net).neighbors()
    if cliques == "maximal":
        found = maximal_cliques(nbrs, budget)
    elif cliques == "all":
        found = all_cliques(nbrs, budget)
    else:
        raise ValueError(f"cliques must be 'maximal' or 'all', not {cliques!r}")
    count = [0] * len(nbrs)
    biggest = [1] * len(nbrs)
    for c in found:
        if len(c) < 2:
            continue
        for v in c:
            count[v] += 1
            biggest[v] = max(biggest[v], len(c))
    return {n: (count[i], biggest[i]) for i, n in enumerate(net.nodes)}
