"""Node centralities of a :class:`~orghier.graph.SocialNetwork`.

Every function returns ``{node: value}`` in the network's node order.
Path-based measures (betweenness, closeness) use unweighted hop counts by
default; ``paths="weighted"`` uses ``1 / w_ij`` as edge length instead.
"""

from __future__ import annotations

import heapq
import warnings
from collections import deque

import numpy as np

from ..graph import SocialNetwork, undirected_projection


class ConvergenceWarning(RuntimeWarning):
    """An iterative centrality hit its iteration cap before meeting tolerance."""


def _as_dict(net: SocialNetwork, values) -> dict:
    return {n: float(v) for n, v in zip(net.nodes, values)}


def indegree(net: SocialNetwork) -> dict[str, int]:
    """Number of distinct in-neighbours (message counts are ignored)."""
    return {n: int(v) for n, v in zip(net.nodes, net.binary_adjacency.sum(axis=0))}


def outdegree(net: SocialNetwork) -> dict[str, int]:
    return {n: int(v) for n, v in zip(net.nodes, net.binary_adjacency.sum(axis=1))}


def _successor_lists(net: SocialNetwork, paths: str):
    a = net.weighted_adjacency
    out = []
    for row in a:
        js = np.flatnonzero(row)
        if paths == "weighted":
            out.append([(int(j), 1.0 / row[j]) for j in js])
        else:
            out.append([(int(j), 1.0) for j in js])
    return out


def _single_source(succ, s, weighted):
    """Shortest-path DAG from ``s``: (visit order, predecessors, path counts, distances)."""
    n = len(succ)
    sigma = [0.0] * n
    sigma[s] = 1.0
    dist = [None] * n
    dist[s] = 0.0
    preds = [[] for _ in range(n)]
    order = []
    if not weighted:
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w, _ in succ[v]:
                if dist[w] is None:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        return order, preds, sigma, dist
    seen = {s: 0.0}
    settled = [False] * n
    counter = 0
    heap = [(0.0, counter, s, s)]
    while heap:
        d, _, pred, v = heapq.heappop(heap)
        if settled[v]:
            continue
        if v != s:
            sigma[v] += sigma[pred]
        settled[v] = True
        dist[v] = d
        order.append(v)
        for w, length in succ[v]:
            nd = d + length
            if not settled[w] and (w not in seen or nd < seen[w]):
                seen[w] = nd
                counter += 1
                heapq.heappush(heap, (nd, counter, v, w))
                sigma[w] = 0.0
                preds[w] = [v]
            elif not settled[w] and nd == seen[w]:
                sigma[w] += sigma[v]
                preds[w].append(v)
    return order, preds, sigma, dist


def betweenness(net: SocialNetwork, paths: str = "unweighted") -> dict[str, float]:
    """Raw directed betweenness: sum over ordered pairs ``(s, d)``, ``s != v != d``.

    Brandes accumulation; no normalisation.
    """
    succ = _successor_lists(net, paths)
    n = len(succ)
    cb = [0.0] * n
    for s in range(n):
        order, preds, sigma, _ = _single_source(succ, s, paths == "weighted")
        delta = [0.0] * n
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                cb[w] += delta[w]
    return _as_dict(net, cb)


def closeness(net: SocialNetwork, mode: str = "scaled", paths: str = "unweighted") -> dict[str, float]:
    """Closeness from distances *into* each node.

    ``mode="scaled"`` restricts to the ``r`` nodes that reach ``v`` and scales
    by reachability: ``(r / (N - 1)) * (r / sum_d)``.  ``mode="literal"``
    returns ``N / sum_d`` over the reachable nodes.  Nodes nobody reaches
    get 0 in both modes.
    """
    if mode not in ("scaled", "literal"):
        raise ValueError(f"closeness mode must be 'scaled' or 'literal', not {mode!r}")
    # distances into v are distances out of v on the reversed graph
    a = net.weighted_adjacency.T
    rev = [[(int(j), (1.0 / row[j]) if paths == "weighted" else 1.0) for j in np.flatnonzero(row)] for row in a]
    n = len(rev)
    out = []
    for v in range(n):
        _, _, _, dist = _single_source(rev, v, paths == "weighted")
        reach = [d for k, d in enumerate(dist) if d is not None and k != v]
        total = sum(reach)
        r = len(reach)
        if r == 0 or total == 0:
            out.append(0.0)
        elif mode == "literal":
            out.append(n / total)
        else:
            out.append((r / (n - 1)) * (r / total))
    return _as_dict(net, out)


def eigenvector(net: SocialNetwork, tol: float = 1e-8, max_iter: int = 1000) -> dict[str, float]:
    """Dominant left eigenvector of the weighted adjacency, L2-normalised.

    Power iteration on ``A^T + I`` (same eigenvectors, no periodic
    oscillation), uniform start.  Warns with :class:`ConvergenceWarning`
    and returns the last iterate if ``max_iter`` is reached.
    """
    a = net.weighted_adjacency
    n = len(a)
    if n == 0:
        return {}
    x = np.full(n, 1.0 / np.sqrt(n))
    for _ in range(max_iter):
        prev = x
        x = prev + a.T @ prev
        norm = np.linalg.norm(x)
        x = x / norm
        if np.abs(x - prev).sum() < tol:
            break
    else:
        warnings.warn(f"eigenvector centrality did not converge in {max_iter} iterations", ConvergenceWarning)
    return _as_dict(net, x)


def pagerank(net: SocialNetwork, alpha: float = 0.85, tol: float = 1e-9, max_iter: int = 1000) -> dict[str, float]:
    """PageRank with ``beta = (1 - alpha) / N`` and dangling out-degree 1.

    Dangling nodes pass no score on, so the fixed point leaks mass; the
    result is rescaled to sum to 1 after iteration stops.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    a = net.weighted_adjacency
    n = len(a)
    if n == 0:
        return {}
    outdeg = a.sum(axis=1)
    outdeg[outdeg == 0] = 1.0
    m = a / outdeg[:, None]
    beta = (1.0 - alpha) / n
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        prev = x
        x = alpha * (m.T @ prev) + beta
        if np.abs(x - prev).sum() < tol:
            break
    else:
        warnings.warn(f"pagerank did not converge in {max_iter} iterations", ConvergenceWarning)
    return _as_dict(net, x / x.sum())


def hits(net: SocialNetwork, tol: float = 1e-8, max_iter: int = 1000) -> tuple[dict[str, float], dict[str, float]]:
    """Hub and authority scores by mutual iteration, each L2-normalised.

    An edgeless network yields all-zero vectors.
    """
    a = net.weighted_adjacency
    n = len(a)
    if n == 0:
        return {}, {}
    if not a.any():
        zeros = np.zeros(n)
        return _as_dict(net, zeros), _as_dict(net, zeros)
    hub = np.full(n, 1.0 / np.sqrt(n))
    auth = np.zeros(n)
    for _ in range(max_iter):
        prev_hub, prev_auth = hub, auth
        auth = a.T @ hub
        auth /= np.linalg.norm(auth)
        hub = a @ auth
        hub /= np.linalg.norm(hub)
        if np.abs(hub - prev_hub).sum() + np.abs(auth - prev_auth).sum() < tol:
            break
    else:
        warnings.warn(f"HITS did not converge in {max_iter} iterations", ConvergenceWarning)
    return _as_dict(net, hub), _as_dict(net, auth)


def clustering(net: SocialNetwork) -> dict[str, float]:
    """Local clustering coefficient on the undirected projection; degree < 2 gives 0."""
    adj = undirected_projection(net).adjacency.astype(float)
    k = adj.sum(axis=1)
    # twice the number of connected neighbour pairs
    links = np.einsum("ij,jk,ki->i", adj, adj, adj)
    denom = k * (k - 1)
    out = np.divide(links, denom, out=np.zeros_like(links), where=denom > 0)
    return _as_dict(net, out)
