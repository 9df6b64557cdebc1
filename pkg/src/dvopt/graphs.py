"""Topologies, graph Laplacians, spectral data, and time-varying schedules.

Nodes are labeled 1..n.  A :class:`GraphSchedule` is piecewise constant:
the communication graph is fixed between change events, and every epoch
must be connected.  Spectral quantities feed the dual step sizes and the
closed-form rate bounds, so they are computed with the deterministic
eigensolver from :mod:`dvopt.linalg`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import eig_sym, fro_norm

__all__ = [
    "GenerationError",
    "Topology",
    "GraphSchedule",
    "SpectralInfo",
    "gen_topology",
    "laplacian",
    "spectral_info",
    "theta_bounds",
    "change_stats",
    "mixing_matrix",
    "mixing_delta",
    "schedule_from_spec",
    "load_schedule",
    "alternating_schedule",
]

_ZERO_EIG_REL_TOL = 1e-9
_MAX_GEN_ATTEMPTS = 100

TOPOLOGY_KINDS = (
    "path",
    "cycle",
    "star",
    "complete",
    "erdos_renyi",
    "random_geometric",
)


class GenerationError(RuntimeError):
    """Random topology generation failed to produce a connected graph."""


@dataclass(frozen=True)
class Topology:
    """Undirected graph on nodes 1..n with optional positive edge weights.

    ``edges`` holds unordered pairs stored as (i, j) with i < j.  When
    ``weights`` is None every edge has weight 1.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("node count must be >= 1")
        canon = []
        seen = set()
        for e in self.edges:
            i, j = int(e[0]), int(e[1])
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise ValueError(f"edge ({i},{j}) outside 1..{self.n}")
            pair = (min(i, j), max(i, j))
            if pair in seen:
                raise ValueError(f"duplicate edge {pair}")
            seen.add(pair)
            canon.append(pair)
        object.__setattr__(self, "edges", tuple(canon))
        if self.weights is not None:
            w = tuple(float(x) for x in self.weights)
            if len(w) != len(self.edges):
                raise ValueError("one weight per edge required")
            if any(x <= 0 for x in w):
                raise ValueError("edge weights must be positive")
            object.__setattr__(self, "weights", w)

    def neighbor_lists(self) -> list[list[int]]:
        nbrs: list[list[int]] = [[] for _ in range(self.n + 1)]
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return nbrs

    def directed_pairs(self) -> np.ndarray:
        """All (sender, receiver) pairs, both directions per edge."""
        if not self.edges:
            return np.zeros((0, 2), dtype=int)
        e = np.asarray(self.edges, dtype=int)
        return np.vstack([e, e[:, ::-1]])

    def is_connected(self) -> bool:
        return _n_components(self) == 1


def _n_components(t: Topology) -> int:
    nbrs = t.neighbor_lists()
    seen = [False] * (t.n + 1)
    comps = 0
    for start in range(1, t.n + 1):
        if seen[start]:
            continue
        comps += 1
        stack = [start]
        seen[start] = True
        while stack:
            v = stack.pop()
            for w in nbrs[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
    return comps


@dataclass(frozen=True)
class SpectralInfo:
    """Laplacian spectral quantities of a connected topology.

    ``sigma_max`` and ``sigma_min_pos`` are the squares of the extreme
    Laplacian eigenvalues (the spectrum of W^T W = W^2); ``chi`` is the
    graph condition number lambda_max / lambda_min_pos.
    """

    lambda_max: float
    lambda_min_pos: float
    chi: float
    sigma_max: float
    sigma_min_pos: float


@dataclass(frozen=True)
class GraphSchedule:
    """Piecewise-constant sequence of topologies over a finite horizon.

    ``epochs`` is an ordered tuple of (start_iteration, Topology); the
    first epoch starts at 0 and start iterations increase strictly.
    Every epoch must be connected.
    """

    horizon: int
    epochs: tuple[tuple[int, Topology], ...]
    _starts: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not self.epochs:
            raise ValueError("schedule needs at least one epoch")
        starts = [int(s) for s, _ in self.epochs]
        if starts[0] != 0:
            raise ValueError("first epoch must start at iteration 0")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("epoch starts must increase strictly")
        if starts[-1] >= self.horizon:
            raise ValueError("epoch start beyond the horizon")
        n0 = self.epochs[0][1].n
        for idx, (_, topo) in enumerate(self.epochs):
            if topo.n != n0:
                raise ValueError("all epochs must share the same node set")
            if not topo.is_connected():
                raise ValueError(f"epoch {idx} topology is disconnected")
        object.__setattr__(self, "epochs", tuple((int(s), t) for s, t in self.epochs))
        object.__setattr__(self, "_starts", np.asarray(starts, dtype=int))

    @property
    def n(self) -> int:
        return self.epochs[0][1].n

    @property
    def change_iterations(self) -> tuple[int, ...]:
        """Iterations at which a new epoch begins (excluding 0)."""
        return tuple(int(s) for s, _ in self.epochs[1:])

    def epoch_index(self, k: int) -> int:
        if k < 0:
            raise ValueError("iteration index must be >= 0")
        k = min(k, self.horizon - 1)
        return int(np.searchsorted(self._starts, k, side="right") - 1)

    def topology_at(self, k: int) -> Topology:
        return self.epochs[self.epoch_index(k)][1]

    def topologies(self) -> list[Topology]:
        return [t for _, t in self.epochs]


def laplacian(t: Topology) -> np.ndarray:
    """Weighted graph Laplacian: degrees on the diagonal, -w_ij off it."""
    w = np.zeros((t.n, t.n))
    weights = t.weights if t.weights is not None else (1.0,) * len(t.edges)
    for (i, j), wij in zip(t.edges, weights):
        w[i - 1, j - 1] = -wij
        w[j - 1, i - 1] = -wij
    np.fill_diagonal(w, -w.sum(axis=1))
    return w


def spectral_info(t: Topology) -> SpectralInfo:
    """Extreme Laplacian eigenvalues and the graph condition number."""
    spec = eig_sym(laplacian(t))
    lam = spec.eigenvalues
    lam_max = float(lam[-1])
    if lam_max <= 0:
        raise ValueError("graph has no edges")
    threshold = _ZERO_EIG_REL_TOL * lam_max
    positive = lam[lam > threshold]
    if len(positive) != t.n - 1:
        raise ValueError("graph is disconnected (Laplacian kernel is not 1-dimensional)")
    lam_min_pos = float(positive[0])
    return SpectralInfo(
        lambda_max=lam_max,
        lambda_min_pos=lam_min_pos,
        chi=lam_max / lam_min_pos,
        sigma_max=lam_max**2,
        sigma_min_pos=lam_min_pos**2,
    )


def theta_bounds(s: GraphSchedule) -> tuple[float, float]:
    """Schedule-wide (max of sigma_max, min of sigma_min_pos)."""
    infos = [spectral_info(t) for t in s.topologies()]
    return (
        max(i.sigma_max for i in infos),
        min(i.sigma_min_pos for i in infos),
    )


def change_stats(s: GraphSchedule) -> tuple[int, float]:
    """Number of graph changes m and the change fraction m / horizon."""
    m = len(s.epochs) - 1
    return m, m / s.horizon


def mixing_matrix(t: Topology) -> np.ndarray:
    """Doubly stochastic averaging matrix I - W/n."""
    return np.eye(t.n) - laplacian(t) / t.n


def mixing_delta(s: GraphSchedule, b: int = 1) -> float:
    """Worst-case distance of the windowed mixing product from averaging.

    Computes ``sup_k sigma_max(V(k) V(k-1) ... V(k-b+1) - (1/n) 11^T)``
    over all windows of length ``b`` inside the schedule; the supremum of
    the largest singular value is evaluated via the symmetric
    eigendecomposition of M^T M.
    """
    if b < 1:
        raise ValueError("window length must be >= 1")
    if s.horizon < b:
        raise ValueError("horizon shorter than the window")
    n = s.n
    vs = [mixing_matrix(t) for t in s.topologies()]
    avg = np.full((n, n), 1.0 / n)
    best = 0.0
    seen: set[tuple[int, ...]] = set()
    for k in range(b - 1, s.horizon):
        window = tuple(s.epoch_index(k - i) for i in range(b))
        if window in seen:
            continue
        seen.add(window)
        prod = vs[window[0]]
        for idx in window[1:]:
            prod = prod @ vs[idx]
        diff = prod - avg
        gram = diff.T @ diff
        sigma_sq = eig_sym(0.5 * (gram + gram.T)).eigenvalues[-1]
        best = max(best, math.sqrt(max(sigma_sq, 0.0)))
    return best


# ---------------------------------------------------------------------------
# Topology generation


def _path_edges(n):
    return [(i, i + 1) for i in range(1, n)]


def _cycle_edges(n):
    return _path_edges(n) + [(1, n)]


def _star_edges(n):
    return [(1, j) for j in range(2, n + 1)]


def _complete_edges(n):
    return [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]


def gen_topology(kind: str, n: int, params: dict | None = None, seed: int = 0) -> Topology:
    """Generate a connected topology of the requested kind.

    Parameters
    ----------
    kind : str
        One of ``path``, ``cycle``, ``star``, ``complete``,
        ``erdos_renyi``, ``random_geometric``.
    n : int
        Node count (>= 2; cycles need >= 3).
    params : dict, optional
        ``{"p": ...}`` for Erdos-Renyi (default ``2 ln(n)/n``),
        ``{"radius": ...}`` for random geometric (default
        ``sqrt(2 ln(n) / (pi n))``, grown by 1.1x until connected).
    seed : int
        Seed for the random kinds; fixed seed gives a fixed topology.
        Random draws are retried up to 100 times until connected.
    """
    params = dict(params or {})
    if n < 2:
        raise ValueError("need at least 2 nodes")
    if kind == "path":
        return Topology(n, tuple(_path_edges(n)))
    if kind == "cycle":
        if n < 3:
            raise ValueError("cycle needs at least 3 nodes")
        return Topology(n, tuple(_cycle_edges(n)))
    if kind == "star":
        return Topology(n, tuple(_star_edges(n)))
    if kind == "complete":
        return Topology(n, tuple(_complete_edges(n)))
    if kind == "erdos_renyi":
        p = float(params.get("p", min(1.0, 2.0 * math.log(n) / n)))
        if not (0.0 < p <= 1.0):
            raise ValueError("edge probability must be in (0, 1]")
        rng = np.random.default_rng(seed)
        all_pairs = _complete_edges(n)
        for _ in range(_MAX_GEN_ATTEMPTS):
            draws = rng.random(len(all_pairs))
            edges = tuple(e for e, u in zip(all_pairs, draws) if u < p)
            t = Topology(n, edges)
            if t.is_connected():
                return t
        raise GenerationError(
            f"no connected Erdos-Renyi graph with n={n}, p={p:.4g} "
            f"in {_MAX_GEN_ATTEMPTS} attempts"
        )
    if kind == "random_geometric":
        radius = float(params.get("radius", math.sqrt(2.0 * math.log(n) / (math.pi * n))))
        if radius <= 0:
            raise ValueError("radius must be positive")
        rng = np.random.default_rng(seed)
        for _ in range(_MAX_GEN_ATTEMPTS):
            pts = rng.random((n, 2))
            r = radius
            # unit square: radius sqrt(2) connects everything, so this ends
            while True:
                d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
                edges = tuple(
                    (i + 1, j + 1)
                    for i in range(n)
                    for j in range(i + 1, n)
                    if d2[i, j] <= r * r
                )
                t = Topology(n, edges)
                if t.is_connected():
                    return t
                r *= 1.1
        raise GenerationError("random geometric generation failed")
    raise ValueError(f"unknown topology kind {kind!r}; expected one of {TOPOLOGY_KINDS}")


# ---------------------------------------------------------------------------
# Schedule construction

_SCHEDULE_KEYS = {"horizon", "epochs"}
_EPOCH_KEYS = {"start", "kind", "n", "params", "seed"}


def schedule_from_spec(spec: dict) -> GraphSchedule:
    """Build a schedule from its file representation.

    Expected shape::

        {"horizon": N,
         "epochs": [{"start": k, "kind": "...", "n": n,
                     "params": {...}, "seed": s}, ...]}

    ``params`` and ``seed`` are optional per epoch.
    """
    if not isinstance(spec, dict):
        raise ValueError("schedule spec must be a mapping")
    unknown = set(spec) - _SCHEDULE_KEYS
    if unknown:
        raise ValueError(f"unknown schedule fields: {sorted(unknown)}")
    if "horizon" not in spec or "epochs" not in spec:
        raise ValueError("schedule spec needs 'horizon' and 'epochs'")
    epochs = []
    for idx, e in enumerate(spec["epochs"]):
        unknown = set(e) - _EPOCH_KEYS
        if unknown:
            raise ValueError(f"epoch {idx}: unknown fields {sorted(unknown)}")
        for key in ("start", "kind", "n"):
            if key not in e:
                raise ValueError(f"epoch {idx}: missing field '{key}'")
        topo = gen_topology(e["kind"], int(e["n"]), e.get("params"), int(e.get("seed", 0)))
        epochs.append((int(e["start"]), topo))
    return GraphSchedule(int(spec["horizon"]), tuple(epochs))


def load_schedule(path) -> GraphSchedule:
    """Read a schedule spec file (JSON) and build the schedule."""
    with open(path, "r", encoding="utf-8") as fh:
        return schedule_from_spec(json.load(fh))


def alternating_schedule(
    kinds: tuple[str, str],
    n: int,
    period: int,
    horizon: int,
    params: tuple[dict | None, dict | None] = (None, None),
    seed: int = 0,
) -> GraphSchedule:
    """Schedule that switches between two topologies every ``period`` steps."""
    if period < 1:
        raise ValueError("period must be >= 1")
    topos = (
        gen_topology(kinds[0], n, params[0], seed),
        gen_topology(kinds[1], n, params[1], seed + 1),
    )
    epochs = [(start, topos[(start // period) % 2]) for start in range(0, horizon, period)]
    return GraphSchedule(horizon, tuple(epochs))
