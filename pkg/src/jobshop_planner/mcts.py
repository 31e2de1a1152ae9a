"""Pure-Python Monte Carlo tree search over lookahead clones of the shop.

Tree policy: argmax of  E(s,a) + c * p(s,a) * sqrt(n(s)) / (1 + n(s,a))  with
E = alpha * q + (1 - alpha) * rho. q and rho are computed on demand from
per-edge raw sums and the search-wide min/max of rollout tardiness and
robustness, so rescaling never goes stale. alpha = 1 is plain PUCT.

This module is the reference implementation; ``jobshop_planner._kernel``
runs the same algorithm in compiled code and must agree with it exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .config import SearchParams
from .heuristics import Policy, rollout_policy, rule_prior
from .instance import Operation
from .rng import SplitMix64
from .sim import DecisionPoint, ShopState, SimulationEnd, advance, apply_action, clone_for_lookahead, run_policy

PriorSource = Callable[[DecisionPoint, ShopState], Sequence[float]]

UNVISITED_VALUE = 0.5


@dataclass
class SearchStats:
    t_min: float = math.inf
    t_max: float = -math.inf
    r_min: float = math.inf
    r_max: float = -math.inf
    iterations: int = 0

    def update(self, t: float, r: float) -> None:
        if t < self.t_min:
            self.t_min = t
        if t > self.t_max:
            self.t_max = t
        if r < self.r_min:
            self.r_min = r
        if r > self.r_max:
            self.r_max = r

    def scale_value(self, mean_t: float) -> float:
        if not self.t_max > self.t_min:
            return 0.5
        q = (self.t_max - mean_t) / (self.t_max - self.t_min)
        return 0.0 if q < 0.0 else (1.0 if q > 1.0 else q)

    def scale_robustness(self, mean_r: float) -> float:
        if not self.r_max > self.r_min:
            return 0.5
        rho = (mean_r - self.r_min) / (self.r_max - self.r_min)
        return 0.0 if rho < 0.0 else (1.0 if rho > 1.0 else rho)


class SearchEdge:
    __slots__ = ("action", "prior", "n", "sum_t", "sum_r", "child")

    def __init__(self, action: Operation, prior: float) -> None:
        self.action = action
        self.prior = prior
        self.n = 0
        self.sum_t = 0.0
        self.sum_r = 0.0
        self.child: SearchNode | None = None

    def q(self, stats: SearchStats) -> float:
        if self.n == 0:
            return UNVISITED_VALUE
        return stats.scale_value(self.sum_t / self.n)

    def rho(self, stats: SearchStats) -> float:
        if self.n == 0:
            return UNVISITED_VALUE
        return stats.scale_robustness(self.sum_r / self.n)

    def exploit(self, stats: SearchStats, alpha: float) -> float:
        return alpha * self.q(stats) + (1.0 - alpha) * self.rho(stats)


class SearchNode:
    __slots__ = ("state", "decision", "edges", "order", "n_expanded", "n", "init_evals", "outcome")

    def __init__(self, state: ShopState, decision: DecisionPoint | None) -> None:
        self.state = state
        self.decision = decision
        self.edges: list[SearchEdge] | None = None
        self.order: list[int] = []
        self.n_expanded = 0
        self.n = 0
        self.init_evals = 0
        self.outcome: tuple[float, float] | None = None
        if decision is None:
            self.outcome = state.look.outcome(state.clock, state.machine_count)

    @property
    def terminal(self) -> bool:
        return self.decision is None

    @property
    def fully_expanded(self) -> bool:
        return self.edges is not None and self.n_expanded == len(self.edges)

    def init_edges(self, prior: Sequence[float]) -> None:
        cands = self.decision.candidates
        self.edges = [SearchEdge(op, float(p)) for op, p in zip(cands, prior)]
        self.order = sorted(range(len(cands)), key=lambda i: -self.edges[i].prior)


def _node_at(state: ShopState) -> SearchNode:
    ev = advance(state, auto_dispatch=True)
    return SearchNode(state, None if ev is SimulationEnd else ev)


def select_child(node: SearchNode, stats: SearchStats, params: SearchParams) -> SearchEdge:
    """PUCT / robustness-aware selection over the node's expanded edges."""
    if not node.edges or node.n_expanded == 0:
        raise ValueError("node has no expanded children; expand first")
    sqrt_n = math.sqrt(node.n)
    alpha = params.alpha
    best = None
    best_score = -math.inf
    for edge in node.edges:
        if edge.child is None:
            continue
        u = params.c * edge.prior * sqrt_n / (1.0 + edge.n)
        score = edge.exploit(stats, alpha) + u
        if best is None or score > best_score:
            best = edge
            best_score = score
    return best


def expand(node: SearchNode, prior: PriorSource | Sequence[float] | None = None) -> SearchEdge:
    """Create the child of the highest-prior unexpanded action."""
    if node.terminal:
        raise ValueError("cannot expand a terminal node")
    if node.edges is None:
        if callable(prior):
            prior = prior(node.decision, node.state)
        if prior is None:
            n = len(node.decision.candidates)
            prior = [1.0 / n] * n
        node.init_edges(prior)
    if node.n_expanded >= len(node.edges):
        raise ValueError("node is already fully expanded")
    edge = node.edges[node.order[node.n_expanded]]
    node.n_expanded += 1
    state = node.state.copy()
    apply_action(state, DecisionPoint(state, node.decision.machine_id, node.decision.candidates), edge.action)
    edge.child = _node_at(state)
    return edge


def rollout(leaf: SearchNode, policy: Policy, tardiness_offset: float = 0.0) -> tuple[float, float]:
    """Simulate the leaf's jobs to completion; returns (mean weighted tardiness, robustness)."""
    if leaf.terminal:
        t, r = leaf.outcome
        return t + tardiness_offset, r
    state = leaf.state.copy()
    ev = DecisionPoint(state, leaf.decision.machine_id, leaf.decision.candidates)
    while True:
        apply_action(state, ev, policy(ev, state))
        ev = advance(state, auto_dispatch=True)
        if ev is SimulationEnd:
            break
    t, r = state.look.outcome(state.clock, state.machine_count)
    return t + tardiness_offset, r


def backpropagate(path: list[tuple[SearchNode, SearchEdge]], tardiness: float, robustness: float,
                  stats: SearchStats) -> SearchStats:
    stats.update(tardiness, robustness)
    for node, edge in path:
        node.n += 1
        edge.n += 1
        edge.sum_t += tardiness
        edge.sum_r += robustness
    stats.iterations += 1
    return stats


class SearchTree:
    """A search tree plus the statistics needed to continue searching it."""

    backend = "python"

    def __init__(self, root: SearchNode, stats: SearchStats) -> None:
        self.root = root
        self.stats = stats

    @property
    def root_visits(self) -> int:
        return self.root.n

    def child_node(self, action: Operation) -> SearchNode | None:
        if self.root.edges is None:
            return None
        for edge in self.root.edges:
            if edge.action == action:
                return edge.child
        return None

    def child_signature(self, action: Operation) -> tuple | None:
        child = self.child_node(action)
        if child is None or child.terminal:
            return None
        return child.state.signature(), child.decision.machine_id, tuple(o.job_id for o in child.decision.candidates)

    def reroot(self, action: Operation) -> "SearchTree":
        return SearchTree(self.child_node(action), self.stats)

    def edge_stats(self) -> list[dict]:
        """Per root edge: action, n, q, rho, prior."""
        out = []
        for edge in self.root.edges or []:
            out.append(dict(action=edge.action, n=edge.n, q=edge.q(self.stats),
                            rho=edge.rho(self.stats), prior=edge.prior))
        return out

    def iter_nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            for edge in node.edges or []:
                if edge.child is not None:
                    stack.append(edge.child)

    def dump(self, depth: int = 2) -> str:
        lines: list[str] = []

        def walk(node: SearchNode, level: int) -> None:
            if level >= depth or not node.edges:
                return
            for edge in node.edges:
                if edge.child is None:
                    continue
                a = edge.action
                lines.append(f"{'  ' * level}J{a.job_id}.{a.index} n={edge.n} q={edge.q(self.stats):.4f} "
                             f"rho={edge.rho(self.stats):.4f} p={edge.prior:.4f}")
                walk(edge.child, level + 1)

        lines.append(f"root n={self.root.n}")
        walk(self.root, 0)
        return "\n".join(lines)


@dataclass
class SearchResult:
    pi: list[float]
    chosen: Operation
    tree: object | None
    iterations: int
    visits: list[int] = field(default_factory=list)


def final_choice(visits: Sequence[int], values: Sequence[float], criterion: str) -> int:
    best = 0
    if criterion == "value":
        for i in range(1, len(values)):
            if values[i] > values[best]:
                best = i
        return best
    for i in range(1, len(visits)):
        if visits[i] > visits[best]:
            best = i
    return best


def run_iteration(root: SearchNode, stats: SearchStats, params: SearchParams,
                  prior: PriorSource, policy: Policy, tardiness_offset: float = 0.0,
                  on_select: Callable[[SearchEdge], None] | None = None) -> None:
    node = root
    path: list[tuple[SearchNode, SearchEdge]] = []
    while True:
        if node.terminal:
            t, r = rollout(node, policy, tardiness_offset)
            node.n += 1
            node.init_evals += 1
            break
        if not node.fully_expanded:
            edge = expand(node, prior)
            path.append((node, edge))
            child = edge.child
            t, r = rollout(child, policy, tardiness_offset)
            child.n += 1
            child.init_evals += 1
            break
        edge = select_child(node, stats, params)
        if on_select is not None:
            on_select(edge)
        path.append((node, edge))
        node = edge.child
    backpropagate(path, t, r, stats)


def search(root_state: ShopState, decision: DecisionPoint, rule: str = "random",
           params: SearchParams | None = None, rng: SplitMix64 | None = None,
           reused: SearchTree | None = None, prior_source: PriorSource | None = None,
           policy: Policy | None = None, tardiness_offset: float = 0.0,
           on_select: Callable[[SearchEdge], None] | None = None) -> SearchResult:
    """Plan one dispatch at ``decision``; returns the visit distribution, choice and tree."""
    params = params or SearchParams()
    cands = decision.candidates
    if len(cands) == 1:
        return SearchResult([1.0], cands[0], None, 0, [0])
    if prior_source is None:
        prior_source = rule_prior(rule, params.temperature)
    if policy is None:
        policy = rollout_policy(rule, rng if rng is not None else SplitMix64(0))
    if reused is not None:
        root, stats = reused.root, reused.stats
    else:
        clone = clone_for_lookahead(root_state, params.beta)
        root = SearchNode(clone, DecisionPoint(clone, decision.machine_id, cands))
        stats = SearchStats()
    n_iter = max(0, params.n_mcts - root.n)
    for _ in range(n_iter):
        run_iteration(root, stats, params, prior_source, policy, tardiness_offset, on_select)
    if root.edges is None:
        root.init_edges(prior_source(root.decision, root.state))
    visits = [e.n for e in root.edges]
    total = sum(visits)
    if total == 0:
        # nothing searched (budget already spent by reuse): fall back to the prior
        pi = [1.0 / len(visits)] * len(visits)
        idx = root.order[0]
    else:
        pi = [v / total for v in visits]
        values = [e.exploit(stats, params.alpha) if e.n > 0 else -math.inf for e in root.edges]
        idx = final_choice(visits, values, params.selection_criterion)
    chosen = root.edges[idx].action
    return SearchResult(pi, chosen, SearchTree(root, stats), n_iter, visits)
