"""Bridge between ``ShopState`` objects and the compiled search kernel."""

from __future__ import annotations

import numpy as np

from .config import SearchParams
from .heuristics import rule_code
from .mcts import SearchResult, final_choice
from .rng import SplitMix64
from .sim import DecisionPoint, Lookahead, ShopState

try:
    from . import _kernel
except ImportError:  # pragma: no cover - exercised only without a compiled build
    _kernel = None


def available() -> bool:
    return _kernel is not None


def encode_state(state: ShopState, machine: int, beta: float) -> tuple[dict, list, float]:
    """Flatten the jobs in the shop into the kernel's array layout.

    Slots follow ascending job id so buffer order matches candidate order.
    Returns (arrays, jobs by slot, busy integral of in-process work).
    """
    jobs = sorted(state.jobs.values(), key=lambda j: j.job_id)
    J = len(jobs)
    M = state.machine_count
    S = max((len(j.route) for j in jobs), default=1)
    slot = {job.job_id: i for i, job in enumerate(jobs)}
    due = np.zeros(J, dtype=np.int64)
    weight = np.zeros(J, dtype=np.float64)
    nops = np.zeros(J, dtype=np.int32)
    route_m = np.zeros(J * S, dtype=np.int32)
    route_p = np.zeros(J * S, dtype=np.int64)
    rem = np.zeros(J * S, dtype=np.int64)
    od = np.zeros(J * S, dtype=np.float64)
    block = np.zeros(1 + J + 3 * M + M * J, dtype=np.int64)
    o_ptr, o_busy, o_fin, o_blen, o_buf = 1, 1 + J, 1 + J + M, 1 + J + 2 * M, 1 + J + 3 * M
    block[0] = state.clock
    for i, job in enumerate(jobs):
        due[i] = job.due_date
        weight[i] = job.weight
        n = len(job.route)
        nops[i] = n
        procs = [o.proc_time for o in job.route]
        total = sum(procs)
        r, d = job.release_time, job.due_date
        cum = 0
        tail = total
        for k, op in enumerate(job.route):
            route_m[i * S + k] = op.machine_id
            route_p[i * S + k] = op.proc_time
            rem[i * S + k] = tail
            tail -= op.proc_time
            cum += op.proc_time
            od[i * S + k] = r + ((d - r) * cum) / total
        block[o_ptr + i] = state.progress[job.job_id]
    look = Lookahead(origin=state.clock, beta=float(beta), n_jobs=J)
    for m in state.machines:
        if m.current is None:
            block[o_busy + m.machine_id] = -1
        else:
            block[o_busy + m.machine_id] = slot[m.current.job_id]
            block[o_fin + m.machine_id] = m.finish
            look.add_busy(state.clock, m.finish)
        block[o_blen + m.machine_id] = len(m.buffer)
        for k, op in enumerate(m.buffer):
            block[o_buf + m.machine_id * J + k] = slot[op.job_id]
    arrays = dict(J=J, M=M, S=S, origin=int(state.clock), beta=float(beta), k_jobs=J,
                  machine=int(machine), due=due, weight=weight, nops=nops, route_m=route_m,
                  route_p=route_p, rem=rem, od=od, block=block)
    return arrays, jobs, look.busy


def new_tree(state: ShopState, decision: DecisionPoint, rule: str, params: SearchParams):
    arrays, jobs, busy = encode_state(state, decision.machine_id, params.beta)
    return _kernel.KernelTree(arrays, jobs, rule_code(rule), params.alpha, params.c,
                              params.temperature, busy)


def kernel_search(root_state: ShopState, decision: DecisionPoint, rule: str = "random",
                  params: SearchParams | None = None, rng: SplitMix64 | None = None,
                  reused=None) -> SearchResult:
    """Compiled counterpart of :func:`jobshop_planner.mcts.search`."""
    if _kernel is None:
        raise RuntimeError("compiled kernel is not available")
    params = params or SearchParams()
    cands = decision.candidates
    if len(cands) == 1:
        return SearchResult([1.0], cands[0], None, 0, [0])
    rng = rng if rng is not None else SplitMix64(0)
    tree = reused if reused is not None else new_tree(root_state, decision, rule, params)
    n_iter = max(0, params.n_mcts - tree.root_visits)
    rng.state = tree.run(n_iter, rng.state)
    edges = tree.root_edges()
    by_job = {op.job_id: op for op in cands}
    visits = [e[1] for e in edges]
    total = sum(visits)
    if total == 0:
        pi = [1.0 / len(visits)] * len(visits)
        idx = tree.root_order()[0]
    else:
        pi = [v / total for v in visits]
        alpha = params.alpha
        values = [alpha * q + (1.0 - alpha) * rho if n > 0 else -np.inf
                  for _, n, q, rho, _ in edges]
        idx = final_choice(visits, values, params.selection_criterion)
    chosen = by_job[edges[idx][0]]
    return SearchResult(pi, chosen, tree, n_iter, visits)
