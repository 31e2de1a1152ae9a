"""Time one search per decision point with the compiled kernel and the pure-Python search.

    python3 benchmarks/bench_kernel.py --budget 100 --points 20

Both backends run on the same decision points with the same rng seed, and the
script checks that they pick the same action before reporting the speed-up.
"""

import argparse
import statistics
import time

from jobshop_planner import accel, mcts
from jobshop_planner.config import ScenarioConfig, SearchParams
from jobshop_planner.heuristics import rollout_policy
from jobshop_planner.instance import generate_instance
from jobshop_planner.rng import SplitMix64
from jobshop_planner.sim import DecisionPoint, ShopState, SimulationEnd, advance, apply_action


def decision_points(seed, count, utilization):
    cfg = ScenarioConfig.desk(utilization=utilization)
    state = ShopState.initial(cfg.machine_count, generate_instance(seed, cfg), stop_after=700)
    pol = rollout_policy("random", SplitMix64(seed))
    points = []
    k = 0
    while len(points) < count:
        ev = advance(state)
        if ev is SimulationEnd:
            break
        k += 1
        if k > 100 and len(ev.candidates) > 1 and k % 5 == 0:
            snap = state.copy()
            points.append((snap, DecisionPoint(snap, ev.machine_id, ev.candidates)))
        apply_action(state, ev, pol(ev, state))
    return points


def timed(fn, points, params, rule):
    times, chosen = [], []
    for i, (state, dp) in enumerate(points):
        t0 = time.perf_counter()
        res = fn(state, dp, rule, params, SplitMix64(i))
        times.append(time.perf_counter() - t0)
        chosen.append(res.chosen)
    return times, chosen


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--budget", type=int, default=100)
    ap.add_argument("--points", type=int, default=20)
    ap.add_argument("--rule", default="random")
    ap.add_argument("--utilization", type=float, default=0.95)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not accel.available():
        raise SystemExit("compiled kernel is not built; run `pip install -e . --no-build-isolation`")

    points = decision_points(args.seed, args.points, args.utilization)
    params = SearchParams(n_mcts=args.budget)
    py_t, py_c = timed(mcts.search, points, params, args.rule)
    ck_t, ck_c = timed(accel.kernel_search, points, params, args.rule)
    if py_c != ck_c:
        raise SystemExit("backends disagree on the chosen action")

    print(f"{len(points)} decision points, budget {args.budget}, rule {args.rule}")
    for name, ts in (("python", py_t), ("kernel", ck_t)):
        ms = [t * 1000 for t in ts]
        print(f"  {name:7s} mean {statistics.fmean(ms):9.3f} ms  median {statistics.median(ms):9.3f} ms")
    print(f"  speed-up x{sum(py_t) / sum(ck_t):.1f}")


if __name__ == "__main__":
    main()
