# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled search kernel.

Runs the same tree search as ``jobshop_planner.mcts`` on a flat array encoding
of the lookahead shop. Floating point expressions are written in the same
order as the Python reference so both backends produce identical trees.
"""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free, realloc
from libc.string cimport memcpy
from libc.math cimport exp, sqrt, INFINITY
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()


cdef void* _data(object arr, object dtype) except NULL:
    cdef cnp.ndarray a = arr
    if a.dtype != dtype or not a.flags.c_contiguous:
        raise ValueError(f"expected a contiguous {dtype} array")
    return cnp.PyArray_DATA(a)

ctypedef int64_t i64

cdef enum:
    RANDOM_RULE = 10

cdef struct Table:
    int J
    int M
    int S
    int size
    i64 origin
    double beta
    int k_jobs
    i64* due
    double* weight
    int* nops
    int* route_m
    i64* route_p
    i64* rem
    double* od
    # block offsets
    int o_ptr
    int o_busy
    int o_fin
    int o_blen
    int o_buf


cdef struct Node:
    i64* st
    double tard
    double busy
    int machine
    int ncand
    int* cand
    double* prior
    int* order
    i64* nsa
    double* sumt
    double* sumr
    Node** child
    int nexp
    int edges_ready
    i64 n
    i64 init_evals
    double out_t
    double out_r


cdef struct Params:
    double alpha
    double c
    double temperature
    int rule


cdef struct Stats:
    double t_min
    double t_max
    double r_min
    double r_max
    i64 iterations


# -- rng ---------------------------------------------------------------------

cdef inline uint64_t sm_next(uint64_t* s) noexcept nogil:
    s[0] += <uint64_t>0x9E3779B97F4A7C15ULL
    cdef uint64_t z = s[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline int sm_below(uint64_t* s, int n) noexcept nogil:
    return <int>(((sm_next(s) >> 32) * <uint64_t>n) >> 32)


# -- state primitives --------------------------------------------------------

cdef inline double w_int(double x, double beta) noexcept nogil:
    return x - x * x / (2.0 * beta)


cdef inline void add_busy(Table* T, double* busy, i64 start, i64 finish) noexcept nogil:
    cdef double s = <double>(start - T.origin)
    cdef double e
    if s < T.beta:
        e = <double>(finish - T.origin)
        if e > T.beta:
            e = T.beta
        busy[0] += w_int(e, T.beta) - w_int(s, T.beta)


cdef inline void enqueue(Table* T, i64* st, int m, int j) noexcept nogil:
    cdef i64* buf = st + T.o_buf + m * T.J
    cdef i64 n = st[T.o_blen + m]
    cdef i64 i = n
    while i > 0 and buf[i - 1] > j:
        buf[i] = buf[i - 1]
        i -= 1
    buf[i] = j
    st[T.o_blen + m] = n + 1


cdef inline void dispatch(Table* T, i64* st, double* busy, int m, int pos) noexcept nogil:
    cdef i64* buf = st + T.o_buf + m * T.J
    cdef int n = <int>st[T.o_blen + m]
    cdef int j = <int>buf[pos]
    cdef int i
    for i in range(pos, n - 1):
        buf[i] = buf[i + 1]
    st[T.o_blen + m] = n - 1
    cdef int op = <int>st[T.o_ptr + j]
    cdef i64 clk = st[0]
    st[T.o_busy + m] = j
    st[T.o_fin + m] = clk + T.route_p[j * T.S + op]
    add_busy(T, busy, clk, st[T.o_fin + m])


cdef inline void complete(Table* T, i64* st, double* tard, int m) noexcept nogil:
    cdef int j = <int>st[T.o_busy + m]
    st[T.o_busy + m] = -1
    cdef int op = <int>st[T.o_ptr + j] + 1
    st[T.o_ptr + j] = op
    cdef i64 late
    if op >= T.nops[j]:
        late = st[0] - T.due[j]
        if late > 0:
            tard[0] += T.weight[j] * <double>late
    else:
        enqueue(T, st, T.route_m[j * T.S + op], j)


cdef int advance(Table* T, i64* st, double* tard, double* busy) noexcept nogil:
    """Run to the next multi-candidate decision; returns its machine or -1 at the end."""
    cdef int m
    cdef i64 t
    while True:
        for m in range(T.M):
            if st[T.o_busy + m] < 0 and st[T.o_blen + m] > 0:
                if st[T.o_blen + m] == 1:
                    dispatch(T, st, busy, m, 0)
                    continue
                return m
        t = -1
        for m in range(T.M):
            if st[T.o_busy + m] >= 0 and (t < 0 or st[T.o_fin + m] < t):
                t = st[T.o_fin + m]
        if t < 0:
            return -1
        st[0] = t
        for m in range(T.M):
            if st[T.o_busy + m] >= 0 and st[T.o_fin + m] == t:
                complete(T, st, tard, m)


cdef inline void outcome(Table* T, i64* st, double tard, double busy, double* out_t, double* out_r) noexcept nogil:
    if T.k_jobs > 0:
        out_t[0] = tard / T.k_jobs
    else:
        out_t[0] = 0.0
    cdef double h = <double>(st[0] - T.origin)
    if h > T.beta:
        h = T.beta
    cdef double r = -(T.M * w_int(h, T.beta) - busy)
    if r > 0.0:
        r = 0.0
    out_r[0] = r


# -- dispatching rules ---------------------------------------------------------

cdef inline i64 winq(Table* T, i64* st, int j) noexcept nogil:
    cdef int op = <int>st[T.o_ptr + j]
    if op + 1 >= T.nops[j]:
        return 0
    cdef int m2 = T.route_m[j * T.S + op + 1]
    cdef i64* buf = st + T.o_buf + m2 * T.J
    cdef int n = <int>st[T.o_blen + m2]
    cdef i64 work = 0
    cdef int i, jj
    for i in range(n):
        jj = <int>buf[i]
        work += T.route_p[jj * T.S + st[T.o_ptr + jj]]
    if st[T.o_busy + m2] >= 0:
        work += st[T.o_fin + m2] - st[0]
    return work


cdef double score(Table* T, i64* st, int code, int j, double pbar) noexcept nogil:
    cdef int op = <int>st[T.o_ptr + j]
    cdef i64 t = st[0]
    cdef i64 pt = T.route_p[j * T.S + op]
    cdef i64 d = T.due[j]
    cdef i64 rem, den, slack, npt
    cdef double x, a
    if code == 0:
        return <double>(-pt)
    if code == 1:
        return <double>(-winq(T, st, j))
    if code == RANDOM_RULE:
        return 0.0
    rem = T.rem[j * T.S + op]
    if code == 2:
        den = d - t
        if den == 0:
            den = 1
        return <double>rem / <double>den
    if code == 3:
        return <double>(-(d - t))
    if code == 4:
        slack = d - t - rem
        if slack < 0:
            slack = 0
        return (T.weight[j] / <double>pt) * exp(-(<double>slack) / (3.0 * pbar))
    if code == 5:
        slack = d - t - rem
        if slack < 0:
            slack = 0
        x = 1.0 - <double>slack / (2.0 * <double>rem)
        if not x > 0.0:
            x = 0.0
        return (T.weight[j] / <double>pt) * x
    if code == 6:
        a = <double>(t + pt)
        x = T.od[j * T.S + op]
        if x > a:
            a = x
        return -a
    if code == 7:
        return -(<double>(d - t) / <double>rem + <double>pt)
    if code == 8:
        return <double>(-(pt + winq(T, st, j) + (d - t)))
    if code == 9:
        if op + 1 < T.nops[j]:
            npt = T.route_p[j * T.S + op + 1]
        else:
            npt = 0
        return <double>(-(2 * pt + winq(T, st, j) + npt))
    return 0.0


cdef void rule_scores(Table* T, i64* st, int code, int m, double* out) noexcept nogil:
    cdef i64* buf = st + T.o_buf + m * T.J
    cdef int n = <int>st[T.o_blen + m]
    cdef i64 psum = 0
    cdef int i, j
    for i in range(n):
        j = <int>buf[i]
        psum += T.route_p[j * T.S + st[T.o_ptr + j]]
    cdef double pbar = <double>psum / <double>n
    for i in range(n):
        out[i] = score(T, st, code, <int>buf[i], pbar)


cdef int choose(Table* T, i64* st, int code, int m, double* scratch, uint64_t* rng) noexcept nogil:
    cdef int n = <int>st[T.o_blen + m]
    cdef int i, best
    if n == 1:
        return 0
    if code == RANDOM_RULE:
        return sm_below(rng, n)
    rule_scores(T, st, code, m, scratch)
    best = 0
    for i in range(1, n):
        if scratch[i] > scratch[best]:
            best = i
    return best


# -- tree --------------------------------------------------------------------

cdef Node* new_node(Table* T, i64* st, double tard, double busy, int machine) noexcept nogil:
    cdef Node* node = <Node*>malloc(sizeof(Node))
    node.st = st
    node.tard = tard
    node.busy = busy
    node.machine = machine
    node.nexp = 0
    node.edges_ready = 0
    node.n = 0
    node.init_evals = 0
    node.out_t = 0.0
    node.out_r = 0.0
    node.cand = NULL
    node.prior = NULL
    node.order = NULL
    node.nsa = NULL
    node.sumt = NULL
    node.sumr = NULL
    node.child = NULL
    cdef int i
    if machine < 0:
        node.ncand = 0
        outcome(T, st, tard, busy, &node.out_t, &node.out_r)
    else:
        node.ncand = <int>st[T.o_blen + machine]
        node.cand = <int*>malloc(node.ncand * sizeof(int))
        for i in range(node.ncand):
            node.cand[i] = <int>st[T.o_buf + machine * T.J + i]
    return node


cdef void free_node(Node* node) noexcept nogil:
    cdef int i
    if node == NULL:
        return
    if node.child != NULL:
        for i in range(node.ncand):
            free_node(node.child[i])
    free(node.st)
    free(node.cand)
    free(node.prior)
    free(node.order)
    free(node.nsa)
    free(node.sumt)
    free(node.sumr)
    free(node.child)
    free(node)


cdef void init_edges(Table* T, Params* P, Node* node, double* scratch) noexcept nogil:
    cdef int n = node.ncand
    cdef int i, k, tmp
    cdef double lo, hi, span, total
    node.prior = <double*>malloc(n * sizeof(double))
    node.order = <int*>malloc(n * sizeof(int))
    node.nsa = <i64*>malloc(n * sizeof(i64))
    node.sumt = <double*>malloc(n * sizeof(double))
    node.sumr = <double*>malloc(n * sizeof(double))
    node.child = <Node**>malloc(n * sizeof(Node*))
    for i in range(n):
        node.nsa[i] = 0
        node.sumt[i] = 0.0
        node.sumr[i] = 0.0
        node.child[i] = NULL
    if P.rule == RANDOM_RULE:
        for i in range(n):
            node.prior[i] = 1.0 / n
    else:
        rule_scores(T, node.st, P.rule, node.machine, scratch)
        lo = scratch[0]
        hi = scratch[0]
        for i in range(1, n):
            if scratch[i] < lo:
                lo = scratch[i]
            if scratch[i] > hi:
                hi = scratch[i]
        if not hi > lo:
            for i in range(n):
                node.prior[i] = 1.0 / n
        else:
            span = hi - lo
            for i in range(n):
                node.prior[i] = exp(((scratch[i] - lo) / span - 1.0) / P.temperature)
            total = 0.0
            for i in range(n):
                total += node.prior[i]
            for i in range(n):
                node.prior[i] = node.prior[i] / total
    # stable sort by descending prior
    for i in range(n):
        node.order[i] = i
    for i in range(1, n):
        tmp = node.order[i]
        k = i
        while k > 0 and node.prior[tmp] > node.prior[node.order[k - 1]]:
            node.order[k] = node.order[k - 1]
            k -= 1
        node.order[k] = tmp
    node.edges_ready = 1


cdef inline double scale_q(Stats* S, double mean_t) noexcept nogil:
    if not S.t_max > S.t_min:
        return 0.5
    cdef double q = (S.t_max - mean_t) / (S.t_max - S.t_min)
    if q < 0.0:
        return 0.0
    if q > 1.0:
        return 1.0
    return q


cdef inline double scale_r(Stats* S, double mean_r) noexcept nogil:
    if not S.r_max > S.r_min:
        return 0.5
    cdef double rho = (mean_r - S.r_min) / (S.r_max - S.r_min)
    if rho < 0.0:
        return 0.0
    if rho > 1.0:
        return 1.0
    return rho


cdef inline double edge_q(Stats* S, Node* node, int i) noexcept nogil:
    if node.nsa[i] == 0:
        return 0.5
    return scale_q(S, node.sumt[i] / <double>node.nsa[i])


cdef inline double edge_rho(Stats* S, Node* node, int i) noexcept nogil:
    if node.nsa[i] == 0:
        return 0.5
    return scale_r(S, node.sumr[i] / <double>node.nsa[i])


cdef int select_edge(Stats* S, Params* P, Node* node) noexcept nogil:
    cdef double sqrt_n = sqrt(<double>node.n)
    cdef int best = -1
    cdef double best_score = -INFINITY
    cdef double u, e, sc
    cdef int i
    for i in range(node.ncand):
        if node.child[i] == NULL:
            continue
        u = P.c * node.prior[i] * sqrt_n / (1.0 + <double>node.nsa[i])
        e = P.alpha * edge_q(S, node, i) + (1.0 - P.alpha) * edge_rho(S, node, i)
        sc = e + u
        if best < 0 or sc > best_score:
            best = i
            best_score = sc
    return best


cdef class KernelTree:
    """Search tree over a flat encoding of the lookahead shop."""

    cdef Table T
    cdef Params P
    cdef Stats S
    cdef Node* root
    cdef double* scratch
    cdef i64* roll
    cdef Node** path_nodes
    cdef int* path_edges
    cdef int path_cap
    cdef object _arrays
    cdef public object jobs
    cdef public object job_index
    cdef public str backend

    def __cinit__(self):
        self.root = NULL
        self.scratch = NULL
        self.roll = NULL
        self.path_nodes = NULL
        self.path_edges = NULL
        self.path_cap = 0

    def __dealloc__(self):
        free_node(self.root)
        free(self.scratch)
        free(self.roll)
        free(self.path_nodes)
        free(self.path_edges)

    def __init__(self, dict arrays, list jobs, int rule, double alpha, double c,
                 double temperature, double initial_busy):
        """Build from ``encode_state`` output (see ``jobshop_planner.accel``)."""
        cdef Table* T = &self.T
        cdef cnp.ndarray block = arrays["block"]
        cdef i64* st
        cdef int machine = arrays["machine"]
        self._arrays = arrays
        self.jobs = jobs
        self.job_index = {job.job_id: i for i, job in enumerate(jobs)}
        self.backend = "kernel"
        T.J = arrays["J"]
        T.M = arrays["M"]
        T.S = arrays["S"]
        T.origin = arrays["origin"]
        T.beta = arrays["beta"]
        T.k_jobs = arrays["k_jobs"]
        T.o_ptr = 1
        T.o_busy = 1 + T.J
        T.o_fin = 1 + T.J + T.M
        T.o_blen = 1 + T.J + 2 * T.M
        T.o_buf = 1 + T.J + 3 * T.M
        T.size = 1 + T.J + 3 * T.M + T.M * T.J
        T.due = <i64*>_data(arrays["due"], np.int64)
        T.weight = <double*>_data(arrays["weight"], np.float64)
        T.nops = <int*>_data(arrays["nops"], np.int32)
        T.route_m = <int*>_data(arrays["route_m"], np.int32)
        T.route_p = <i64*>_data(arrays["route_p"], np.int64)
        T.rem = <i64*>_data(arrays["rem"], np.int64)
        T.od = <double*>_data(arrays["od"], np.float64)
        if block.dtype != np.int64 or not block.flags.c_contiguous or block.shape[0] != T.size:
            raise ValueError("state block has the wrong layout")
        self.P.alpha = alpha
        self.P.c = c
        self.P.temperature = temperature
        self.P.rule = rule
        self.S.t_min = INFINITY
        self.S.t_max = -INFINITY
        self.S.r_min = INFINITY
        self.S.r_max = -INFINITY
        self.S.iterations = 0
        self.scratch = <double*>malloc((T.J + 1) * sizeof(double))
        self.roll = <i64*>malloc(T.size * sizeof(i64))
        self.path_cap = 64
        self.path_nodes = <Node**>malloc(self.path_cap * sizeof(Node*))
        self.path_edges = <int*>malloc(self.path_cap * sizeof(int))
        st = <i64*>malloc(T.size * sizeof(i64))
        memcpy(st, cnp.PyArray_DATA(block), T.size * sizeof(i64))
        self.root = new_node(T, st, 0.0, initial_busy, machine)

    def rollout_root(self, uint64_t rng_state):
        """Roll the root state out under the rule; returns (tardiness, robustness, rng_state)."""
        cdef uint64_t s = rng_state
        cdef double t = 0.0, r = 0.0
        self.rollout(self.root, &s, &t, &r)
        return t, r, s

    # -- search loop -----------------------------------------------------------

    cdef void push(self, int depth, Node* node, int edge) noexcept nogil:
        if depth >= self.path_cap:
            self.path_cap *= 2
            self.path_nodes = <Node**>realloc(self.path_nodes, self.path_cap * sizeof(Node*))
            self.path_edges = <int*>realloc(self.path_edges, self.path_cap * sizeof(int))
        self.path_nodes[depth] = node
        self.path_edges[depth] = edge

    cdef void rollout(self, Node* leaf, uint64_t* rng, double* out_t, double* out_r) noexcept nogil:
        cdef Table* T = &self.T
        if leaf.machine < 0:
            out_t[0] = leaf.out_t
            out_r[0] = leaf.out_r
            return
        cdef i64* st = self.roll
        memcpy(st, leaf.st, T.size * sizeof(i64))
        cdef double tard = leaf.tard
        cdef double busy = leaf.busy
        cdef int m = leaf.machine
        cdef int pos
        while m >= 0:
            pos = choose(T, st, self.P.rule, m, self.scratch, rng)
            dispatch(T, st, &busy, m, pos)
            m = advance(T, st, &tard, &busy)
        outcome(T, st, tard, busy, out_t, out_r)

    cdef Node* make_child(self, Node* node, int i) noexcept nogil:
        cdef Table* T = &self.T
        cdef i64* st = <i64*>malloc(T.size * sizeof(i64))
        memcpy(st, node.st, T.size * sizeof(i64))
        cdef double tard = node.tard
        cdef double busy = node.busy
        dispatch(T, st, &busy, node.machine, i)
        cdef int m = advance(T, st, &tard, &busy)
        return new_node(T, st, tard, busy, m)

    cdef void iterate(self, uint64_t* rng) noexcept nogil:
        cdef Node* node = self.root
        cdef Node* child
        cdef int depth = 0
        cdef int i, k
        cdef double t = 0.0, r = 0.0
        while True:
            if node.machine < 0:
                t = node.out_t
                r = node.out_r
                node.n += 1
                node.init_evals += 1
                break
            if not node.edges_ready:
                init_edges(&self.T, &self.P, node, self.scratch)
            if node.nexp < node.ncand:
                i = node.order[node.nexp]
                node.nexp += 1
                child = self.make_child(node, i)
                node.child[i] = child
                self.push(depth, node, i)
                depth += 1
                self.rollout(child, rng, &t, &r)
                child.n += 1
                child.init_evals += 1
                break
            i = select_edge(&self.S, &self.P, node)
            self.push(depth, node, i)
            depth += 1
            node = node.child[i]
        # backpropagate
        if t < self.S.t_min:
            self.S.t_min = t
        if t > self.S.t_max:
            self.S.t_max = t
        if r < self.S.r_min:
            self.S.r_min = r
        if r > self.S.r_max:
            self.S.r_max = r
        for k in range(depth):
            node = self.path_nodes[k]
            i = self.path_edges[k]
            node.n += 1
            node.nsa[i] += 1
            node.sumt[i] += t
            node.sumr[i] += r
        self.S.iterations += 1

    def run(self, long n_iter, uint64_t rng_state):
        """Run ``n_iter`` iterations; returns the advanced rng state."""
        cdef uint64_t s = rng_state
        cdef long it
        if self.root.machine < 0:
            raise ValueError("root is terminal")
        with nogil:
            for it in range(n_iter):
                self.iterate(&s)
        return s

    def ensure_edges(self):
        if self.root.machine >= 0 and not self.root.edges_ready:
            init_edges(&self.T, &self.P, self.root, self.scratch)

    # -- inspection ------------------------------------------------------------

    @property
    def root_visits(self):
        return self.root.n

    @property
    def iterations(self):
        return self.S.iterations

    @property
    def stats(self):
        return (self.S.t_min, self.S.t_max, self.S.r_min, self.S.r_max)

    def root_edges(self):
        """List of (job_id, n, q, rho, prior) in candidate order."""
        self.ensure_edges()
        cdef Node* node = self.root
        cdef int i
        out = []
        for i in range(node.ncand):
            out.append((self.jobs[node.cand[i]].job_id, node.nsa[i],
                        edge_q(&self.S, node, i), edge_rho(&self.S, node, i), node.prior[i]))
        return out

    def root_order(self):
        self.ensure_edges()
        return [self.root.order[i] for i in range(self.root.ncand)]

    cdef Node* child_of(self, long job_id):
        cdef Node* node = self.root
        cdef int i, s
        if node.machine < 0 or not node.edges_ready:
            return NULL
        slot = self.job_index.get(job_id)
        if slot is None:
            return NULL
        s = slot
        for i in range(node.ncand):
            if node.cand[i] == s:
                return node.child[i]
        return NULL

    cdef object signature_of(self, Node* node):
        cdef Table* T = &self.T
        cdef i64* st = node.st
        cdef int m, i, j
        busy = []
        buffers = []
        for m in range(T.M):
            j = <int>st[T.o_busy + m]
            if j < 0:
                busy.append(None)
            else:
                busy.append((self.jobs[j].job_id, int(st[T.o_ptr + j]), int(st[T.o_fin + m])))
            buf = []
            for i in range(<int>st[T.o_blen + m]):
                buf.append(self.jobs[<int>st[T.o_buf + m * T.J + i]].job_id)
            buffers.append(tuple(buf))
        prog = []
        for j in range(T.J):
            if st[T.o_ptr + j] < T.nops[j]:
                prog.append((self.jobs[j].job_id, int(st[T.o_ptr + j])))
        return (int(st[0]), tuple(busy), tuple(buffers), tuple(prog))

    cdef object cand_ids(self, Node* node):
        cdef int i
        out = []
        for i in range(node.ncand):
            out.append(self.jobs[node.cand[i]].job_id)
        return tuple(out)

    def child_signature(self, long job_id):
        cdef Node* child = self.child_of(job_id)
        if child == NULL or child.machine < 0:
            return None
        return self.signature_of(child), child.machine, self.cand_ids(child)

    def root_signature(self):
        return self.signature_of(self.root), self.root.machine, self.cand_ids(self.root)

    def reroot(self, long job_id):
        """Keep only the subtree under ``job_id``'s root edge; returns self."""
        cdef Node* child = self.child_of(job_id)
        cdef Node* old = self.root
        cdef int i
        if child == NULL or child.machine < 0:
            raise ValueError("no reusable subtree under that action")
        for i in range(old.ncand):
            if old.child[i] == child:
                old.child[i] = NULL
        free_node(old)
        self.root = child
        return self

    def node_count(self):
        return count_nodes(self.root)

    def check_invariants(self):
        """Return (visit violations, min q, max q, min rho, max rho) over every edge."""
        cdef double acc[5]
        acc[0] = 0.0
        acc[1] = INFINITY
        acc[2] = -INFINITY
        acc[3] = INFINITY
        acc[4] = -INFINITY
        walk_check(&self.S, self.root, acc)
        return int(acc[0]), acc[1], acc[2], acc[3], acc[4]


cdef long count_nodes(Node* node) noexcept nogil:
    if node == NULL:
        return 0
    cdef long total = 1
    cdef int i
    if node.child != NULL:
        for i in range(node.ncand):
            total += count_nodes(node.child[i])
    return total


cdef void walk_check(Stats* S, Node* node, double* acc) noexcept nogil:
    cdef i64 total = 0
    cdef int i
    cdef double q, rho
    if node == NULL:
        return
    if node.machine < 0:
        if node.n != node.init_evals:
            acc[0] += 1
        return
    if node.edges_ready:
        for i in range(node.ncand):
            total += node.nsa[i]
            if node.nsa[i] > 0:
                q = edge_q(S, node, i)
                rho = edge_rho(S, node, i)
                if q < acc[1]:
                    acc[1] = q
                if q > acc[2]:
                    acc[2] = q
                if rho < acc[3]:
                    acc[3] = rho
                if rho > acc[4]:
                    acc[4] = rho
            if node.child[i] != NULL:
                if node.child[i].n != node.nsa[i]:
                    acc[0] += 1
                walk_check(S, node.child[i], acc)
    if node.n != total + node.init_evals:
        acc[0] += 1
