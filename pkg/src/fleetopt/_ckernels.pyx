# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; semantics identical to ``_pykernels``."""
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport pow, ceil, INFINITY
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy
from numpy.random cimport bitgen_t

import numpy as np

BACKEND = "cython"
ETA_FLOOR = 1e-3
cdef double _ETA_FLOOR = 1e-3


cdef struct Prob:
    int nv
    int n
    const double* travel
    const double* service
    const double* earliest
    const double* latest
    double total


cdef Prob _unpack(prob, int n) except *:
    cdef const double[:, ::1] travel = prob.travel
    cdef const double[::1] service = prob.service
    cdef const double[::1] earliest = prob.earliest
    cdef const double[::1] latest = prob.latest
    if travel.shape[0] != n or travel.shape[1] != n or service.shape[0] != n:
        raise ValueError("problem arrays do not match sequence length")
    cdef Prob p
    p.nv = prob.n_vehicles
    p.n = n
    p.travel = &travel[0, 0]
    p.service = &service[0]
    p.earliest = &earliest[0]
    p.latest = &latest[0]
    p.total = prob.total_service
    return p


cdef inline bitgen_t* _bitgen(rng) except NULL:
    return <bitgen_t*> PyCapsule_GetPointer(rng.bit_generator.capsule, "BitGenerator")


cdef inline double _draw(bitgen_t* bg) noexcept nogil:
    return bg.next_double(bg.state)


cdef inline int _index(double u, int n) noexcept nogil:
    cdef int k = <int>(u * n)
    return k if k < n else n - 1


cdef inline double _powa(double x, double a) noexcept nogil:
    if a == 1.0:
        return x
    if a == 2.0:
        return x * x
    if a == 3.0:
        return x * x * x
    return pow(x, a)


cdef inline double _eta(double d, double beta) noexcept nogil:
    cdef double e = 1.0 / (d if d > _ETA_FLOOR else _ETA_FLOOR)
    return e if beta == 1.0 else pow(e, beta)


cdef void _evaluate(const Prob* p, const int* seq, int* vpos, double* out) noexcept nogil:
    cdef int nv = p.nv, n = p.n
    cdef int i, g, v, cur
    cdef double missed = 0.0, total = 0.0, rm, rl, t, leg, start, s
    cdef bint departed
    for i in range(n):
        g = seq[i]
        if g < nv:
            vpos[g] = i
    for v in range(nv):
        rm = 0.0
        rl = 0.0
        cur = v
        t = 0.0
        departed = False
        i = vpos[v] + 1
        if i == n:
            i = 0
        while seq[i] >= nv:
            g = seq[i]
            leg = p.travel[cur * n + g]
            if departed:
                start = t + leg
                if start < p.earliest[g]:
                    start = p.earliest[g]
            else:
                start = p.earliest[g]
            if start + p.service[g] <= p.latest[g]:
                rl += leg
                t = start + p.service[g]
                cur = g
                departed = True
            else:
                rm += p.service[g]
            i += 1
            if i == n:
                i = 0
        if departed:
            rl += p.travel[cur * n + v]
        missed += rm
        total += rl
    s = p.total - missed
    out[0] = s
    out[1] = total
    out[2] = (p.total - s + 1.0) * total


def evaluate(prob, seq):
    cdef int[::1] arr = np.ascontiguousarray(seq, dtype=np.int32)
    cdef Prob p = _unpack(prob, arr.shape[0])
    cdef double out[3]
    cdef int* vpos = <int*> malloc(p.nv * sizeof(int))
    _evaluate(&p, &arr[0], vpos, out)
    free(vpos)
    return out[0], out[1], out[2]


cdef void _retention(int n, double max_modify, double escape_prob, bitgen_t* bg,
                     int* start, int* keep) noexcept nogil:
    start[0] = _index(_draw(bg), n)
    cdef bint escape = _draw(bg) < escape_prob
    cdef int lo = 0 if escape else <int>ceil((1.0 - max_modify) * n - 1e-9)
    if lo > n - 1:
        lo = n - 1
    if lo < 0:
        lo = 0
    keep[0] = lo + _index(_draw(bg), n - lo)


def retention(int n, double max_modify, double escape_prob, rng):
    cdef int start, keep
    _retention(n, max_modify, escape_prob, _bitgen(rng), &start, &keep)
    return start, keep


cdef struct Tour:
    int* unv
    int* where
    char* visited
    int m


cdef inline void _tour_reset(Tour* t, int n) noexcept nogil:
    cdef int i
    for i in range(n):
        t.unv[i] = i
        t.where[i] = i
        t.visited[i] = 0
    t.m = n


cdef inline void _tour_remove(Tour* t, int g) noexcept nogil:
    cdef int k = t.where[g]
    cdef int last = t.unv[t.m - 1]
    t.unv[k] = last
    t.where[last] = k
    t.m -= 1
    t.visited[g] = 1


cdef inline int _roulette(const int* cands, const double* w, int count, double u) noexcept nogil:
    cdef double total = 0.0, acc = 0.0, target
    cdef int k, choice = -1
    for k in range(count):
        total += w[k]
    if not (total > 0.0) or total == INFINITY:
        return -1
    target = u * total
    for k in range(count):
        if w[k] > 0.0:
            choice = cands[k]
            acc += w[k]
            if acc > target:
                break
    return choice


cdef inline int _fallback(Tour* t, const Prob* p, int c, double beta, double u, double* wts) noexcept nogil:
    cdef int k, g
    for k in range(t.m):
        wts[k] = _eta(p.travel[c * p.n + t.unv[k]], beta)
    g = _roulette(t.unv, wts, t.m, u)
    return t.unv[_index(u, t.m)] if g < 0 else g


cdef int _start(int* child, const int* lbest, const Prob* p, bint full, double max_modify,
                double escape_prob, bitgen_t* bg, Tour* t, int* keep_out) noexcept nogil:
    cdef int n = p.n, keep = 0, start = 0, i, g, v
    if not full:
        _retention(n, max_modify, escape_prob, bg, &start, &keep)
        for i in range(keep):
            g = lbest[(start + i) % n]
            child[i] = g
            _tour_remove(t, g)
    keep_out[0] = keep
    if keep == 0:
        v = _index(_draw(bg), p.nv)
        child[0] = v
        _tour_remove(t, v)
        return 1
    return keep


cdef struct Scratch:
    Tour tour
    double* fwd
    double* bwd
    char* mark
    int* touched
    double* wts
    int* vpos


cdef int _scratch_alloc(Scratch* s, int n, int nv) noexcept nogil:
    s.tour.unv = <int*> malloc(n * sizeof(int))
    s.tour.where = <int*> malloc(n * sizeof(int))
    s.tour.visited = <char*> malloc(n)
    s.fwd = <double*> malloc(n * sizeof(double))
    s.bwd = <double*> malloc(n * sizeof(double))
    s.mark = <char*> malloc(n)
    s.touched = <int*> malloc(n * sizeof(int))
    s.wts = <double*> malloc(n * sizeof(double))
    s.vpos = <int*> malloc(nv * sizeof(int))
    if (s.tour.unv == NULL or s.tour.where == NULL or s.tour.visited == NULL or s.fwd == NULL or s.bwd == NULL
            or s.mark == NULL or s.touched == NULL or s.wts == NULL or s.vpos == NULL):
        return -1
    cdef int i
    for i in range(n):
        s.fwd[i] = 0.0
        s.bwd[i] = 0.0
        s.mark[i] = 0
    return 0


cdef void _scratch_free(Scratch* s) noexcept nogil:
    free(s.tour.unv)
    free(s.tour.where)
    free(s.tour.visited)
    free(s.fwd)
    free(s.bwd)
    free(s.mark)
    free(s.touched)
    free(s.wts)
    free(s.vpos)


def build_sparse(prob, lbests, pop, pos, deposits, children, int lo, int hi, rngs, double alpha, double beta,
                 double max_modify, double escape_prob, bint full, quals, decisions, comparisons):
    cdef int[:, ::1] ch = children
    cdef int n = ch.shape[1]
    cdef int n_pop = pop.shape[0]
    cdef const int[:, ::1] pp
    cdef const int[:, ::1] ps
    cdef const double[::1] dep = np.ascontiguousarray(deposits, dtype=np.float64)
    cdef double[::1] q = quals
    cdef long long[::1] dec = decisions
    cdef long long[::1] cmpn = comparisons
    cdef Prob p = _unpack(prob, n)
    if n_pop > 0:
        pp = pop
        ps = pos
    else:
        pp = np.zeros((1, n), dtype=np.int32)
        ps = pp
    cdef const int[:, ::1] lb = lbests if not full else pp
    cdef const int* lb0 = &lb[0, 0]
    cdef const int* pop0 = &pp[0, 0]
    cdef const int* pos0 = &ps[0, 0]
    cdef const double* dep0 = &dep[0] if dep.shape[0] > 0 else NULL
    cdef bitgen_t** bgs = <bitgen_t**> malloc((hi - lo + 1) * sizeof(bitgen_t*))
    cdef int a
    for a in range(lo, hi):
        bgs[a - lo] = _bitgen(rngs[a])
    cdef Scratch s
    if _scratch_alloc(&s, n, p.nv) != 0:
        _scratch_free(&s)
        free(bgs)
        raise MemoryError()
    cdef int b, c, g, r, k, qi, keep, ntouch, succ, pred, pos_
    cdef long long n_cmp
    cdef double u, d
    cdef double ev[3]
    cdef int* child
    cdef bitgen_t* bg
    with nogil:
        for a in range(lo, hi):
            bg = bgs[a - lo]
            child = &ch[a, 0]
            _tour_reset(&s.tour, n)
            pos_ = _start(child, lb0 + (a * n if not full else 0), &p, full, max_modify, escape_prob, bg, &s.tour, &keep)
            n_cmp = 0
            while pos_ < n:
                c = child[pos_ - 1]
                u = _draw(bg)
                n_cmp += s.tour.m
                ntouch = 0
                for b in range(n_pop):
                    qi = pos0[b * n + c]
                    d = dep0[b]
                    succ = pop0[b * n + (qi + 1 if qi + 1 < n else 0)]
                    pred = pop0[b * n + (qi - 1 if qi > 0 else n - 1)]
                    if not s.tour.visited[succ]:
                        if not s.mark[succ]:
                            s.mark[succ] = 1
                            s.touched[ntouch] = succ
                            ntouch += 1
                        s.fwd[succ] += d
                    if not s.tour.visited[pred]:
                        if not s.mark[pred]:
                            s.mark[pred] = 1
                            s.touched[ntouch] = pred
                            ntouch += 1
                        s.bwd[pred] += d
                for k in range(ntouch):
                    g = s.touched[k]
                    s.wts[k] = _powa(s.fwd[g] + s.bwd[g], alpha) * _eta(p.travel[c * n + g], beta)
                    s.fwd[g] = 0.0
                    s.bwd[g] = 0.0
                    s.mark[g] = 0
                g = _roulette(s.touched, s.wts, ntouch, u)
                if g < 0:
                    g = _fallback(&s.tour, &p, c, beta, u, s.wts)
                child[pos_] = g
                _tour_remove(&s.tour, g)
                pos_ += 1
            _evaluate(&p, child, s.vpos, ev)
            q[a] = ev[2]
            dec[a] = n - keep
            cmpn[a] = n_cmp
    _scratch_free(&s)
    free(bgs)


def build_dense(prob, weights, lbests, children, int lo, int hi, rngs, double beta,
                double max_modify, double escape_prob, bint full, quals, decisions, comparisons):
    cdef int[:, ::1] ch = children
    cdef int n = ch.shape[1]
    cdef const double[:, ::1] w = weights
    cdef const int[:, ::1] pp = lbests
    cdef double[::1] q = quals
    cdef long long[::1] dec = decisions
    cdef long long[::1] cmpn = comparisons
    cdef Prob p = _unpack(prob, n)
    if w.shape[0] != n or w.shape[1] != n:
        raise ValueError("weight matrix does not match sequence length")
    cdef const double* w0 = &w[0, 0]
    cdef const int* pop0 = &pp[0, 0]
    cdef bitgen_t** bgs = <bitgen_t**> malloc((hi - lo + 1) * sizeof(bitgen_t*))
    cdef int a
    for a in range(lo, hi):
        bgs[a - lo] = _bitgen(rngs[a])
    cdef Scratch s
    if _scratch_alloc(&s, n, p.nv) != 0:
        _scratch_free(&s)
        free(bgs)
        raise MemoryError()
    cdef int c, g, k, m, keep, pos_
    cdef long long n_cmp
    cdef double u, total, acc, target
    cdef const double* row
    cdef double ev[3]
    cdef int* child
    cdef bitgen_t* bg
    with nogil:
        for a in range(lo, hi):
            bg = bgs[a - lo]
            child = &ch[a, 0]
            _tour_reset(&s.tour, n)
            pos_ = _start(child, pop0 + (a * n if not full else 0), &p, full, max_modify, escape_prob, bg, &s.tour, &keep)
            n_cmp = 0
            while pos_ < n:
                c = child[pos_ - 1]
                u = _draw(bg)
                m = s.tour.m
                n_cmp += m
                row = w0 + c * n
                for k in range(m):
                    s.wts[k] = row[s.tour.unv[k]]
                g = _roulette(s.tour.unv, s.wts, m, u)
                if g < 0:
                    g = _fallback(&s.tour, &p, c, beta, u, s.wts)
                child[pos_] = g
                _tour_remove(&s.tour, g)
                pos_ += 1
            _evaluate(&p, child, s.vpos, ev)
            q[a] = ev[2]
            dec[a] = n - keep
            cmpn[a] = n_cmp
    _scratch_free(&s)
    free(bgs)


# --- permutation operators ------------------------------------------------

cdef inline void _cut(int n, bitgen_t* bg, int* i, int* j) noexcept nogil:
    cdef int x = _index(_draw(bg), n), y = _index(_draw(bg), n)
    if x <= y:
        i[0] = x
        j[0] = y
    else:
        i[0] = y
        j[0] = x


cdef void _cx(const int* a, const int* b, int* child, int n, int* posa, char* done) noexcept nogil:
    cdef int i, first, cycle = 0
    cdef const int* src
    for i in range(n):
        posa[a[i]] = i
        done[i] = 0
    for first in range(n):
        if done[first]:
            continue
        src = a if cycle % 2 == 0 else b
        i = first
        while not done[i]:
            done[i] = 1
            child[i] = src[i]
            i = posa[b[i]]
        cycle += 1


cdef void _ox(const int* a, const int* b, int* child, int n, bitgen_t* bg, char* used) noexcept nogil:
    cdef int i, j, k, r, t
    _cut(n, bg, &i, &j)
    for k in range(n):
        used[k] = 0
    for k in range(i, j + 1):
        child[k] = a[k]
        used[a[k]] = 1
    k = j + 1
    r = j + 1
    for t in range(n - (j - i + 1)):
        if r >= n:
            r -= n
        while used[b[r]]:
            r += 1
            if r >= n:
                r -= n
        if k >= n:
            k -= n
        child[k] = b[r]
        used[b[r]] = 1
        k += 1
        r += 1


cdef void _pmx(const int* a, const int* b, int* child, int n, bitgen_t* bg, int* posa, char* inseg) noexcept nogil:
    cdef int i, j, k, x
    _cut(n, bg, &i, &j)
    for k in range(n):
        posa[a[k]] = k
        inseg[k] = 0
    for k in range(i, j + 1):
        child[k] = a[k]
        inseg[a[k]] = 1
    for k in range(n):
        if i <= k <= j:
            continue
        x = b[k]
        while inseg[x]:
            x = b[posa[x]]
        child[k] = x


cdef void _mutate(int op, int* seq, int n, bitgen_t* bg) noexcept nogil:
    cdef int i, j, k, g
    if op == 0:
        i = _index(_draw(bg), n)
        j = _index(_draw(bg), n)
        g = seq[i]
        seq[i] = seq[j]
        seq[j] = g
    elif op == 1:
        _cut(n, bg, &i, &j)
        while i < j:
            g = seq[i]
            seq[i] = seq[j]
            seq[j] = g
            i += 1
            j -= 1
    else:
        i = _index(_draw(bg), n)
        j = _index(_draw(bg), n)
        g = seq[i]
        if i < j:
            for k in range(i, j):
                seq[k] = seq[k + 1]
        else:
            for k in range(i, j, -1):
                seq[k] = seq[k - 1]
        seq[j] = g


def _operator_call(int op, a, b, rng):
    """Apply crossover ``op`` (0 CX, 1 OX, 2 PMX) to two index lists."""
    cdef int[::1] aa = np.ascontiguousarray(a, dtype=np.int32)
    cdef int[::1] bb = np.ascontiguousarray(b, dtype=np.int32)
    cdef int n = aa.shape[0]
    out = np.empty(n, dtype=np.int32)
    cdef int[::1] child = out
    cdef int* posa = <int*> malloc(n * sizeof(int))
    cdef char* flags = <char*> malloc(n)
    cdef bitgen_t* bg = _bitgen(rng) if op != 0 else NULL
    if op == 0:
        _cx(&aa[0], &bb[0], &child[0], n, posa, flags)
    elif op == 1:
        _ox(&aa[0], &bb[0], &child[0], n, bg, flags)
    else:
        _pmx(&aa[0], &bb[0], &child[0], n, bg, posa, flags)
    free(posa)
    free(flags)
    return out.tolist()


def crossover_cx(a, b, rng=None):
    return _operator_call(0, a, b, rng)


def crossover_ox(a, b, rng):
    return _operator_call(1, a, b, rng)


def crossover_pmx(a, b, rng):
    return _operator_call(2, a, b, rng)


def _mutation_call(int op, seq, rng):
    arr = np.array(seq, dtype=np.int32)
    cdef int[::1] s = arr
    _mutate(op, &s[0], s.shape[0], _bitgen(rng))
    return arr.tolist()


def mutate_swap(seq, rng):
    return _mutation_call(0, seq, rng)


def mutate_reverse(seq, rng):
    return _mutation_call(1, seq, rng)


def mutate_insert(seq, rng):
    return _mutation_call(2, seq, rng)


cdef inline int _tournament(const double* quals, int npop, int size, bitgen_t* bg) noexcept nogil:
    cdef int best = _index(_draw(bg), npop), t, k
    for t in range(size - 1):
        k = _index(_draw(bg), npop)
        if quals[k] < quals[best]:
            best = k
    return best


def ga_steps(prob, pop, quals, long long n_steps, rng, int tournament_size,
             double crossover_prob, double mutation_prob):
    cdef int[:, ::1] pp = pop
    cdef double[::1] q = quals
    cdef int npop = pp.shape[0], n = pp.shape[1]
    cdef Prob p = _unpack(prob, n)
    cdef bitgen_t* bg = _bitgen(rng)
    cdef int* child = <int*> malloc(n * sizeof(int))
    cdef int* posa = <int*> malloc(n * sizeof(int))
    cdef char* flags = <char*> malloc(n)
    cdef int* vpos = <int*> malloc(p.nv * sizeof(int))
    cdef long long step, replaced = 0
    cdef int p1, p2, op, worse, fit
    cdef const int* a
    cdef const int* b
    cdef double ev[3]
    with nogil:
        for step in range(n_steps):
            p1 = _tournament(&q[0], npop, tournament_size, bg)
            p2 = _tournament(&q[0], npop, tournament_size, bg)
            a = &pp[p1, 0]
            b = &pp[p2, 0]
            if _draw(bg) < crossover_prob:
                op = _index(_draw(bg), 3)
                if op == 0:
                    _cx(a, b, child, n, posa, flags)
                elif op == 1:
                    _ox(a, b, child, n, bg, flags)
                else:
                    _pmx(a, b, child, n, bg, posa, flags)
            else:
                fit = p1 if q[p1] <= q[p2] else p2
                memcpy(child, &pp[fit, 0], n * sizeof(int))
            if _draw(bg) < mutation_prob:
                _mutate(_index(_draw(bg), 3), child, n, bg)
            _evaluate(&p, child, vpos, ev)
            if p1 == p2:
                worse = p1
            else:
                worse = p1 if q[p1] > q[p2] else p2
            if ev[2] < q[worse]:
                memcpy(&pp[worse, 0], child, n * sizeof(int))
                q[worse] = ev[2]
                replaced += 1
    free(child)
    free(posa)
    free(flags)
    free(vpos)
    return replaced
