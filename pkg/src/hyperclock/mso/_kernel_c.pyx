# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=False
"""Compiled kernel with the same interface and results as ``_kernel_py``."""
from libc.stdlib cimport malloc, free, qsort
from libc.stdint cimport int64_t, uint64_t

DEF LESS = 0
DEF PLUS1 = 1
DEF PRED = 2
DEF OR = 3
DEF NOT = 4
DEF EXISTS = 5
DEF SO = 6


cdef int _cmp(const void* x, const void* y) noexcept nogil:
    cdef int64_t a = (<int64_t*>x)[0]
    cdef int64_t b = (<int64_t*>y)[0]
    return (a > b) - (a < b)


cdef inline int64_t _floordiv(int64_t a, int64_t b) nogil:
    cdef int64_t q = a // b
    return q


cdef class _Ints:
    """Flattened ragged integer table: row ``n`` is ``data[start[n]:start[n+1]]``."""
    cdef int64_t* data
    cdef int* start

    def __cinit__(self, rows):
        cdef int n = len(rows), i, k = 0
        total = sum(len(r) for r in rows)
        self.data = <int64_t*>malloc(max(total, 1) * sizeof(int64_t))
        self.start = <int*>malloc((n + 1) * sizeof(int))
        for i in range(n):
            self.start[i] = k
            for v in rows[i]:
                self.data[k] = v
                k += 1
        self.start[n] = k

    def __dealloc__(self):
        free(self.data)
        free(self.start)


cdef class Kernel:
    cdef int nnodes, npos, nslots, nblocks
    cdef int* op
    cdef int* a
    cdef int* b
    cdef char* desc
    cdef _Ints kids, lows, highs, fn, fslots, memo_fo, memo_so
    cdef int64_t* vals
    cdef int* cur_w
    cdef uint64_t* masks
    cdef uint64_t* block_keep
    cdef list wit          # per block: list of bytes objects holding uint64 rows
    cdef list wit_counts
    cdef list memo
    cdef int64_t unit, cell, limit
    cdef public long steps

    def __cinit__(self, prog, masks, unit, cell, limit):
        cdef int n = len(prog.op), i
        self.nnodes = n
        self.npos = len(masks)
        self.nslots = prog.nslots
        self.nblocks = prog.nblocks
        self.unit, self.cell, self.limit = unit, cell, limit
        self.op = <int*>malloc(max(n, 1) * sizeof(int))
        self.a = <int*>malloc(max(n, 1) * sizeof(int))
        self.b = <int*>malloc(max(n, 1) * sizeof(int))
        self.desc = <char*>malloc(max(n, 1))
        for i in range(n):
            self.op[i] = prog.op[i]
            self.a[i] = prog.a[i]
            self.b[i] = prog.b[i]
            self.desc[i] = 1 if prog.desc[i] else 0
        self.kids = _Ints(prog.kids)
        self.lows = _Ints([[v for pair in row for v in pair] for row in prog.lows])
        self.highs = _Ints([[v for pair in row for v in pair] for row in prog.highs])
        self.fn = _Ints([[v for pair in row for v in pair] for row in prog.fn])
        self.fslots = _Ints(prog.fslots)
        self.memo_fo = _Ints(prog.memo_fo)
        self.memo_so = _Ints(prog.memo_so)
        self.vals = <int64_t*>malloc(max(self.nslots, 1) * sizeof(int64_t))
        for i in range(self.nslots):
            self.vals[i] = 0
        self.cur_w = <int*>malloc(max(self.nblocks, 1) * sizeof(int))
        for i in range(self.nblocks):
            self.cur_w[i] = -1
        self.masks = <uint64_t*>malloc(max(self.npos, 1) * sizeof(uint64_t))
        for i in range(self.npos):
            self.masks[i] = masks[i]
        self.block_keep = <uint64_t*>malloc(max(self.nblocks, 1) * sizeof(uint64_t))
        self.wit = []
        self.wit_counts = []
        for i in range(self.nblocks):
            self.block_keep[i] = (~prog.block_bits[i]) & 0xFFFFFFFFFFFFFFFF
            rows = prog.witnesses[i]
            buf = bytearray(8 * self.npos * max(len(rows), 1))
            mv = memoryview(buf).cast("Q")
            for w, row in enumerate(rows):
                for j in range(self.npos):
                    mv[w * self.npos + j] = row[j]
            self.wit.append(buf)
            self.wit_counts.append(len(rows))
        self.memo = [None] * n
        self.steps = 0

    def __dealloc__(self):
        free(self.op)
        free(self.a)
        free(self.b)
        free(self.desc)
        free(self.vals)
        free(self.cur_w)
        free(self.masks)
        free(self.block_keep)

    def run(self, int root, values):
        for s, v in values.items():
            self.vals[<int>s] = v
        return bool(self.ev(root))

    def candidates(self, int n):
        cdef int64_t* buf
        cdef int cnt = self._candidates(n, &buf)
        out = [buf[i] for i in range(cnt)]
        free(buf)
        return out

    cdef int _candidates(self, int n, int64_t** result):
        """Candidate values for the quantifier at node ``n``; caller frees ``result``."""
        cdef int64_t lo = 0, hi = self.limit - 1, v, c, g = self.cell, u = self.unit, a, b, start
        cdef int i, s, k, m, nf, total
        cdef int64_t* pts
        cdef int64_t* out
        cdef _Ints t = self.lows
        for i in range(t.start[n], t.start[n + 1], 2):
            v = self.vals[t.data[i]] + t.data[i + 1]
            if v > lo:
                lo = v
        t = self.highs
        for i in range(t.start[n], t.start[n + 1], 2):
            v = self.vals[t.data[i]] - t.data[i + 1]
            if v < hi:
                hi = v
        out = <int64_t*>malloc(sizeof(int64_t))
        result[0] = out
        if lo > hi:
            return 0
        t = self.fn
        if t.start[n] < t.start[n + 1]:
            i = t.start[n]
            c = self.vals[t.data[i]] + t.data[i + 1] * u
            if lo <= c <= hi:
                out[0] = c
                return 1
            return 0
        free(out)
        a = ((lo - 1 if lo > 0 else 0) // g) * g
        b = (-((-(hi + 1)) // g)) * g
        if b > self.limit:
            b = self.limit
        t = self.fslots
        nf = t.start[n + 1] - t.start[n]
        total = <int>((b - a) // g + 1)
        for i in range(t.start[n], t.start[n + 1]):
            total += <int>((b - a) // u + 2)
        pts = <int64_t*>malloc(total * sizeof(int64_t))
        k = 0
        c = a
        while c <= b:
            pts[k] = c
            k += 1
            c += g
        for i in range(t.start[n], t.start[n + 1]):
            v = self.vals[t.data[i]]
            start = v - ((v - a) // u) * u
            c = start
            while c <= b:
                pts[k] = c
                k += 1
                c += u
        qsort(pts, k, sizeof(int64_t), _cmp)
        out = <int64_t*>malloc((2 * k + 1) * sizeof(int64_t))
        m = 0
        for i in range(k):
            if i > 0:
                if pts[i] == pts[i - 1]:
                    continue
                c = (pts[i - 1] + pts[i]) // 2
                if lo <= c <= hi:
                    out[m] = c
                    m += 1
            if lo <= pts[i] <= hi:
                out[m] = pts[i]
                m += 1
        free(pts)
        if self.desc[n]:
            for i in range(m // 2):
                c = out[i]
                out[i] = out[m - 1 - i]
                out[m - 1 - i] = c
        result[0] = out
        return m

    cdef bint ev(self, int n) except -1:
        cdef int o = self.op[n], i, slot, child, blk, w, j, cnt
        cdef int64_t q, r, v
        cdef int64_t* cands
        cdef uint64_t* saved
        cdef uint64_t* tmp
        cdef uint64_t* wm
        cdef uint64_t keep
        cdef bint res
        cdef _Ints t
        if o == PRED:
            v = self.vals[self.b[n]]
            q = v // self.cell
            r = v - q * self.cell
            return (self.masks[2 * q + (1 if r else 0)] >> self.a[n]) & 1
        if o == OR:
            t = self.kids
            for i in range(t.start[n], t.start[n + 1]):
                if self.ev(<int>t.data[i]):
                    return True
            return False
        if o == NOT:
            return not self.ev(self.a[n])
        if o == LESS:
            return self.vals[self.a[n]] < self.vals[self.b[n]]
        if o == PLUS1:
            return self.vals[self.a[n]] + self.unit == self.vals[self.b[n]]
        memo = self.memo[n]
        if memo is None:
            memo = self.memo[n] = {}
        key = self._key(n)
        hit = (<dict>memo).get(key)
        if hit is not None:
            return hit
        self.steps += 1
        res = False
        child = self.b[n]
        if o == EXISTS:
            slot = self.a[n]
            cnt = self._candidates(n, &cands)
            try:
                for i in range(cnt):
                    self.vals[slot] = cands[i]
                    if self.ev(child):
                        res = True
                        break
            finally:
                free(cands)
        else:
            blk = self.a[n]
            keep = self.block_keep[blk]
            saved = self.masks
            old = self.cur_w[blk]
            tmp = <uint64_t*>malloc(max(self.npos, 1) * sizeof(uint64_t))
            buf = self.wit[blk]
            wm = <uint64_t*><char*>(<bytearray>buf)
            try:
                self.masks = tmp
                for w in range(<int>self.wit_counts[blk]):
                    for j in range(self.npos):
                        tmp[j] = (saved[j] & keep) | wm[w * self.npos + j]
                    self.cur_w[blk] = w
                    if self.ev(child):
                        res = True
                        break
            finally:
                self.masks = saved
                self.cur_w[blk] = old
                free(tmp)
        memo[key] = res
        return res

    cdef object _key(self, int n):
        cdef _Ints f = self.memo_fo, s = self.memo_so
        cdef int i, nf = f.start[n + 1] - f.start[n], ns = s.start[n + 1] - s.start[n]
        if nf == 1 and ns == 0:
            return self.vals[f.data[f.start[n]]]
        key = []
        for i in range(f.start[n], f.start[n + 1]):
            key.append(self.vals[f.data[i]])
        for i in range(s.start[n], s.start[n + 1]):
            key.append(self.cur_w[s.data[i]])
        return tuple(key)
