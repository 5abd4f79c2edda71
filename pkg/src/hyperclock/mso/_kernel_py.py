"""Reference kernel: evaluates a compiled MSO program over a bitmask flow.

Times are integer ticks.  ``unit`` ticks make one time unit and ``cell``
ticks one grid cell; every flow breakpoint is a multiple of ``cell``.  The
flow is stored per grid position: even positions are grid points, odd
positions the open cells between them.
"""

LESS, PLUS1, PRED, OR, NOT, EXISTS, SO = range(7)


class Kernel:
    def __init__(self, prog, masks, unit, cell, limit):
        self.prog = prog
        self.masks = list(masks)
        self.unit = unit
        self.cell = cell
        self.limit = limit  # domain is [0, limit)
        self.vals = [0] * prog.nslots
        self.cur_w = [-1] * prog.nblocks
        self.memo = [None] * len(prog.op)
        self.steps = 0

    def run(self, root, values):
        for s, v in values.items():
            self.vals[s] = v
        return bool(self.ev(root))

    def candidates(self, n):
        p = self.prog
        vals = self.vals
        lo, hi = 0, self.limit - 1
        for s, strict in p.lows[n]:
            v = vals[s] + strict
            if v > lo:
                lo = v
        for s, strict in p.highs[n]:
            v = vals[s] - strict
            if v < hi:
                hi = v
        if lo > hi:
            return ()
        for s, d in p.fn[n]:
            c = vals[s] + d * self.unit
            return (c,) if lo <= c <= hi else ()
        g, u = self.cell, self.unit
        a = (max(lo - 1, 0) // g) * g
        b = min(-((-(hi + 1)) // g) * g, self.limit)
        pts = set(range(a, b + 1, g))
        for s in p.fslots[n]:
            v = vals[s]
            start = v - ((v - a) // u) * u
            pts.update(range(start, b + 1, u))
        srt = sorted(pts)
        out = []
        prev = None
        for q in srt:
            if prev is not None:
                m = (prev + q) // 2
                if lo <= m <= hi:
                    out.append(m)
            if lo <= q <= hi:
                out.append(q)
            prev = q
        if p.desc[n]:
            out.reverse()
        return out

    def ev(self, n):
        p = self.prog
        o = p.op[n]
        if o == PRED:
            q, r = divmod(self.vals[p.b[n]], self.cell)
            return (self.masks[2 * q + (1 if r else 0)] >> p.a[n]) & 1
        if o == OR:
            for k in p.kids[n]:
                if self.ev(k):
                    return True
            return False
        if o == NOT:
            return not self.ev(p.a[n])
        if o == LESS:
            return self.vals[p.a[n]] < self.vals[p.b[n]]
        if o == PLUS1:
            return self.vals[p.a[n]] + self.unit == self.vals[p.b[n]]
        memo = self.memo[n]
        if memo is None:
            memo = self.memo[n] = {}
        key = tuple([self.vals[s] for s in p.memo_fo[n]] + [self.cur_w[b] for b in p.memo_so[n]])
        hit = memo.get(key)
        if hit is not None:
            return hit
        self.steps += 1
        res = False
        if o == EXISTS:
            slot = p.a[n]
            child = p.b[n]
            for c in self.candidates(n):
                self.vals[slot] = c
                if self.ev(child):
                    res = True
                    break
        else:  # SO block
            blk = p.a[n]
            child = p.b[n]
            keep = ~p.block_bits[blk]
            saved = self.masks
            old = self.cur_w[blk]
            for w, wm in enumerate(p.witnesses[blk]):
                self.masks = [(m & keep) | x for m, x in zip(saved, wm)]
                self.cur_w[blk] = w
                if self.ev(child):
                    res = True
                    break
            self.masks = saved
            self.cur_w[blk] = old
        memo[key] = res
        return res
