"""Pure-Python event kernels.

These are the reference versions of the loops in ``_kernels.pyx``. Both
consume uniforms from the generator's bit stream in the same order
(one ``next_double`` per draw), so for a given generator state they emit
identical event arrays. Any change here must be mirrored there.
"""
import math

import numpy as np

INFECTION = 0
END_LATENCY = 1
RECOVERY = 2

_BLOCK = 512


class _Uniforms:
    """Buffered reader over ``Generator.random``; same stream as next_double.

    :meth:`close` rewinds the generator so that it ends exactly where one
    draw per consumed uniform would leave it (as the compiled kernel does).
    """

    __slots__ = ("rng", "buf", "pos", "used", "start", "block")

    def __init__(self, rng):
        self.rng = rng
        bg = rng.bit_generator
        # block reads need a way back; otherwise read one at a time
        # PCG64 advance(k) skips exactly k doubles
        self.block = _BLOCK if isinstance(bg, (np.random.PCG64, np.random.PCG64DXSM)) else 1
        self.start = bg.state
        self.used = 0
        self.buf = rng.random(self.block).tolist()
        self.pos = 0

    def next(self):
        if self.pos == self.block:
            self.buf = self.rng.random(self.block).tolist()
            self.pos = 0
        u = self.buf[self.pos]
        self.pos += 1
        self.used += 1
        return u

    def close(self):
        if self.block > 1:
            bg = self.rng.bit_generator
            bg.state = self.start
            bg.advance(self.used)
        elif self.pos < self.block:
            # one unread draw is buffered
            bg = self.rng.bit_generator
            bg.state = self.start
            for _ in range(self.used):
                self.rng.random()


def _pick(u, count):
    k = int(u * count)
    return count - 1 if k >= count else k


def gse_events(rng, n, lam, gamma, latent_rate, fixed_period):
    """Simulate one outbreak of the SIR/SEIR epidemic from a single index case.

    Returns ``(time, kind, subject, infector)`` arrays. Infected individuals
    receive ids 1, 2, ... in order of infection; the index case is id 0.
    ``latent_rate <= 0`` means no latent stage. With ``fixed_period`` every
    infective recovers exactly ``1/gamma`` after becoming infectious.
    """
    n = int(n)
    uni = _Uniforms(rng)
    latent = latent_rate > 0.0
    period = 1.0 / gamma
    cap = 3 * n
    ev_t = [0.0] * cap
    ev_k = [0] * cap
    ev_s = [0] * cap
    ev_i = [0] * cap
    infectives = [0] * n
    pos_inf = [0] * n
    exposed = [0] * n
    pos_exp = [0] * n
    rec_time = [0.0] * n
    queue = [0] * n
    qhead = 0
    qtail = 0
    n_inf = 0
    n_exp = 0
    n_ev = 0
    t = 0.0
    susceptible = n - 1
    next_id = 1

    ev_t[0] = 0.0
    ev_k[0] = INFECTION
    ev_s[0] = 0
    ev_i[0] = -1
    n_ev = 1
    if latent:
        exposed[0] = 0
        pos_exp[0] = 0
        n_exp = 1
    else:
        infectives[0] = 0
        pos_inf[0] = 0
        n_inf = 1
        if fixed_period:
            rec_time[0] = period
            queue[qtail] = 0
            qtail += 1

    while n_inf + n_exp > 0:
        rate_inf = lam * n_inf * susceptible / n
        rate_lat = latent_rate * n_exp if latent else 0.0
        rate_rec = 0.0 if fixed_period else gamma * n_inf
        total = rate_inf + rate_lat + rate_rec
        if total > 0.0:
            t_next = t - math.log1p(-uni.next()) / total
        else:
            t_next = math.inf
        if fixed_period and qhead < qtail and rec_time[queue[qhead]] <= t_next:
            j = queue[qhead]
            qhead += 1
            t = rec_time[j]
            p = pos_inf[j]
            n_inf -= 1
            last = infectives[n_inf]
            infectives[p] = last
            pos_inf[last] = p
            ev_t[n_ev] = t
            ev_k[n_ev] = RECOVERY
            ev_s[n_ev] = j
            ev_i[n_ev] = -1
            n_ev += 1
            continue
        t = t_next
        u2 = uni.next() * total
        if u2 < rate_inf:
            c = 0
        elif u2 < rate_inf + rate_lat:
            c = 1
        else:
            c = 2
        if c == 2 and rate_rec == 0.0:
            c = 1
        if c == 1 and rate_lat == 0.0:
            c = 0
        if c == 0:
            infector = infectives[_pick(uni.next(), n_inf)]
            j = next_id
            next_id += 1
            susceptible -= 1
            ev_t[n_ev] = t
            ev_k[n_ev] = INFECTION
            ev_s[n_ev] = j
            ev_i[n_ev] = infector
            n_ev += 1
            if latent:
                exposed[n_exp] = j
                pos_exp[j] = n_exp
                n_exp += 1
            else:
                infectives[n_inf] = j
                pos_inf[j] = n_inf
                n_inf += 1
                if fixed_period:
                    rec_time[j] = t + period
                    queue[qtail] = j
                    qtail += 1
        elif c == 1:
            p = _pick(uni.next(), n_exp)
            j = exposed[p]
            n_exp -= 1
            last = exposed[n_exp]
            exposed[p] = last
            pos_exp[last] = p
            infectives[n_inf] = j
            pos_inf[j] = n_inf
            n_inf += 1
            if fixed_period:
                rec_time[j] = t + period
                queue[qtail] = j
                qtail += 1
            ev_t[n_ev] = t
            ev_k[n_ev] = END_LATENCY
            ev_s[n_ev] = j
            ev_i[n_ev] = -1
            n_ev += 1
        else:
            p = _pick(uni.next(), n_inf)
            j = infectives[p]
            n_inf -= 1
            last = infectives[n_inf]
            infectives[p] = last
            pos_inf[last] = p
            ev_t[n_ev] = t
            ev_k[n_ev] = RECOVERY
            ev_s[n_ev] = j
            ev_i[n_ev] = -1
            n_ev += 1

    uni.close()
    return (
        np.array(ev_t[:n_ev], dtype=np.float64),
        np.array(ev_k[:n_ev], dtype=np.int8),
        np.array(ev_s[:n_ev], dtype=np.int64),
        np.array(ev_i[:n_ev], dtype=np.int64),
    )


def household_events(rng, sizes, lam_h, lam_g, gamma, index_household):
    """Simulate one outbreak of the two-level household SIR epidemic.

    Individuals of household h hold ids ``offset[h] .. offset[h]+size-1`` and
    are infected in id order (members are exchangeable). A susceptible in
    household h is infected at rate ``lam_h*I_h + lam_g*I/n``. When
    ``index_household < 0`` the index case is a uniformly chosen individual.
    Returns ``(time, kind, subject, infector)`` arrays.
    """
    sizes = [int(s) for s in sizes]
    n_house = len(sizes)
    offset = [0] * n_house
    home = []
    acc = 0
    for h, s in enumerate(sizes):
        offset[h] = acc
        acc += s
        home.extend([h] * s)
    n = acc
    uni = _Uniforms(rng)

    if index_household < 0:
        h0 = home[_pick(uni.next(), n)]
    else:
        h0 = int(index_household)

    s_h = np.array(sizes, dtype=np.int64)
    i_h = np.zeros(n_house, dtype=np.int64)
    si_h = np.zeros(n_house, dtype=np.int64)
    next_sus = list(offset)
    state = [0] * n
    infectives = [0] * n
    pos_inf = [0] * n
    cap = 2 * n
    ev_t = [0.0] * cap
    ev_k = [0] * cap
    ev_s = [0] * cap
    ev_i = [0] * cap

    first = next_sus[h0]
    next_sus[h0] += 1
    state[first] = 1
    s_h[h0] -= 1
    i_h[h0] += 1
    si_h[h0] = s_h[h0] * i_h[h0]
    infectives[0] = first
    pos_inf[first] = 0
    n_inf = 1
    susceptible = n - 1
    w_h = int(si_h[h0])
    ev_t[0] = 0.0
    ev_k[0] = INFECTION
    ev_s[0] = first
    ev_i[0] = -1
    n_ev = 1
    t = 0.0

    while n_inf > 0:
        rate_h = lam_h * w_h
        rate_g = lam_g * susceptible * n_inf / n
        rate_rec = gamma * n_inf
        total = rate_h + rate_g + rate_rec
        t = t - math.log1p(-uni.next()) / total
        u2 = uni.next() * total
        if u2 < rate_h:
            c = 0
        elif u2 < rate_h + rate_g:
            c = 1
        else:
            c = 2
        if c == 2 and rate_rec == 0.0:
            c = 1
        if c == 1 and rate_g == 0.0:
            c = 0
        if c == 0:
            target = uni.next() * w_h
            h = int(np.searchsorted(np.cumsum(si_h), target, side="right"))
            if h >= n_house:
                h = int(np.flatnonzero(si_h)[-1])
            k = _pick(uni.next(), int(i_h[h]))
            infector = -1
            for member in range(offset[h], offset[h] + sizes[h]):
                if state[member] == 1:
                    if k == 0:
                        infector = member
                        break
                    k -= 1
        elif c == 1:
            target = uni.next() * susceptible
            h = int(np.searchsorted(np.cumsum(s_h), target, side="right"))
            if h >= n_house:
                h = int(np.flatnonzero(s_h)[-1])
            infector = infectives[_pick(uni.next(), n_inf)]
        else:
            p = _pick(uni.next(), n_inf)
            j = infectives[p]
            n_inf -= 1
            last = infectives[n_inf]
            infectives[p] = last
            pos_inf[last] = p
            state[j] = 2
            hj = home[j]
            i_h[hj] -= 1
            w_h -= int(si_h[hj])
            si_h[hj] = s_h[hj] * i_h[hj]
            w_h += int(si_h[hj])
            ev_t[n_ev] = t
            ev_k[n_ev] = RECOVERY
            ev_s[n_ev] = j
            ev_i[n_ev] = -1
            n_ev += 1
            continue
        j = next_sus[h]
        next_sus[h] += 1
        state[j] = 1
        s_h[h] -= 1
        i_h[h] += 1
        w_h -= int(si_h[h])
        si_h[h] = s_h[h] * i_h[h]
        w_h += int(si_h[h])
        susceptible -= 1
        infectives[n_inf] = j
        pos_inf[j] = n_inf
        n_inf += 1
        ev_t[n_ev] = t
        ev_k[n_ev] = INFECTION
        ev_s[n_ev] = j
        ev_i[n_ev] = infector
        n_ev += 1

    uni.close()
    return (
        np.array(ev_t[:n_ev], dtype=np.float64),
        np.array(ev_k[:n_ev], dtype=np.int8),
        np.array(ev_s[:n_ev], dtype=np.int64),
        np.array(ev_i[:n_ev], dtype=np.int64),
    )
