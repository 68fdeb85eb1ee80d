# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled event kernels; statement-for-statement twin of ``_kernels_py``."""
import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport log1p, INFINITY
from numpy.random cimport bitgen_t

cnp.import_array()

cdef enum:
    INFECTION = 0
    END_LATENCY = 1
    RECOVERY = 2


cdef inline double _next(bitgen_t *bg) noexcept nogil:
    return bg.next_double(bg.state)


cdef inline Py_ssize_t _pick(double u, Py_ssize_t count) noexcept nogil:
    cdef Py_ssize_t k = <Py_ssize_t>(u * count)
    if k >= count:
        k = count - 1
    return k


cdef bitgen_t *_bitgen(object rng) except NULL:
    capsule = rng.bit_generator.capsule
    return <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")


def gse_events(rng, Py_ssize_t n, double lam, double gamma,
               double latent_rate, bint fixed_period):
    cdef bitgen_t *bg = _bitgen(rng)
    cdef bint latent = latent_rate > 0.0
    cdef double period = 1.0 / gamma
    cdef Py_ssize_t cap = 3 * n

    ev_t_a = np.empty(cap, dtype=np.float64)
    ev_k_a = np.empty(cap, dtype=np.int8)
    ev_s_a = np.empty(cap, dtype=np.int64)
    ev_i_a = np.empty(cap, dtype=np.int64)
    work = np.empty((5, n), dtype=np.int64)
    rec_a = np.empty(n, dtype=np.float64)
    cdef double[::1] ev_t = ev_t_a
    cdef signed char[::1] ev_k = ev_k_a
    cdef cnp.int64_t[::1] ev_s = ev_s_a
    cdef cnp.int64_t[::1] ev_i = ev_i_a
    cdef cnp.int64_t[:, ::1] w = work
    cdef cnp.int64_t[::1] infectives = w[0]
    cdef cnp.int64_t[::1] pos_inf = w[1]
    cdef cnp.int64_t[::1] exposed = w[2]
    cdef cnp.int64_t[::1] pos_exp = w[3]
    cdef cnp.int64_t[::1] queue = w[4]
    cdef double[::1] rec_time = rec_a

    cdef Py_ssize_t qhead = 0, qtail = 0, n_inf = 0, n_exp = 0, n_ev = 0
    cdef Py_ssize_t susceptible = n - 1, next_id = 1
    cdef Py_ssize_t j, p, last, c
    cdef cnp.int64_t infector
    cdef double t = 0.0, t_next, rate_inf, rate_lat, rate_rec, total, u2

    with rng.bit_generator.lock:
        with nogil:
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
                    t_next = t - log1p(-_next(bg)) / total
                else:
                    t_next = INFINITY
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
                u2 = _next(bg) * total
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
                    infector = infectives[_pick(_next(bg), n_inf)]
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
                    p = _pick(_next(bg), n_exp)
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
                    p = _pick(_next(bg), n_inf)
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

    return (ev_t_a[:n_ev].copy(), ev_k_a[:n_ev].copy(),
            ev_s_a[:n_ev].copy(), ev_i_a[:n_ev].copy())


def household_events(rng, sizes, double lam_h, double lam_g, double gamma,
                     Py_ssize_t index_household):
    cdef bitgen_t *bg = _bitgen(rng)
    size_a = np.ascontiguousarray(sizes, dtype=np.int64)
    cdef cnp.int64_t[::1] size = size_a
    cdef Py_ssize_t n_house = size.shape[0]
    cdef Py_ssize_t h, member, acc = 0
    offset_a = np.empty(n_house, dtype=np.int64)
    cdef cnp.int64_t[::1] offset = offset_a
    for h in range(n_house):
        offset[h] = acc
        acc += size[h]
    cdef Py_ssize_t n = acc
    home_a = np.repeat(np.arange(n_house, dtype=np.int64), size_a)
    cdef cnp.int64_t[::1] home = home_a

    hh = np.zeros((4, n_house), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] hv = hh
    cdef cnp.int64_t[::1] s_h = hv[0]
    cdef cnp.int64_t[::1] i_h = hv[1]
    cdef cnp.int64_t[::1] si_h = hv[2]
    cdef cnp.int64_t[::1] next_sus = hv[3]
    ind = np.zeros((3, n), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] iv = ind
    cdef cnp.int64_t[::1] state = iv[0]
    cdef cnp.int64_t[::1] infectives = iv[1]
    cdef cnp.int64_t[::1] pos_inf = iv[2]

    cdef Py_ssize_t cap = 2 * n
    ev_t_a = np.empty(cap, dtype=np.float64)
    ev_k_a = np.empty(cap, dtype=np.int8)
    ev_s_a = np.empty(cap, dtype=np.int64)
    ev_i_a = np.empty(cap, dtype=np.int64)
    cdef double[::1] ev_t = ev_t_a
    cdef signed char[::1] ev_k = ev_k_a
    cdef cnp.int64_t[::1] ev_s = ev_s_a
    cdef cnp.int64_t[::1] ev_i = ev_i_a

    cdef Py_ssize_t h0, first, n_inf, susceptible, n_ev, c, k, p, j, last, hj
    cdef cnp.int64_t w_h, cum, infector
    cdef double t = 0.0, rate_h, rate_g, rate_rec, total, u2, target

    for h in range(n_house):
        s_h[h] = size[h]
        next_sus[h] = offset[h]

    with rng.bit_generator.lock:
        with nogil:
            if index_household < 0:
                h0 = home[_pick(_next(bg), n)]
            else:
                h0 = index_household

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
            w_h = si_h[h0]
            ev_t[0] = 0.0
            ev_k[0] = INFECTION
            ev_s[0] = first
            ev_i[0] = -1
            n_ev = 1

            while n_inf > 0:
                rate_h = lam_h * w_h
                rate_g = lam_g * susceptible * n_inf / n
                rate_rec = gamma * n_inf
                total = rate_h + rate_g + rate_rec
                t = t - log1p(-_next(bg)) / total
                u2 = _next(bg) * total
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
                    target = _next(bg) * w_h
                    cum = 0
                    h = n_house
                    for hj in range(n_house):
                        cum += si_h[hj]
                        if <double>cum > target:
                            h = hj
                            break
                    if h >= n_house:
                        for hj in range(n_house - 1, -1, -1):
                            if si_h[hj] != 0:
                                h = hj
                                break
                    k = _pick(_next(bg), i_h[h])
                    infector = -1
                    for member in range(offset[h], offset[h] + size[h]):
                        if state[member] == 1:
                            if k == 0:
                                infector = member
                                break
                            k -= 1
                elif c == 1:
                    target = _next(bg) * susceptible
                    cum = 0
                    h = n_house
                    for hj in range(n_house):
                        cum += s_h[hj]
                        if <double>cum > target:
                            h = hj
                            break
                    if h >= n_house:
                        for hj in range(n_house - 1, -1, -1):
                            if s_h[hj] != 0:
                                h = hj
                                break
                    infector = infectives[_pick(_next(bg), n_inf)]
                else:
                    p = _pick(_next(bg), n_inf)
                    j = infectives[p]
                    n_inf -= 1
                    last = infectives[n_inf]
                    infectives[p] = last
                    pos_inf[last] = p
                    state[j] = 2
                    hj = home[j]
                    i_h[hj] -= 1
                    w_h -= si_h[hj]
                    si_h[hj] = s_h[hj] * i_h[hj]
                    w_h += si_h[hj]
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
                w_h -= si_h[h]
                si_h[h] = s_h[h] * i_h[h]
                w_h += si_h[h]
                susceptible -= 1
                infectives[n_inf] = j
                pos_inf[j] = n_inf
                n_inf += 1
                ev_t[n_ev] = t
                ev_k[n_ev] = INFECTION
                ev_s[n_ev] = j
                ev_i[n_ev] = infector
                n_ev += 1

    return (ev_t_a[:n_ev].copy(), ev_k_a[:n_ev].copy(),
            ev_s_a[:n_ev].copy(), ev_i_a[:n_ev].copy())
