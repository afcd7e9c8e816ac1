# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend: C implementations of synth_trial and decode_trial.

Bit-identical to the pure backend by construction:

  - randomness comes from the same PCG64 stream via numpy's C API
    (random_standard_normal / random_standard_uniform on the Generator's
    bit_generator), consumed in exactly the pure backend's order, with
    the same skip-when-sd-is-zero guards
  - every floating-point expression keeps the pure backend's operand
    order, and the extension builds with floating-point contraction off
    so the compiler cannot fuse a*b+c into an FMA the interpreter
    doesn't use
  - Python's round(x, 6) is called for saccade durations rather than
    reimplemented: its decimal rounding is not reproducible with float
    arithmetic
  - float modulo and negative int(q) % 4 use explicit sign fixups to
    match Python semantics, not C's
"""

import numpy as np

from libc.math cimport M_PI, atan2, ceil, cos, fabs, floor, fmod, sin, sqrt
from libc.stdlib cimport free, malloc, realloc
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    random_standard_normal,
    random_standard_uniform,
)


def backend_name():
    return "native"


# ---------------------------------------------------------------------------
# sample synthesis
# ---------------------------------------------------------------------------

cdef class _Buf:
    """Growable parallel sample buffers (t, x, y, valid)."""

    cdef double *t
    cdef double *x
    cdef double *y
    cdef unsigned char *v
    cdef Py_ssize_t n
    cdef Py_ssize_t cap

    def __cinit__(self, Py_ssize_t cap0):
        self.n = 0
        self.cap = cap0
        self.t = <double *> malloc(cap0 * sizeof(double))
        self.x = <double *> malloc(cap0 * sizeof(double))
        self.y = <double *> malloc(cap0 * sizeof(double))
        self.v = <unsigned char *> malloc(cap0 * sizeof(unsigned char))
        if self.t == NULL or self.x == NULL or self.y == NULL or self.v == NULL:
            raise MemoryError()

    def __dealloc__(self):
        free(self.t)
        free(self.x)
        free(self.y)
        free(self.v)

    cdef int push(self, double t, double x, double y, unsigned char valid) except -1:
        cdef Py_ssize_t nc
        cdef double *p
        cdef unsigned char *q
        if self.n == self.cap:
            nc = self.cap * 2
            p = <double *> realloc(self.t, nc * sizeof(double))
            if p == NULL:
                raise MemoryError()
            self.t = p
            p = <double *> realloc(self.x, nc * sizeof(double))
            if p == NULL:
                raise MemoryError()
            self.x = p
            p = <double *> realloc(self.y, nc * sizeof(double))
            if p == NULL:
                raise MemoryError()
            self.y = p
            q = <unsigned char *> realloc(self.v, nc * sizeof(unsigned char))
            if q == NULL:
                raise MemoryError()
            self.v = q
            self.cap = nc
        self.t[self.n] = t
        self.x[self.n] = x
        self.y[self.n] = y
        self.v[self.n] = valid
        self.n += 1
        return 0


cdef inline Py_ssize_t _halfup(double v):
    return <Py_ssize_t> floor(v + 0.5)


cdef int _emit_fixation(
    _Buf buf,
    bitgen_t *bg,
    double onset,
    double px,
    double py,
    double dwell,
    double rate_hz,
    double jsd,
    double bias_x,
    double bias_y,
) except -1:
    cdef Py_ssize_t n = _halfup(dwell * rate_hz / 1000.0)
    cdef Py_ssize_t k
    cdef double tt, xx, yy, zx, zy
    if n < 1:
        n = 1  # every planned fixation contributes at least its onset sample
    for k in range(n):
        # (k*1000)/rate, not k*period: integer-millisecond instants exact
        tt = onset + ((<double> k) * 1000.0) / rate_hz
        if jsd > 0.0:
            zx = random_standard_normal(bg)
            zy = random_standard_normal(bg)
            xx = px + jsd * zx
            yy = py + jsd * zy
        else:
            xx = px
            yy = py
        buf.push(tt, xx + bias_x, yy + bias_y, 1)
    return 0


cdef int _emit_flight(
    _Buf buf,
    double onset,
    double cx,
    double cy,
    double lx,
    double ly,
    double dur,
    double rate_hz,
    double period,
    double bias_x,
    double bias_y,
) except -1:
    # Interior samples only, strictly between onset and landing.
    cdef Py_ssize_t m = <Py_ssize_t> ceil(dur / period) - 1
    cdef Py_ssize_t j
    cdef double jp, tau, s, xx, yy
    if m < 1:
        return 0
    for j in range(1, m + 1):
        jp = ((<double> j) * 1000.0) / rate_hz
        if jp >= dur:  # rounding may push the last offset onto the landing
            break
        tau = jp / dur
        s = tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau))
        xx = cx + (lx - cx) * s
        yy = cy + (ly - cy) * s
        buf.push(onset + jp, xx + bias_x, yy + bias_y, 0)
    return 0


def synth_trial(
    fix_x,
    fix_y,
    dwell_ms,
    tags,
    double rate_hz,
    double jitter_sd,
    double coeff,
    double floor_deg,
    double thresh,
    double latency_ms,
    double bias_max,
    double untarget_mult,
    double scale,
    double sacc_base,
    double sacc_slope,
    rng,
):
    cdef double[::1] fxv = np.ascontiguousarray(fix_x, dtype=np.float64)
    cdef double[::1] fyv = np.ascontiguousarray(fix_y, dtype=np.float64)
    cdef double[::1] dwv = np.ascontiguousarray(dwell_ms, dtype=np.float64)
    cdef long long[::1] tgv = np.ascontiguousarray(tags, dtype=np.int64)
    cdef Py_ssize_t n_fix = fxv.shape[0]

    capsule = rng.bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("rng does not expose a BitGenerator capsule")
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")

    cdef double period = 1000.0 / rate_hz
    cdef double jsd = jitter_sd * scale
    cdef double bias_x = 0.0, bias_y = 0.0
    cdef double u1, u2, br, ba
    cdef double t0, cx, cy, tx, ty, dw
    cdef double dx, dy, amp, dur, esd, ex, ey, lx, ly, err_x, err_y, err
    cdef long long tag
    cdef Py_ssize_t i, ln = 0
    cdef _Buf buf = _Buf(1024)

    # at most two landings per planned saccade (primary + corrective)
    land_x_arr = np.empty(2 * max(n_fix - 1, 0), dtype=np.float64)
    land_y_arr = np.empty(2 * max(n_fix - 1, 0), dtype=np.float64)
    cdef double[::1] land_xv = land_x_arr
    cdef double[::1] land_yv = land_y_arr

    with rng.bit_generator.lock:
        if scale > 0.0 and bias_max > 0.0:
            u1 = random_standard_uniform(bg)
            u2 = random_standard_uniform(bg)
            br = bias_max * scale * sqrt(u1)
            ba = (2.0 * M_PI) * u2
            bias_x = br * cos(ba)
            bias_y = br * sin(ba)

        cx = fxv[0]
        cy = fyv[0]
        t0 = 0.0
        _emit_fixation(buf, bg, t0, cx, cy, dwv[0], rate_hz, jsd, bias_x, bias_y)
        t0 = t0 + dwv[0]
        for i in range(1, n_fix):
            tx = fxv[i]
            ty = fyv[i]
            tag = tgv[i]
            dw = dwv[i]
            # primary saccade
            dx = tx - cx
            dy = ty - cy
            amp = sqrt(dx * dx + dy * dy)
            if amp > 0.0:
                dur = <double> round(sacc_base + sacc_slope * amp, 6)
                esd = scale * (coeff * amp + floor_deg)
                if tag == 3:  # border_exit: no landing object to aim at
                    esd = esd * untarget_mult
                if esd > 0.0:
                    ex = esd * random_standard_normal(bg)
                    ey = esd * random_standard_normal(bg)
                else:
                    ex = 0.0
                    ey = 0.0
                lx = tx + ex
                ly = ty + ey
                _emit_flight(buf, t0, cx, cy, lx, ly, dur, rate_hz, period, bias_x, bias_y)
                land_xv[ln] = lx + bias_x
                land_yv[ln] = ly + bias_y
                ln += 1
                t0 = t0 + dur
                cx = lx
                cy = ly
            err_x = cx - tx
            err_y = cy - ty
            err = sqrt(err_x * err_x + err_y * err_y)
            if tag != 3 and scale > 0.0 and err > thresh:
                # rest on the wrong spot for one reaction latency, then
                # fire the single corrective saccade
                _emit_fixation(
                    buf, bg, t0, cx, cy, latency_ms, rate_hz, jsd, bias_x, bias_y
                )
                t0 = t0 + latency_ms
                dx = tx - cx
                dy = ty - cy
                amp = sqrt(dx * dx + dy * dy)
                if amp > 0.0:
                    dur = <double> round(sacc_base + sacc_slope * amp, 6)
                    esd = scale * (coeff * amp + floor_deg)
                    if tag == 3:
                        esd = esd * untarget_mult
                    if esd > 0.0:
                        ex = esd * random_standard_normal(bg)
                        ey = esd * random_standard_normal(bg)
                    else:
                        ex = 0.0
                        ey = 0.0
                    lx = tx + ex
                    ly = ty + ey
                    _emit_flight(buf, t0, cx, cy, lx, ly, dur, rate_hz, period, bias_x, bias_y)
                    land_xv[ln] = lx + bias_x
                    land_yv[ln] = ly + bias_y
                    ln += 1
                    t0 = t0 + dur
                    cx = lx
                    cy = ly
            _emit_fixation(buf, bg, t0, cx, cy, dw, rate_hz, jsd, bias_x, bias_y)
            t0 = t0 + dw

    cdef Py_ssize_t total = buf.n
    t_arr = np.empty(total, dtype=np.float64)
    x_arr = np.empty(total, dtype=np.float64)
    y_arr = np.empty(total, dtype=np.float64)
    v_arr = np.empty(total, dtype=np.uint8)
    cdef double[::1] tv = t_arr
    cdef double[::1] xv = x_arr
    cdef double[::1] yv = y_arr
    cdef unsigned char[::1] vv = v_arr
    for i in range(total):
        tv[i] = buf.t[i]
        xv[i] = buf.x[i]
        yv[i] = buf.y[i]
        vv[i] = buf.v[i]
    return (
        t_arr,
        x_arr,
        y_arr,
        v_arr.view(np.bool_),
        land_x_arr[:ln].copy(),
        land_y_arr[:ln].copy(),
        bias_x,
        bias_y,
    )


# ---------------------------------------------------------------------------
# stream decoding
# ---------------------------------------------------------------------------

cdef inline double _wrap180(double a):
    # Python float modulo semantics: result takes the divisor's sign.
    cdef double r = fmod(a + 180.0, 360.0)
    if r != 0.0 and r < 0.0:
        r += 360.0
    return r - 180.0


cdef void _item_direction(long index, long breadth, double *ox, double *oy):
    cdef double ang = 90.0 - index * (360.0 / breadth)
    cdef double q = ang / 90.0
    cdef long k
    cdef double rad
    if q == floor(q):
        # Python's int(q) % 4 on possibly negative q
        k = ((<long> q) % 4 + 4) % 4
        if k == 0:
            ox[0] = 1.0
            oy[0] = 0.0
        elif k == 1:
            ox[0] = 0.0
            oy[0] = 1.0
        elif k == 2:
            ox[0] = -1.0
            oy[0] = 0.0
        else:
            ox[0] = 0.0
            oy[0] = -1.0
    else:
        rad = ang * (M_PI / 180.0)
        ox[0] = cos(rad)
        oy[0] = sin(rad)


cdef long _sector_of_point(double px, double py, double ccx, double ccy, long breadth):
    cdef double theta = atan2(py - ccy, px - ccx) * (180.0 / M_PI)
    cdef long best = -1
    cdef double best_d = 1e308
    cdef long i
    cdef double phi, d
    for i in range(breadth):
        phi = 90.0 - i * (360.0 / breadth)
        d = fabs(_wrap180(theta - phi))
        if d < best_d:
            best_d = d
            best = i
    return best


def decode_trial(t, x, y, valid, config, bint telemetry=False):
    """Replay a sample stream through the session state machine.

    Telemetry events are a UI concern served by the Python session; this
    kernel only handles the selection semantics, so telemetry runs fall
    back to the pure backend.
    """
    if telemetry:
        from . import pure

        return pure.decode_trial(t, x, y, valid, config, telemetry=True)

    from gazemark import engine as _engine
    from gazemark.errors import SessionStateError

    cdef double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef unsigned char[::1] vv = np.ascontiguousarray(valid, dtype=np.uint8)
    cdef Py_ssize_t n = tv.shape[0]

    cdef long tech  # 0 lattice, 1 border_pie, 2 peye
    if config.technique is _engine.Technique.LATTICE:
        tech = 0
    elif config.technique is _engine.Technique.BORDER_PIE:
        tech = 1
    else:
        tech = 2
    cdef long breadth = config.menu.breadth
    cdef long depth = config.menu.depth
    cdef bint back_reserved = config.menu.back_reserved
    cdef double root_x = config.root[0]
    cdef double root_y = config.root[1]
    cdef double radius = config.params.radius
    cdef double zone_width = config.params.zone_width
    cdef double crust_width = config.params.crust_width
    cdef double dwell_ms = config.dwell_ms

    # per-breadth direction table (identical values to geometry.item_direction)
    cdef double *dirx = <double *> malloc(breadth * sizeof(double))
    cdef double *diry = <double *> malloc(breadth * sizeof(double))
    cdef long *path = <long *> malloc((depth + 1) * sizeof(long))
    cdef double *cen_x = <double *> malloc((depth + 2) * sizeof(double))
    cdef double *cen_y = <double *> malloc((depth + 2) * sizeof(double))
    if dirx == NULL or diry == NULL or path == NULL or cen_x == NULL or cen_y == NULL:
        free(dirx)
        free(diry)
        free(path)
        free(cen_x)
        free(cen_y)
        raise MemoryError()

    cdef long i, hit, back, entry, idx
    cdef Py_ssize_t si
    cdef bint is_open = 0, has_dwell = 0, has_prev = 0, done = 0
    cdef double dwell_start = 0.0, last_t = 0.0
    cdef bint has_last = 0
    cdef long level = 0, n_path = 0, n_cen = 1
    cdef double st, px, py, ddx, ddy, half, ax, ay
    cdef double fx_, fy_, gx, gy, rsq, sdx, sdy, qa, qb, qc, disc, tt
    cdef double crx, cry, rr
    cdef double anchor_x = 0.0, anchor_y = 0.0, land_x = 0.0, land_y = 0.0
    cdef double prev_x = 0.0, prev_y = 0.0
    cdef bint commit

    events = []
    try:
        for i in range(breadth):
            _item_direction(i, breadth, &dirx[i], &diry[i])
        cen_x[0] = root_x
        cen_y[0] = root_y
        half = zone_width / 2.0

        for si in range(n):
            st = tv[si]
            if has_last and st <= last_t:
                raise SessionStateError(
                    f"timestamps must be strictly increasing ({st} after {last_t})"
                )
            last_t = st
            has_last = 1
            if not vv[si]:
                continue  # advances time, contributes no geometry
            px = xv[si]
            py = yv[si]
            commit = 0
            if not is_open:
                ddx = px - root_x
                ddy = py - root_y
                if ddx * ddx + ddy * ddy <= half * half:
                    if not has_dwell:
                        has_dwell = 1
                        dwell_start = st
                    if st - dwell_start >= dwell_ms:
                        is_open = 1
                        level = 1
                        events.append(_engine.SessionEvent(kind=_engine.MENU_OPENED, t=st))
                        # opening sample is consumed by the dwell
                else:
                    has_dwell = 0
            else:
                if tech == 0:
                    for i in range(breadth):
                        ax = cen_x[n_cen - 1] + radius * dirx[i]
                        ay = cen_y[n_cen - 1] + radius * diry[i]
                        ddx = px - ax
                        ddy = py - ay
                        if ddx * ddx + ddy * ddy <= (zone_width * 0.5) * (zone_width * 0.5):
                            commit = 1
                            idx = i
                            anchor_x = ax
                            anchor_y = ay
                            land_x = px
                            land_y = py
                            break
                elif tech == 1:
                    if has_prev:
                        fx_ = prev_x - cen_x[n_cen - 1]
                        fy_ = prev_y - cen_y[n_cen - 1]
                        gx = px - cen_x[n_cen - 1]
                        gy = py - cen_y[n_cen - 1]
                        rsq = radius * radius
                        if fx_ * fx_ + fy_ * fy_ <= rsq and gx * gx + gy * gy > rsq:
                            sdx = px - prev_x
                            sdy = py - prev_y
                            qa = sdx * sdx + sdy * sdy
                            qb = 2.0 * (fx_ * sdx + fy_ * sdy)
                            qc = fx_ * fx_ + fy_ * fy_ - rsq
                            disc = qb * qb - 4.0 * qa * qc
                            if disc >= 0.0:
                                tt = (-qb + sqrt(disc)) / (2.0 * qa)
                                if tt < 0.0:
                                    tt = 0.0
                                elif tt > 1.0:
                                    tt = 1.0
                                crx = prev_x + tt * sdx
                                cry = prev_y + tt * sdy
                                commit = 1
                                idx = _sector_of_point(
                                    crx, cry, cen_x[n_cen - 1], cen_y[n_cen - 1], breadth
                                )
                                anchor_x = crx
                                anchor_y = cry
                                land_x = crx
                                land_y = cry
                else:
                    ddx = px - cen_x[n_cen - 1]
                    ddy = py - cen_y[n_cen - 1]
                    rr = sqrt(ddx * ddx + ddy * ddy)
                    if not (rr < radius or rr > radius + crust_width):
                        commit = 1
                        idx = _sector_of_point(
                            px, py, cen_x[n_cen - 1], cen_y[n_cen - 1], breadth
                        )
                        anchor_x = px
                        anchor_y = py
                        land_x = px
                        land_y = py
                if commit:
                    back = -1
                    if back_reserved and level >= 2:
                        entry = path[n_path - 1]
                        back = (entry + breadth / 2) % breadth
                    if back >= 0 and idx == back:
                        events.append(
                            _engine.SessionEvent(
                                kind=_engine.BACK_TAKEN,
                                t=st,
                                level=level,
                                index=idx,
                                landing=(land_x, land_y),
                            )
                        )
                        n_path -= 1
                        n_cen -= 1
                        level -= 1
                    else:
                        events.append(
                            _engine.SessionEvent(
                                kind=_engine.LEVEL_SELECTED,
                                t=st,
                                level=level,
                                index=idx,
                                anchor=(anchor_x, anchor_y),
                                landing=(land_x, land_y),
                            )
                        )
                        path[n_path] = idx
                        n_path += 1
                        cen_x[n_cen] = anchor_x
                        cen_y[n_cen] = anchor_y
                        n_cen += 1
                        if level == depth:
                            done = 1
                            events.append(
                                _engine.SessionEvent(
                                    kind=_engine.LEAF_SELECTED,
                                    t=st,
                                    level=level,
                                    index=idx,
                                    anchor=(anchor_x, anchor_y),
                                    landing=(land_x, land_y),
                                    path=tuple([path[i] for i in range(n_path)]),
                                )
                            )
                        else:
                            level += 1
            prev_x = px
            prev_y = py
            has_prev = 1
            if done:
                break
    finally:
        free(dirx)
        free(diry)
        free(path)
        free(cen_x)
        free(cen_y)
    return events
