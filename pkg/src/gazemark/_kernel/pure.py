"""Pure-Python backend: reference implementations of the two hot kernels.

synth_trial renders a planned scanpath into measured samples;
decode_trial replays samples through the streaming session decoder.

The compiled backend reimplements synth_trial and decode_trial in C and
is required to be bit-identical: same RNG consumption order, same
floating-point expression order, same rounding conventions.  Keep every
arithmetic expression here in the exact shape the compiled kernel uses.
Two conventions matter and are easy to get wrong:

  - sample counts round half away from zero: floor(x + 0.5), never
    round() (banker's rounding differs at .5 ties)
  - normal/uniform draws are skipped entirely when their sd (or the
    bias radius) is zero, so zero-noise runs consume no randomness
"""

from __future__ import annotations

import math

import numpy as np


def backend_name() -> str:
    return "pure"


def _halfup(v: float) -> int:
    return int(math.floor(v + 0.5))


def synth_trial(
    fix_x,
    fix_y,
    dwell_ms,
    tags,
    rate_hz,
    jitter_sd,
    coeff,
    floor_deg,
    thresh,
    latency_ms,
    bias_max,
    untarget_mult,
    scale,
    sacc_base,
    sacc_slope,
    rng,
):
    """Render fixation targets into (t, x, y, valid, land_x, land_y, bias_x, bias_y).

    RNG consumption order (the compiled kernel must match draw for draw):
    bias (2 uniforms) once, then per saccade: endpoint (2 normals), and
    when a corrective fires: latency fixation jitter (n*2 normals) then
    corrective endpoint (2 normals); each fixation draws n*2 jitter
    normals row-wise (x then y per sample).
    """
    period = 1000.0 / rate_hz
    jsd = jitter_sd * scale
    t_blocks: list[np.ndarray] = []
    x_blocks: list[np.ndarray] = []
    y_blocks: list[np.ndarray] = []
    v_blocks: list[np.ndarray] = []
    land_x: list[float] = []
    land_y: list[float] = []

    if scale > 0.0 and bias_max > 0.0:
        u1 = rng.random()
        u2 = rng.random()
        br = bias_max * scale * math.sqrt(u1)
        ba = (2.0 * math.pi) * u2
        bias_x = br * math.cos(ba)
        bias_y = br * math.sin(ba)
    else:
        bias_x = 0.0
        bias_y = 0.0

    def emit_fixation(onset: float, px: float, py: float, dwell: float):
        n = _halfup(dwell * rate_hz / 1000.0)
        if n < 1:
            n = 1  # every planned fixation contributes at least its onset sample
        # (k*1000)/rate, not k*period: keeps integer-millisecond instants
        # exact (120 samples at 120 Hz is 1000.0, not 1000.0000000000001),
        # which downstream timing sums rely on
        tt = onset + (np.arange(n, dtype=np.float64) * 1000.0) / rate_hz
        if jsd > 0.0:
            z = rng.standard_normal((n, 2))
            xx = px + jsd * z[:, 0]
            yy = py + jsd * z[:, 1]
        else:
            xx = np.full(n, px, dtype=np.float64)
            yy = np.full(n, py, dtype=np.float64)
        t_blocks.append(tt)
        x_blocks.append(xx + bias_x)
        y_blocks.append(yy + bias_y)
        v_blocks.append(np.ones(n, dtype=bool))

    def emit_flight(onset: float, cx: float, cy: float, lx: float, ly: float, dur: float):
        # Interior samples only, strictly between onset and landing; the
        # landing instant belongs to the next fixation's first sample.
        m = int(math.ceil(dur / period)) - 1
        if m < 1:
            return
        j = np.arange(1, m + 1, dtype=np.float64)
        jp = (j * 1000.0) / rate_hz
        jp = jp[jp < dur]  # rounding may push the last offset onto the landing
        if jp.shape[0] == 0:
            return
        tau = jp / dur
        s = tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau))
        xx = cx + (lx - cx) * s
        yy = cy + (ly - cy) * s
        t_blocks.append(onset + jp)
        x_blocks.append(xx + bias_x)
        y_blocks.append(yy + bias_y)
        v_blocks.append(np.zeros(jp.shape[0], dtype=bool))

    def do_saccade(onset: float, cx: float, cy: float, tx: float, ty: float, tag: int):
        dx = tx - cx
        dy = ty - cy
        amp = math.sqrt(dx * dx + dy * dy)
        if amp <= 0.0:
            return onset, cx, cy
        dur = round(sacc_base + sacc_slope * amp, 6)
        esd = scale * (coeff * amp + floor_deg)
        if tag == 3:  # border_exit: no landing object to aim at
            esd = esd * untarget_mult
        if esd > 0.0:
            ex = esd * rng.standard_normal()
            ey = esd * rng.standard_normal()
        else:
            ex = 0.0
            ey = 0.0
        lx = tx + ex
        ly = ty + ey
        emit_flight(onset, cx, cy, lx, ly, dur)
        land_x.append(lx + bias_x)
        land_y.append(ly + bias_y)
        return onset + dur, lx, ly

    cx = float(fix_x[0])
    cy = float(fix_y[0])
    t0 = 0.0
    emit_fixation(t0, cx, cy, float(dwell_ms[0]))
    t0 = t0 + float(dwell_ms[0])
    n_fix = len(fix_x)
    for i in range(1, n_fix):
        tx = float(fix_x[i])
        ty = float(fix_y[i])
        tag = int(tags[i])
        dw = float(dwell_ms[i])
        t0, cx, cy = do_saccade(t0, cx, cy, tx, ty, tag)
        err_x = cx - tx
        err_y = cy - ty
        err = math.sqrt(err_x * err_x + err_y * err_y)
        if tag != 3 and scale > 0.0 and err > thresh:
            # The eye rests on the wrong spot for one reaction latency
            # before the (single) corrective saccade fires.
            emit_fixation(t0, cx, cy, latency_ms)
            t0 = t0 + latency_ms
            t0, cx, cy = do_saccade(t0, cx, cy, tx, ty, tag)
        emit_fixation(t0, cx, cy, dw)
        t0 = t0 + dw

    t = np.concatenate(t_blocks)
    x = np.concatenate(x_blocks)
    y = np.concatenate(y_blocks)
    v = np.concatenate(v_blocks)
    return (
        t,
        x,
        y,
        v,
        np.array(land_x, dtype=np.float64),
        np.array(land_y, dtype=np.float64),
        bias_x,
        bias_y,
    )


def decode_trial(t, x, y, valid, config, telemetry: bool = False):
    """Replay a sample stream through the streaming decoder.

    This backend IS the session state machine: it feeds the canonical
    Session sample by sample, so it cannot drift from it.  The compiled
    backend reimplements the machine and is parity-tested against this.
    """
    from ..engine import GazeSample, Session, SessionState

    sess = Session(config, telemetry=telemetry)
    events = []
    n = int(t.shape[0])
    for i in range(n):
        events.extend(
            sess.feed_sample(
                GazeSample(float(t[i]), float(x[i]), float(y[i]), bool(valid[i]))
            )
        )
        if sess.state is SessionState.DONE or sess.state is SessionState.CANCELLED:
            break
    return events
