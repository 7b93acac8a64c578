"""Compiled fixed-step loop.

Mirrors ``scheduler.device_step`` / ``baseline_step`` driven by
``environment.ambient_at`` with identical floating-point operation order, so
the pure-Python path can be used as a bit-exact reference in tests.

The loop writes events into fixed-size buffers and returns early when one
fills up; ``simulate`` drains the buffers and resumes.  Keeping array
reallocation out of the hot loop makes it several times faster.
"""

import math

import numpy as np
from numba import njit

BATTERY, CAPACITOR = 0, 1
SLEEP, ACTIVE = 0, 1
BUFFER = 1 << 16

# indices into the float / int state vectors
V, ELAPSED, BATT, CHARGE = 0, 1, 2, 3
SOURCE, MODE, PW_OUT, MD_OUT, CLAMPED, SEG = 0, 1, 2, 3, 4, 5


@njit(cache=True)
def run_kernel(
    seg_end, lux_mean, lux_std, flick_amp, flick_hz, shadow_depth, shadow_hz,
    lux_noise, block,
    i1_max, l1_sat, i2_max, l2_sat,
    capacitance, v_max,
    p_fall, p_rise, m_fall, m_rise,
    i_sleep, i_active, i_led, t_record,
    dt, k0, n_steps, steps_per_trace, baseline,
    fstate, istate,
    rec, sw, sw_kind, tr_src, tr_mode, tr_v,
):  # fmt: skip
    """Step from ``k0`` until ``n_steps`` or a full event buffer.

    ``fstate``/``istate`` are updated in place.  Returns
    ``(next_k, n_rec, n_sw)``.
    """
    v = fstate[V]
    elapsed = fstate[ELAPSED]
    batt = fstate[BATT]
    charge = fstate[CHARGE]  # integral of net capacitor current, coulombs
    source = istate[SOURCE]
    mode = istate[MODE]
    pw_out = istate[PW_OUT]
    md_out = istate[MD_OUT]
    clamped = istate[CLAMPED]  # steps where the [0, v_max] clamp engaged
    seg = istate[SEG]

    n_rec = 0
    n_sw = 0
    cap_rec = rec.shape[0]
    cap_sw = sw.shape[0]
    two_pi = 2.0 * math.pi
    k = k0
    while k < n_steps:
        if k % steps_per_trace == 0:
            j = k // steps_per_trace
            tr_src[j] = source
            tr_mode[j] = mode
            tr_v[j] = v
        t = k * dt
        while seg < seg_end.shape[0] - 1 and t >= seg_end[seg]:
            seg += 1
        b = int(math.floor(t / block + 1e-9))
        base = lux_mean[seg] + lux_std[seg] * lux_noise[b] + flick_amp[seg] * math.sin(two_pi * flick_hz[seg] * t)
        sq = 1.0 if (shadow_hz[seg] * t) % 1.0 < 0.5 else 0.0
        lux = max(0.0, base) * (1.0 - shadow_depth[seg] * sq)
        harvest = i1_max * min(1.0, lux / l1_sat) + i2_max * min(1.0, lux / l2_sat)

        if source == CAPACITOR:
            if mode == ACTIVE:
                if elapsed >= t_record:
                    draw = i_active + i_led
                else:
                    draw = i_active
            else:
                draw = i_sleep
        else:
            draw = 0.0
        i_net = harvest - draw
        v_new = v + i_net * dt / capacitance
        if v_new < 0.0:
            v_new = 0.0
            clamped += 1
        elif v_new > v_max:
            v_new = v_max
            clamped += 1
        charge += i_net * dt
        v = v_new
        if mode == ACTIVE:
            elapsed = elapsed + dt
        if source == BATTERY:
            batt = batt + dt

        new_pw = pw_out
        if v >= p_rise:
            new_pw = 1
        elif v <= p_fall:
            new_pw = 0
        new_md = md_out
        if v >= m_rise:
            new_md = 1
        elif v <= m_fall:
            new_md = 0

        if baseline:
            if new_md == 1 and md_out == 0:
                source = CAPACITOR
                mode = ACTIVE
                elapsed = 0.0
                sw[n_sw] = k
                sw_kind[n_sw] = CAPACITOR
                n_sw += 1
            elif new_md == 0 and md_out == 1:
                if mode == ACTIVE and elapsed >= t_record:
                    rec[n_rec] = k
                    n_rec += 1
                source = BATTERY
                mode = SLEEP
                elapsed = 0.0
                sw[n_sw] = k
                sw_kind[n_sw] = BATTERY
                n_sw += 1
        else:
            # a single step cannot cross both power thresholds, so at most
            # one switch and one record are emitted per step
            if new_pw == 1 and pw_out == 0:
                source = CAPACITOR
                sw[n_sw] = k
                sw_kind[n_sw] = CAPACITOR
                n_sw += 1
            if new_md == 1 and md_out == 0:
                mode = ACTIVE
                elapsed = 0.0
            if new_md == 0 and md_out == 1:
                if mode == ACTIVE and elapsed >= t_record:
                    rec[n_rec] = k
                    n_rec += 1
                mode = SLEEP
                elapsed = 0.0
            if new_pw == 0 and pw_out == 1:
                source = BATTERY
                sw[n_sw] = k
                sw_kind[n_sw] = BATTERY
                n_sw += 1
        pw_out = new_pw
        md_out = new_md
        k += 1
        if n_rec == cap_rec or n_sw == cap_sw:
            break

    fstate[V] = v
    fstate[ELAPSED] = elapsed
    fstate[BATT] = batt
    fstate[CHARGE] = charge
    istate[SOURCE] = source
    istate[MODE] = mode
    istate[PW_OUT] = pw_out
    istate[MD_OUT] = md_out
    istate[CLAMPED] = clamped
    istate[SEG] = seg
    return k, n_rec, n_sw


def simulate(cols, lux_noise, block, cfg, thresholds, v0, source, pw_out, md_out, n_steps, baseline, buffer=BUFFER):
    """Run the whole horizon; returns a dict of event indices, trace columns
    and final state."""
    fstate = np.array([v0, 0.0, 0.0, 0.0])
    istate = np.array([source, SLEEP, pw_out, md_out, 0, 0], dtype=np.int64)
    spt = cfg.steps_per_trace
    n_tr = (n_steps - 1) // spt + 1
    tr_src = np.empty(n_tr, np.int8)
    tr_mode = np.empty(n_tr, np.int8)
    tr_v = np.empty(n_tr, np.float64)
    rec = np.empty(buffer, np.int64)
    sw = np.empty(buffer, np.int64)
    sw_kind = np.empty(buffer, np.int8)
    recs, sws, kinds = [], [], []
    k = 0
    while k < n_steps:
        k, n_rec, n_sw = run_kernel(
            cols["end"], cols["lux_mean"], cols["lux_std"], cols["flicker_amp"], cols["flicker_hz"],
            cols["shadow_depth"], cols["shadow_hz"],
            lux_noise, block,
            cfg.sc1_i_max, cfg.sc1_l_sat, cfg.sc2_i_max, cfg.sc2_l_sat,
            cfg.capacitance, cfg.v_max,
            *thresholds,
            cfg.i_sleep, cfg.i_active, cfg.i_led, cfg.t_record,
            cfg.dt, k, n_steps, spt, baseline,
            fstate, istate, rec, sw, sw_kind, tr_src, tr_mode, tr_v,
        )  # fmt: skip
        recs.append(rec[:n_rec].copy())
        sws.append(sw[:n_sw].copy())
        kinds.append(sw_kind[:n_sw].copy())
    return {
        "rec_k": np.concatenate(recs) if recs else np.empty(0, np.int64),
        "sw_k": np.concatenate(sws) if sws else np.empty(0, np.int64),
        "sw_kind": np.concatenate(kinds) if kinds else np.empty(0, np.int8),
        "tr_src": tr_src,
        "tr_mode": tr_mode,
        "tr_v": tr_v,
        "v": fstate[V],
        "batt": fstate[BATT],
        "charge": fstate[CHARGE],
        "clamped": int(istate[CLAMPED]),
    }
