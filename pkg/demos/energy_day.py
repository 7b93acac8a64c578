"""Walk through one simulated office day on harvested light.

Runs the 9 h office scenario under both power policies, then shows the
device recovering after a stay in the dark.

    python demos/energy_day.py
"""

import numpy as np

from lifelogsim.config import DeviceConfig
from lifelogsim.environment import ActivityProfile, PlaceProfile, Scenario, Segment, load_bundled
from lifelogsim.simulator import Mode, run, zero_energy_rate


def office_day(seed=0):
    sc = load_bundled("office_9h", seed=seed)
    cfg = DeviceConfig(seed=seed)
    print(f"office day: {sum(s.duration for s in sc.segments) / 3600:.1f} h, {len(sc.segments)} segments")
    for mode in Mode:
        res = run(sc, cfg, mode)
        rep = zero_energy_rate(res.trace)
        print(
            f"  {mode.value:9s} zero-energy rate {rep.zero_energy_rate:7.2%}"
            f"  records {res.n_records:6d}  mean rate {res.mean_rate_hz:5.2f} Hz"
            f"  on battery {rep.battery_time / 60:6.1f} min"
        )


def dark_then_light(seed=0):
    places = {"dark": PlaceProfile("dark", 0.0), "lab": PlaceProfile("lab", 520.0, 20.0, 6.0, 0.7)}
    acts = {"sitting": ActivityProfile("sitting", False, 0.02, 0.3)}
    segs = (Segment("dark", "sitting", 120.0), Segment("lab", "sitting", 60.0))
    res = run(Scenario(segs, places, acts, seed), DeviceConfig(seed=seed, v_cap_init=2.3))
    after = res.record_t[res.record_t > 120.0]
    print("two minutes in the dark, then a lit lab:")
    print(f"  capacitor at the end of the dark: {np.interp(120.0, res.trace.t, res.trace.v_cap):.2f} V")
    print(f"  first record after the lights come on: {after[0] - 120.0:.1f} s later")
    print(f"  records in the lit minute: {len(after)}")


if __name__ == "__main__":
    office_day()
    print()
    dark_then_light()
