import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lifelogsim.environment import (
    ACCEL_NOISE_G,
    AmbientNoise,
    ScenarioError,
    ambient_arrays,
    ambient_at,
    format_scenario,
    jitter_scenario,
    load_bundled,
    parse_scenario,
)

MINIMAL = """
[places]
lab1 500 0 0 0
[activities]
sitting static 0.02 0.3 0 0
[timeline]
lab1 sitting 300
"""


def test_minimal_scenario():
    sc = parse_scenario(MINIMAL)
    assert len(sc.segments) == 1
    assert sc.duration == 300.0


@pytest.mark.parametrize(
    "edit, needle",
    [
        (("lab1 sitting 300", "moon sitting 300"), "line 7: unknown place 'moon'"),
        (("lab1 sitting 300", "lab1 flying 300"), "line 7: unknown activity 'flying'"),
        (("lab1 sitting 300", "lab1 sitting 0"), "line 7: non-positive duration"),
        (("lab1 sitting 300", "lab1 sitting"), "line 7"),
        (("lab1 500 0 0 0", "lab1 500 0 zero 0"), "line 3"),
        (("sitting static", "sitting lazy"), "line 5"),
        (("sitting static 0.02", "sitting static 0.2"), "vib_amp"),
        (("[timeline]", "[schedule]"), "line 6: unknown section"),
    ],
)
def test_parse_errors_name_the_line(edit, needle):
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(MINIMAL.replace(*edit))
    assert needle in str(exc.value)


def test_bundled_default():
    sc = load_bundled("default")
    assert len(sc.segments) == 21
    assert len(sc.places) == 14
    assert len(sc.activities) == 5
    order = [s.place for s in sc.segments]
    first = {p: order.index(p) for p in order}
    groups = [["lab1", "lab2", "lab3", "lab4", "lab5"], ["hall9f"], ["elevator"], ["stairs"], ["mtg"], ["store"],
              ["outdoors"], ["restroom"]]  # fmt: skip
    firsts = [min(first[p] for p in g) for g in groups]
    assert firsts == sorted(firsts)


def test_bundled_office_day():
    sc = load_bundled("office_9h")
    assert sc.duration == 9 * 3600


def test_format_round_trip():
    sc = load_bundled("default", seed=4)
    again = parse_scenario(format_scenario(sc), seed=4)
    assert again == sc and again.places == sc.places and again.activities == sc.activities


def test_segment_boundary_takes_later_labels():
    sc = load_bundled("default")
    noise = AmbientNoise(0, sc.duration)
    t_edge = float(sc.boundaries[0])
    assert ambient_at(sc, t_edge, noise)[2:] == (sc.segments[1].place, sc.segments[1].activity)
    assert ambient_at(sc, np.nextafter(t_edge, 0), noise)[2:] == (sc.segments[0].place, sc.segments[0].activity)
    with pytest.raises(ValueError):
        ambient_at(sc, sc.duration, noise)
    with pytest.raises(ValueError):
        ambient_at(sc, -0.001, noise)


def test_labels_change_exactly_at_boundaries():
    sc = load_bundled("default")
    noise = AmbientNoise(0, sc.duration)
    t = np.arange(0, sc.duration, 0.5)
    seg = ambient_arrays(sc, t, noise)[2]
    assert np.count_nonzero(np.diff(seg)) == len(sc.segments) - 1


def test_static_without_shadow_has_no_modulation():
    sc = parse_scenario(MINIMAL)
    noise = AmbientNoise(0, sc.duration)
    lux = [ambient_at(sc, t, noise)[0] for t in np.arange(0, 10, 0.013)]
    assert np.ptp(lux) == 0.0
    acc = [abs(ambient_at(sc, t, noise)[1]) for t in np.arange(0, 300, 0.07)]
    assert max(acc) <= 0.05 + 5 * ACCEL_NOISE_G


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_bounds_and_scalar_vector_agreement(seed):
    sc = load_bundled("default", seed=seed)
    noise = AmbientNoise(seed, sc.duration)
    t = np.random.default_rng(seed).uniform(0, sc.duration, 400)
    lux, acc, seg = ambient_arrays(sc, t, noise)
    assert np.all(lux >= 0)
    vib = np.array([sc.activities[sc.segments[i].activity].vib_amp for i in seg])
    assert np.all(np.abs(acc) <= vib + 5 * ACCEL_NOISE_G + 1e-12)
    for k in range(0, 400, 40):
        one = ambient_at(sc, float(t[k]), noise)
        assert one[0] == pytest.approx(lux[k], rel=1e-12, abs=1e-9)
        assert one[1] == pytest.approx(acc[k], rel=1e-12, abs=1e-12)


def test_same_seed_same_ambient_bitwise():
    sc = load_bundled("default", seed=9)
    t = np.arange(0, sc.duration, 0.01)
    a = ambient_arrays(sc, t, AmbientNoise(9, sc.duration))
    b = ambient_arrays(sc, t, AmbientNoise(9, sc.duration))
    c = ambient_arrays(sc, t, AmbientNoise(10, sc.duration))
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not np.array_equal(a[0], c[0])


def test_jitter_keeps_invariants_and_varies_wearers():
    sc = load_bundled("default")
    a = jitter_scenario(sc, np.random.default_rng(1))
    b = jitter_scenario(sc, np.random.default_rng(2))
    assert a.segments == sc.segments
    assert a.places["lab1"].lux_mean != b.places["lab1"].lux_mean
    for name, p in a.places.items():
        assert 0.25 <= p.lux_mean / sc.places[name].lux_mean <= 2.25
    for act in a.activities.values():
        assert act.dynamic or act.vib_amp <= 0.05
