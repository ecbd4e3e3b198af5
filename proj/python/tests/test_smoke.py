import math
import os
from pathlib import Path

import numpy as np
import pytest

import fastbasin as fb

CONFIGS = Path(os.environ.get("FASTBASIN_SOURCE_DIR", Path(__file__).resolve().parents[2])) / "configs"


def config(name):
    return fb.load_ifs(CONFIGS / f"{name}.ifs")


def test_parse_and_apply():
    ifs = fb.parse_ifs("space line1ext\nmap moebius1 0.5 0 0 1\nmap moebius1 1 3 -2 6\n")
    assert len(ifs) == 2
    assert ifs.space == "line1ext"
    assert ifs.apply_word([2, 2], 6.0) == pytest.approx(1 / 6)
    assert ifs.apply_word([2], 3.0) is None  # the pole goes to infinity
    assert ifs.apply_word([2], None) == pytest.approx(-0.5)


def test_errors_carry_kind():
    with pytest.raises(fb.FastbasinError) as info:
        fb.parse_ifs("space plane2\nmap affine2 1 0 0\n")
    assert info.value.kind == "SyntaxError"
    assert "line 2" in str(info.value)
    with pytest.raises(fb.FastbasinError):
        fb.load_ifs(CONFIGS / "missing.ifs")


def test_attractor_and_fast_basin():
    ifs = config("sierpinski")
    a = fb.compute_attractor(ifs, nx=256)
    assert a.self_consistency <= 2 * a.raster.h
    arr = a.raster.to_array()
    assert arr.shape == (256, 256)
    assert arr.dtype == np.uint8
    assert arr.sum() == a.raster.count()

    field = fb.fast_basin(ifs, nx=256, K=4)
    gen = field.to_array()
    assert set(np.unique(gen)) <= {0, 1, 2, 3, 4, 255}
    assert (gen == 0).sum() == field.count(0)
    level = field.level_set(4)
    assert fb.connected_components(level, 8) == 1
    dim_b, _ = fb.box_dimension(level)
    dim_a, _ = fb.box_dimension(fb.attractor_on(ifs, nx=256).raster)
    assert abs(dim_a - math.log(3) / math.log(2)) < 0.08
    assert abs(dim_b - dim_a) < 0.1
    img = field.image()
    assert img.shape == (256, 256, 3)
    assert tuple(img[(gen[::-1] == 0)][0]) == (255, 0, 0)


def test_files_round_trip(tmp_path):
    ifs = config("kigami")
    field = fb.fast_basin(ifs, nx=64, K=3)
    field.write_fbg1(tmp_path / "f.fbg")
    back = fb.read_fbg1(tmp_path / "f.fbg")
    assert np.array_equal(back.to_array(), field.to_array())
    field.write_ppm(tmp_path / "f.ppm")
    assert (tmp_path / "f.ppm").read_bytes().startswith(b"P6\n64 64\n255\n")
    r = fb.Raster.from_array(field.level_set(2).to_array(), field.window)
    assert r.count() == field.level_set(2).count()


def test_forward_search():
    m = config("moebius1d")
    unit = fb.IntervalOracle(0.0, 1.0)
    assert fb.generation_forward(m, 6.0, unit, K=8) == 2
    assert fb.generation_forward(m, None, unit, K=8) == 2

    hs = config("halfsqrt")
    seg = fb.SegmentOracle((0.0, 1.0), (1.0, 1.0))
    assert fb.generation_forward(hs, (0.5, 2.0), seg, K=12) is None

    c2 = config("parabola_c2")
    z = 1.2 - 0.7j
    graph = fb.ParabolaOracle()
    assert fb.generation_forward(c2, (z, z * z), graph, K=6, eps=1e-6) is not None
    assert fb.generation_forward(c2, (z, z * z + 0.5), graph, K=6, eps=1e-6) is None

    s = config("sierpinski")
    oracle = fb.AffineAttractorOracle(s, 1e-9)
    assert oracle.distance(0.4, 0.4) == pytest.approx(0.1, abs=1e-6)
    assert fb.generation_forward(s, (1.5, 0.5), oracle, K=3) == 1


def test_basins_and_checks():
    m = config("moebius1d")
    est = fb.basin_estimate(m, K=16)
    assert est.count() == 304
    q = config("ifs01")
    e = fb.expansivity_check(q, (0.0, 0.0), 1.5, samples=2000)
    assert e["ok"] and e["r0"] == pytest.approx(4.0)
    slow = fb.slow_basin(q, nx=128, K=3)
    assert fb.fast_basin(q, nx=128, K=3).level_set(3).subset_of(slow)
    stages = fb.continuation(q, [1, 2, 3], nx=128)
    assert len(stages) == 4
    crit = fb.criterion_check(q, fb.compute_attractor(q, nx=128))
    assert crit["nontrivial"] and len(crit["per_map_hausdorff"]) == 3


def test_analyze_report():
    report = fb.analyze(config("fig6"), nx=128)
    assert report["system"]
    assert 0.0 <= float(report["dim_attractor"]) <= 2.0
    assert int(report["components_B"]) >= 1
