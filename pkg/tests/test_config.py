import math

import pytest

from palh.config import (
    BUNDLED,
    EXPERIMENTS,
    bundled_config,
    default_config_text,
    load_config,
    parse_boundary,
    parse_config,
    parse_floats,
    parse_ints,
    parse_map,
)
from palh.errors import ConfigError


def test_number_lists():
    assert parse_floats("1, pi/4, 2*3, 1.55/1.3") == [1.0, math.pi / 4, 6.0, 1.55 / 1.3]
    assert parse_ints("5:15") == list(range(5, 16))
    assert parse_ints("8:48:4, 60") == list(range(8, 49, 4)) + [60]
    assert parse_map("50:5.16, 100:1/100") == {50.0: 5.16, 100.0: 0.01}


@pytest.mark.parametrize("bad", ["", "1, x", "inf", "nan"])
def test_bad_floats(bad):
    with pytest.raises(ConfigError):
        parse_floats(bad)


@pytest.mark.parametrize("bad", ["", "1.5", "5:3", "1:9:0", "a"])
def test_bad_ints(bad):
    with pytest.raises(ConfigError):
        parse_ints(bad)


def test_boundaries():
    assert parse_boundary("circle 1.3").params == (1.3,)
    assert parse_boundary("hexstar").kind == "hexstar"
    assert parse_boundary("hexstar 0.5 0.15 6 pi/4").params[3] == pytest.approx(math.pi / 4)
    for bad in ("square 1", "circle", "ellipse 1", "hexstar 1 2", "circle -1"):
        with pytest.raises(ConfigError):
            parse_boundary(bad)


@pytest.mark.parametrize("experiment", EXPERIMENTS)
def test_defaults_round_trip(experiment):
    a = parse_config("", experiment)
    b = parse_config(default_config_text(experiment), experiment)
    assert a.echo() == b.echo()


@pytest.mark.parametrize("name", sorted(BUNDLED))
def test_bundled_configs_parse(name):
    cfg = bundled_config(name)
    assert cfg.experiment == BUNDLED[name]


def test_bundled_geometries():
    star = bundled_config("scatter_hexstar_star")["problem"]
    assert star["layer_scale"] == 2.6 and star["rho"] == pytest.approx(3 / 2.6)
    assert star["theta0"] == pytest.approx(math.pi / 4)
    ell = bundled_config("scatter_peanut_ellipse")["problem"]["layer"]
    assert ell.params == pytest.approx((1.5 * math.cosh(0.7), 1.5 * math.sinh(0.7)))
    assert bundled_config("scatter_peanut_rectangle_gaussian")["medium"]["refraction"] == "gaussian"
    with pytest.raises(ConfigError):
        bundled_config("nope")


@pytest.mark.parametrize("text", [
    "[problem]\nwavenumber = 3\n",
    "[extra]\nk = 3\n",
    "[problem]\nk = -1\n",
    "[problem]\nk = 1, 2\n",
    "[problem]\nsource = 2.5:1\n",
    "[discretization]\nkinds = pal, abc\n",
    "[discretization]\ndegrees = 1, 4\n",
    "not a config",
])
def test_waveguide_rejects(text):
    with pytest.raises(ConfigError):
        parse_config(text, "waveguide_compare")


def test_scatter_checks():
    with pytest.raises(ConfigError):
        parse_config("[discretization]\nreference_degree = 15\n", "scatter2d")
    with pytest.raises(ConfigError):
        parse_config("[discretization]\nsectors = 2\n", "scatter2d")
    with pytest.raises(ConfigError):
        parse_config("[medium]\nrefraction = lumpy\n", "scatter2d")


def test_circular_needs_per_k_entries():
    with pytest.raises(ConfigError):
        parse_config("[problem]\nk = 70\n", "circular_compare")
    cfg = parse_config("[problem]\nk = 70\n[discretization]\nkinds = pal\ninterior_degree = 120\nmodes = auto\n",
                       "circular_compare")
    assert cfg["problem"]["k"] == [70.0]
    with pytest.raises(ConfigError):
        parse_config("[problem]\nr1 = 3\n", "circular_compare")


def test_inline_comments_and_case(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[problem]\nk = 12  # wavenumber\n")
    assert load_config(p, "waveguide_compare")["problem"]["k"] == 12.0
    with pytest.raises(ConfigError):
        parse_config("[problem]\nK = 12\n", "waveguide_compare")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini", "waveguide_compare")


def test_unknown_experiment():
    with pytest.raises(ConfigError):
        parse_config("", "nope")
