from pathlib import Path

import numpy as np
import pytest

from opcontrol.config import (
    KNOWN_B_PRESETS,
    PRESETS,
    ExperimentConfig,
    dump_config,
    load_config,
    parse_config,
    preset,
)
from opcontrol.errors import ConfigError

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def same_config(a: ExperimentConfig, b: ExperimentConfig):
    for name in ExperimentConfig.__dataclass_fields__:
        x, y = getattr(a, name), getattr(b, name)
        if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
            assert np.array_equal(np.asarray(x), np.asarray(y)), name
        elif isinstance(x, tuple) or isinstance(y, tuple):
            assert tuple(x) == tuple(y), name
        else:
            assert x == y, name


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_dump_parse_round_trip(name):
    cfg = preset(name)
    same_config(parse_config(dump_config(cfg)), cfg)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_shipped_config_files_match_presets(name):
    same_config(load_config(CONFIG_DIR / f"{name}.ini"), preset(name))


def test_preset_settings():
    assert KNOWN_B_PRESETS == ("tp1_damped", "tp1_constant", "tp2_damped", "tp2_constant")
    c = preset("tp1_constant")
    assert (c.dt, c.steps, c.mc_K, c.iterations, c.lr) == (0.1, 500, 100, 150, 1e-3)
    assert c.c == (0.1, 0.1, -0.01, 0.01)
    d = preset("tp1_damped")
    assert (d.k, d.iterations, d.lr) == (0.01, 200, 2e-2)
    t = preset("tp2_damped")
    assert (t.eps, t.iterations, t.lr) == (10.0, 300, 2e-2)
    assert t.unresolved_sigma() == pytest.approx(1 / np.sqrt(10))
    assert preset("unknown_b1").iterations == 300
    assert preset("unknown_b2").iterations == 400
    assert all(preset(n).n_gen_count == 1000 for n in PRESETS)


def test_defaults_fill_missing_sections():
    cfg = parse_config("[system]\nname = tp1\n")
    assert cfg.control == "constant" and cfg.mode == "known_b" and cfg.steps == 500


def test_with_seed_overrides_every_stream():
    cfg = preset("tp1_constant").with_seed(7)
    assert (cfg.measure_seed, cfg.mc_seed, cfg.opc_seed) == (7, 7, 7)


@pytest.mark.parametrize("text, where", [
    ("[grid]\ndt = -0.1\n", "[grid] dt"),
    ("[grid]\nsteps = 1\n", "[grid] steps"),
    ("[grid]\ndt = fast\n", "[grid] dt"),
    ("[system]\nname = tp3\n", "[system] name"),
    ("[control]\nkind = constant\nc = 1, 2\n", "[control] c"),
    ("[control]\nkind = wobble\n", "[control] kind"),
    ("[init]\nx0 = 1, 2, 3\n", "[init] x0"),
    ("[mc]\nK = 0\n", "[mc] K"),
    ("[opc]\nlr = 0\n", "[opc] lr"),
    ("[opc]\nmode = unknown_b\n", "[opc] mode"),
    ("[control]\nkind = linear\nmatrix = 1, 0; 0, 1\nselector = 0, 1\n", "[control] matrix"),
])
def test_invalid_values_name_their_location(text, where):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    msg = str(info.value)
    assert where in msg and "\n" not in msg


def test_missing_file_and_bad_syntax(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.ini")
    with pytest.raises(ConfigError):
        parse_config("no section header\n")
    with pytest.raises(ConfigError, match="unknown preset"):
        preset("tp9")
