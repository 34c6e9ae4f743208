import cmath

import numpy as np
import pytest

from cgl.config import ConfigError, load_config, parse_complex, parse_config
from cgl.grid import Field, Grid, write_snapshot
from cgl.rng import Rng

GOLDEN = """
# comment line
model.theta = 0.3
model.m = 0.5
model.p = 3
model.a = 0.9-0.4i
model.b = 0.5
model.gamma = 0.1
kernel.epsilon = 1e-4
kernel.M = 100
grid.dim = 1
grid.n = 31
grid.length = 2.0
time.tau = 1e-2
time.t_end = 0.5
time.snapshot_every = 5
init.kind = modal
init.k = 2
init.amplitude = 1+0.5i
forcing.kind = modal
forcing.k = 1
forcing.amplitude = 0.2
forcing.profile = exponential
forcing.rate = -0.5
output.ledger = my_ledger.csv
seed = 17
"""


class TestParseComplex:
    @pytest.mark.parametrize("text,value", [
        ("2", 2.0), ("-2.5", -2.5), ("i", 1j), ("-i", -1j), ("0.3i", 0.3j),
        ("1+2i", 1 + 2j), ("1-2i", 1 - 2j), ("1.0e-3+2e4i", 1e-3 + 2e4j),
        (" 1 + 2i ", 1 + 2j),
    ])
    def test_literals(self, text, value):
        assert parse_complex(text) == value

    @pytest.mark.parametrize("text", ["abc", "1+2x", "", "inf"])
    def test_rejects_garbage(self, text):
        with pytest.raises(ConfigError):
            parse_complex(text)


class TestParseConfig:
    def test_golden_roundtrip(self):
        cfg = parse_config(GOLDEN)
        assert cfg.model.theta == 0.3 and cfg.model.a == 0.9 - 0.4j
        assert cfg.kernel.epsilon == 1e-4 and cfg.kernel.M == 100
        assert cfg.grid == Grid(1, 31, length=2.0)
        assert cfg.time.tau == 1e-2 and cfg.time.steps == 50
        assert cfg.forcing.kind == "modal" and cfg.forcing.rate == -0.5
        assert cfg.outputs == {"ledger": "my_ledger.csv"}
        assert cfg.seed == 17
        spec = cfg.operator_spec()
        u0 = cfg.initial_field()
        assert u0.grid == spec.grid

    def test_epsilon_defaults(self):
        base = "model.theta = 0\nmodel.m = {m}\nmodel.p = 3\nmodel.a = 1\n" \
               "grid.n = 8\ntime.tau = 0.1\ntime.t_end = 1\n"
        assert parse_config(base.format(m=0.5)).kernel.epsilon == 1e-8
        assert parse_config(base.format(m=1)).kernel.epsilon == 0.0
        with pytest.raises(ConfigError):
            parse_config(base.format(m=0))

    def test_a_ray_lands_exactly_on_the_cone(self):
        text = "model.theta = 0.9\nmodel.m = 0\nmodel.p = 3\nmodel.a_ray = 1.7\n" \
               "kernel.epsilon = 1e-6\ngrid.n = 8\ntime.tau = 0.1\ntime.t_end = 1\n"
        cfg = parse_config(text)
        assert (cfg.model.a * cmath.exp(0.9j)).imag == 0.0
        cfg.operator_spec()

    def test_a_and_a_ray_conflict(self):
        text = "model.theta = 0\nmodel.m = 0\nmodel.p = 3\nmodel.a = 1\n" \
               "model.a_ray = 1\nkernel.epsilon = 1e-6\ngrid.n = 8\n" \
               "time.tau = 0.1\ntime.t_end = 1\n"
        with pytest.raises(ConfigError):
            parse_config(text)

    @pytest.mark.parametrize("mutation,message", [
        ("model.theta = 0.3\nmodel.theta = 0.4", "duplicate"),
        ("model.theta 0.3", "expected"),
        ("model.theta = 0.3\nunknown.key = 1", "unknown"),
    ])
    def test_malformed_inputs(self, mutation, message):
        text = GOLDEN.replace("model.theta = 0.3", mutation)
        with pytest.raises(ConfigError, match=message):
            parse_config(text)

    def test_missing_required_key(self):
        with pytest.raises(ConfigError, match="model.p"):
            parse_config("model.theta = 0\nmodel.m = 1\nmodel.a = 1\n"
                         "grid.n = 8\ntime.tau = 0.1\ntime.t_end = 1\n")

    def test_init_kinds(self, tmp_path):
        base = GOLDEN.replace("init.kind = modal\ninit.k = 2\ninit.amplitude = 1+0.5i",
                              "init.kind = {spec}")
        cfg = parse_config(base.format(spec="zero"))
        assert np.all(cfg.initial_field().values == 0)
        cfg = parse_config(base.format(spec="random\ninit.scale = 0.5"))
        u1, u2 = cfg.initial_field(), cfg.initial_field()
        np.testing.assert_array_equal(u1.values, u2.values)  # seeded
        snap = tmp_path / "u0.cglf"
        write_snapshot(Field(Rng(1).complex_box(31), Grid(1, 31, length=2.0)), snap)
        cfg = parse_config(base.format(spec=f"file\ninit.path = {snap}"))
        assert cfg.initial_field().grid == Grid(1, 31, length=2.0)
        with pytest.raises(ConfigError):
            parse_config(base.format(spec="file"))

    def test_forcing_samples_list(self):
        text = GOLDEN.replace("forcing.profile = exponential\nforcing.rate = -0.5",
                              "forcing.profile = samples\nforcing.samples = 1,0.5,0.25")
        cfg = parse_config(text)
        assert cfg.forcing.samples == (1.0, 0.5, 0.25)

    def test_mode_index_pair(self):
        text = GOLDEN.replace("grid.dim = 1", "grid.dim = 2") \
                     .replace("grid.n = 31", "grid.n = 8") \
                     .replace("init.k = 2", "init.k = 2,3")
        cfg = parse_config(text)
        assert cfg.init_k == (2, 3)
        assert cfg.initial_field().grid.size == 64

    def test_load_config_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.cfg")
