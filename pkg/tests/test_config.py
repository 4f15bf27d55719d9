import math

import pytest

from ringhom import ConfigError, parse_config
from ringhom.config import (
    DEFAULT_GAMMAS,
    DEFAULT_LEVELS,
    AxisSpec,
    config_from_mapping,
)

MINIMAL = """\
chain:
  rings:
    - tau: 0.4142
"""


class TestDefaults:
    def test_minimal_document_gets_all_defaults(self):
        cfg = parse_config(MINIMAL)
        assert cfg.mode == "grid"
        assert len(cfg.rings) == 1
        ring = cfg.rings[0]
        assert ring.tau == 0.4142
        assert ring.theta_offset == 0.0
        assert ring.gamma == 1.0
        assert ring.alpha == 1.0
        assert cfg.bus_phase == 0.0
        assert cfg.input_ports == ("a", "b")
        assert cfg.output_ports == ("a", "b")
        assert cfg.theta == pytest.approx(math.pi)
        assert cfg.tau_axis == AxisSpec(0.005, 0.995, 201)
        assert cfg.theta_axis == AxisSpec(0.0, 2 * math.pi, 201)
        assert cfg.levels == DEFAULT_LEVELS
        assert cfg.gammas == DEFAULT_GAMMAS
        assert cfg.output_dir == "out"
        assert cfg.plot is True
        assert cfg.plot_format == "svg"
        assert cfg.threads == 1

    def test_empty_document_misses_ring_list(self):
        with pytest.raises(ConfigError) as err:
            parse_config("")
        assert "chain.rings" in str(err.value)

    def test_detuned_pair_document(self):
        cfg = parse_config(
            """
            mode: grid
            chain:
              rings:
                - {gamma: 0.99}
                - {gamma: 0.99, theta_offset: 0.7853981633974483}
            """
        )
        assert len(cfg.rings) == 2
        assert cfg.rings[1].theta_offset == pytest.approx(math.pi / 4)
        assert all(r.gamma == 0.99 for r in cfg.rings)


class TestValidation:
    def test_out_of_range_gamma_names_the_key(self):
        with pytest.raises(ConfigError) as err:
            parse_config("chain:\n  rings:\n    - gamma: 1.5\n")
        assert err.value.key == "chain.rings[0].gamma"

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError) as err:
            parse_config(MINIMAL + "wavelength: 1550\n")
        assert err.value.key == "wavelength"

    def test_unknown_nested_key(self):
        with pytest.raises(ConfigError) as err:
            parse_config("chain:\n  rings:\n    - tau: 0.5\n      radius: 10\n")
        assert err.value.key == "chain.rings[0].radius"

    def test_axis_count_too_small(self):
        with pytest.raises(ConfigError) as err:
            parse_config(MINIMAL + "axes:\n  tau: {count: 1}\n")
        assert err.value.key == "axes.tau.count"

    def test_axis_min_not_below_max(self):
        with pytest.raises(ConfigError):
            parse_config(MINIMAL + "axes:\n  theta: {min: 2.0, max: 1.0}\n")

    def test_tau_axis_outside_unit_interval(self):
        with pytest.raises(ConfigError):
            parse_config(MINIMAL + "axes:\n  tau: {min: 0.0, max: 1.5}\n")

    def test_levels_must_ascend_within_unit_interval(self):
        with pytest.raises(ConfigError):
            parse_config(MINIMAL + "levels: [0.05, 0.001]\n")
        with pytest.raises(ConfigError):
            parse_config(MINIMAL + "levels: [0.0, 0.5]\n")

    def test_unknown_mode(self):
        with pytest.raises(ConfigError) as err:
            parse_config(MINIMAL + "mode: scan\n")
        assert err.value.key == "mode"

    def test_ports_must_be_known_and_distinct(self):
        with pytest.raises(ConfigError):
            parse_config(MINIMAL + "ports: {input: ae}\n")
        with pytest.raises(ConfigError):
            parse_config(MINIMAL + "ports: {input: aa}\n")

    def test_port_string_shorthand(self):
        cfg = parse_config(MINIMAL + "ports: {input: cd, output: ab}\n")
        assert cfg.input_ports == ("c", "d")
        assert cfg.output_ports == ("a", "b")

    def test_threads_positive_integer(self):
        with pytest.raises(ConfigError):
            parse_config(MINIMAL + "threads: 0\n")
        with pytest.raises(ConfigError):
            parse_config(MINIMAL + "threads: 1.5\n")

    def test_plot_format_restricted(self):
        with pytest.raises(ConfigError):
            parse_config(MINIMAL + "output: {plot_format: pdf}\n")

    def test_yaml_error_reports_line(self):
        with pytest.raises(ConfigError) as err:
            parse_config("chain:\n  rings: [\n")
        assert "line" in str(err.value)

    def test_gamma_sweep_bounds(self):
        with pytest.raises(ConfigError) as err:
            parse_config(MINIMAL + "gammas: [0.5, 1.2]\n")
        assert err.value.key == "gammas[1]"


class TestModeRequirements:
    def test_spectrum_defaults_to_single_ports(self):
        cfg = parse_config("mode: spectrum\nchain:\n  rings:\n    - tau: 0.95\n")
        assert cfg.input_ports == ("a",)
        assert cfg.output_ports == ("a",)

    def test_spectrum_rejects_port_pairs(self):
        with pytest.raises(ConfigError):
            parse_config(
                "mode: spectrum\nchain:\n  rings:\n    - tau: 0.95\nports: {input: ab}\n"
            )

    def test_pair_modes_reject_single_port(self):
        with pytest.raises(ConfigError):
            parse_config(MINIMAL + "ports: {input: a}\n")

    @pytest.mark.parametrize("mode", ["spectrum", "distribution"])
    def test_fixed_device_modes_need_ring_tau(self, mode):
        with pytest.raises(ConfigError) as err:
            parse_config(f"mode: {mode}\nchain:\n  rings:\n    - gamma: 0.9\n")
        assert "tau" in str(err.value)

    def test_scan_modes_do_not_need_ring_tau(self):
        cfg = parse_config("mode: slice\nchain:\n  rings:\n    - gamma: 0.9\n")
        assert cfg.rings[0].tau is None


class TestRoundTrip:
    def test_mapping_round_trip_is_identity(self):
        cfg = parse_config(
            """
            mode: alt-io
            chain:
              bus_phase: 0.25
              rings:
                - {tau: 0.6, gamma: 0.9, alpha: 0.95, theta_offset: 0.1}
                - {gamma: 0.8}
            ports: {input: ab, output: cd}
            theta: 3.0
            axes:
              tau: {min: 0.1, max: 0.9, count: 11}
              theta: {min: 0.0, max: 6.0, count: 7}
            levels: [0.001, 0.05, 0.2]
            gammas: [0.1, 0.9]
            output: {directory: results, plot: false, plot_format: png}
            threads: 3
            """
        )
        assert config_from_mapping(cfg.to_mapping()) == cfg

    def test_defaults_round_trip(self):
        cfg = parse_config(MINIMAL)
        assert config_from_mapping(cfg.to_mapping()) == cfg
