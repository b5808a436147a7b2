"""Tests for reading and validating configuration files."""

import pytest

from pevade.command.helper.helper_methods import deep_update
from pevade.config import (
    ConfigError,
    get_default_configuration,
    load_configuration,
    parse_lines,
    read_configuration
)


class TestDefaults:
    def test_every_section_is_filled(self):
        config = get_default_configuration()
        assert set(config) == {"corpus", "detector", "train", "attack", "output", "run"}
        assert config["output"]["dir"] == "pevade-output"
        assert config["attack"]["epsilon"] == 4096
        assert config["attack"]["lambda"] == 1e-6
        assert config["attack"]["optimizer"] == "iterative_gradient"
        assert config["train"]["learning_rate"] is None
        assert config["run"] == {"seed": 0, "jobs": 1}

    def test_no_file(self):
        assert load_configuration() == get_default_configuration()


class TestParseLines:
    def test_comments_and_blank_lines(self):
        values, lines = parse_lines("# campaign\n\nattack.epsilon = 512\n  run.seed=4  \n")
        assert values == {"attack": {"epsilon": "512"}, "run": {"seed": "4"}}
        assert lines == {"attack.epsilon": 3, "run.seed": 4}

    def test_value_may_contain_equal_signs(self):
        values, _ = parse_lines("detector.command = scanner --mode=json")
        assert values["detector"]["command"] == "scanner --mode=json"

    @pytest.mark.parametrize("text, message", [
        ("attack.epsilon", "cfg:1: expected section.key = value"),
        ("epsilon = 3", "cfg:1: expected section.key = value"),
        ("\nattack.speed = 3", "cfg:2: unknown setting attack.speed"),
        ("network.url = x", "cfg:1: unknown setting network.url"),
        ("run.seed = 1\nrun.seed = 2", "cfg:2: run.seed is already set on line 1"),
    ])
    def test_invalid_lines(self, text, message):
        with pytest.raises(ConfigError, match=message):
            parse_lines(text, "cfg")


class TestReadConfiguration:
    def test_values_are_typed(self):
        config = read_configuration("attack.epsilon = 512\nattack.lambda = 0.5\ntrain.learning_rate = 0.01\n"
                                    "detector.kind = feature")
        assert config["attack"]["epsilon"] == 512
        assert config["attack"]["lambda"] == 0.5
        assert config["train"]["learning_rate"] == 0.01
        assert config["detector"]["kind"] == "feature"
        assert config["attack"]["max_queries"] == 500

    @pytest.mark.parametrize("text, message", [
        ("run.seed = 1\nattack.epsilon = -1", "cfg:2: attack.epsilon"),
        ("attack.population = 1", "cfg:1: attack.population"),
        ("detector.threshold = 1.5", "cfg:1: detector.threshold"),
        ("attack.optimizer = annealing", "cfg:1: attack.optimizer"),
        ("train.epochs = many", "cfg:1: train.epochs"),
        ("train.n_trees = 51", "cfg:1: train.n_trees"),
        ("train.depth = 4", "cfg:1: train.depth"),
        ("train.depth = 0", "cfg:1: train.depth"),
    ])
    def test_invalid_values(self, text, message):
        with pytest.raises(ConfigError, match=message):
            read_configuration(text, "cfg")

    def test_missing_path(self, tmp_path):
        with pytest.raises(ConfigError, match="corpus.manifest"):
            read_configuration(f"corpus.manifest = {tmp_path / 'manifest.csv'}")

    def test_existing_path(self, tmp_path):
        manifest = tmp_path / "manifest.csv"
        manifest.write_text("path,label\n")
        assert read_configuration(f"corpus.manifest = {manifest}")["corpus"]["manifest"] == str(manifest)

    def test_overrides(self):
        config = read_configuration("run.seed = 1\nrun.jobs = 2", overrides={"run": {"seed": 9},
                                                                           "output": {"dir": "elsewhere"}})
        assert config["run"] == {"seed": 9, "jobs": 2}
        assert config["output"]["dir"] == "elsewhere"


class TestLoadConfiguration:
    def test_file(self, tmp_path):
        path = tmp_path / "campaign.cfg"
        path.write_text("attack.optimizer = gamma\nattack.population = 10\n", encoding="utf-8")
        config = load_configuration(str(path))
        assert config["attack"]["optimizer"] == "gamma"
        assert config["attack"]["population"] == 10

    def test_errors_name_the_file(self, tmp_path):
        path = tmp_path / "campaign.cfg"
        path.write_text("attack.max_queries = -5\n", encoding="utf-8")
        with pytest.raises(ConfigError, match=f"{path}:1"):
            load_configuration(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="Can't read configuration file"):
            load_configuration(str(tmp_path / "none.cfg"))


def test_deep_update():
    source = {"attack": {"epsilon": 1, "seed": 2}, "run": {"jobs": 1}}
    assert deep_update(source, {"attack": {"epsilon": 5}, "output": {"dir": "x"}}) == {
        "attack": {"epsilon": 5, "seed": 2}, "run": {"jobs": 1}, "output": {"dir": "x"}}
