import pytest

from jobshop_planner.config import ConfigurationError, PlannerConfig, ScenarioConfig, SearchParams


def test_yaml_round_trip(tmp_path):
    cfg = ScenarioConfig.desk(objective="WT_mean", utilization=0.95, rules=["atc", "spt"], seeds=[3, 1])
    cfg.dump(tmp_path / "c.yaml")
    back = ScenarioConfig.load(tmp_path / "c.yaml")
    assert back == cfg
    assert back.content_hash() == cfg.content_hash()


def test_unknown_key_rejected(tmp_path):
    (tmp_path / "c.yaml").write_text("utilization: 0.9\nalhpa: 0.5\n")
    with pytest.raises(ConfigurationError, match="alhpa"):
        ScenarioConfig.load(tmp_path / "c.yaml")


def test_non_mapping_rejected(tmp_path):
    (tmp_path / "c.yaml").write_text("- 1\n- 2\n")
    with pytest.raises(ConfigurationError):
        ScenarioConfig.load(tmp_path / "c.yaml")


def test_empty_file_gives_defaults(tmp_path):
    (tmp_path / "c.yaml").write_text("")
    assert ScenarioConfig.load(tmp_path / "c.yaml") == ScenarioConfig()


def test_hashes():
    a = ScenarioConfig()
    assert a.content_hash() != a.with_overrides(alpha=0.3).content_hash()
    # search settings do not change the arrival stream
    assert a.instance_hash() == a.with_overrides(alpha=0.3, n_mcts=7).instance_hash()
    assert a.instance_hash() != a.with_overrides(utilization=0.95).instance_hash()


@pytest.mark.parametrize("bad", [dict(alpha=1.2), dict(alpha=-0.1), dict(beta=0.0), dict(c=-1.0),
                                 dict(n_mcts=0), dict(selection_criterion="best"), dict(temperature=0.0)])
def test_search_params_validation(bad):
    with pytest.raises(ConfigurationError):
        SearchParams(**bad)
    with pytest.raises(ConfigurationError):
        ScenarioConfig(**bad)


@pytest.mark.parametrize("bad", [dict(objective="makespan"), dict(machine_count=0), dict(measured_jobs=0),
                                 dict(min_ops=5, max_ops=3), dict(modes=["greedy"]), dict(rules=["fifo"])])
def test_scenario_validation(bad):
    with pytest.raises(ConfigurationError):
        ScenarioConfig(**bad)


def test_vanilla_pins_alpha():
    cfg = PlannerConfig(mode="vanilla_mcts", params=SearchParams(alpha=0.2))
    assert cfg.effective_params.alpha == 1.0
    assert PlannerConfig(mode="dyro_mcts", params=SearchParams(alpha=0.2)).effective_params.alpha == 0.2


def test_planner_overrides():
    p = ScenarioConfig(c=2.0).planner("dyro_mcts", "spt", beta=50.0)
    assert (p.params.c, p.params.beta, p.rule) == (2.0, 50.0, "spt")
    with pytest.raises(ConfigurationError):
        PlannerConfig(mode="nope")
