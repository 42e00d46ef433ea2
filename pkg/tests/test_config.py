from config import BranchConfig, FactoryConfig, GlobalConfig, ProdConfig, get_config


def test_stage_selects_config(monkeypatch):
    monkeypatch.delenv("LOG_LEVEL", raising=False)
    assert isinstance(FactoryConfig("dev")(), BranchConfig)
    prod = FactoryConfig("prod")()
    assert isinstance(prod, ProdConfig)
    assert prod.LOG_LEVEL == "ERROR"


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("MAX_GENERATED_RUNS", "50")
    assert GlobalConfig().MAX_GENERATED_RUNS == 50


def test_config_is_cached():
    assert get_config() is get_config()
    assert get_config().APP_NAME == "ck-checker"
    assert not hasattr(get_config(), "full_name")
