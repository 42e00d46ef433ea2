"""Configuration for the checker"""

from functools import lru_cache

from pydantic import BaseSettings, Field


class GlobalConfig(BaseSettings):
    """Global configurations.
    Inspired by
    https://rednafi.github.io/digressions/python/2020/06/03/python-configs.html"""

    APP_NAME: str = "ck-checker"
    STAGE: str = Field("dev", env="STAGE")
    SENTRY_DSN: str = Field("", env="SENTRY_DSN")
    LOG_LEVEL: str = Field("WARNING", env="LOG_LEVEL")

    # groups of size >= 2 are enumerated exhaustively up to this many agents
    MAX_GROUP_AGENTS: int = Field(6, env="MAX_GROUP_AGENTS")

    MUDDY_MAX_CHILDREN_COARSE: int = Field(5, env="MUDDY_MAX_CHILDREN_COARSE")
    MUDDY_MAX_CHILDREN_FINE: int = Field(3, env="MUDDY_MAX_CHILDREN_FINE")
    MAX_GENERATED_RUNS: int = Field(20000, env="MAX_GENERATED_RUNS")

    JSON_INDENT: int = Field(2, env="JSON_INDENT")


class BranchConfig(GlobalConfig):
    """Development configurations."""


class ProdConfig(GlobalConfig):
    """Production configurations."""

    LOG_LEVEL: str = Field("ERROR", env="LOG_LEVEL")


class FactoryConfig:
    """Returns a config instance depending on the STAGE variable."""

    def __init__(self, stage: str | None):
        self.stage = stage

    def __call__(self) -> GlobalConfig:
        if self.stage == "prod":
            return ProdConfig()

        return BranchConfig()


@lru_cache
def get_config() -> GlobalConfig:
    """Retrieve a config instance"""
    return FactoryConfig(GlobalConfig().STAGE)()
