"""Bundled Tennessee Eastman fixtures."""

from importlib import resources

from ..encoding import Scenario, load_scenario
from ..stpa import StpaCatalog, load_catalog

TE_SCENARIO = "te_scenario.json"
TE_CATALOG = "te_catalog.json"


def read_text(name: str) -> str:
    return resources.files(__name__).joinpath(name).read_text(encoding="utf-8")


def te_scenario() -> Scenario:
    return load_scenario(read_text(TE_SCENARIO))


def te_catalog() -> StpaCatalog:
    return load_catalog(read_text(TE_CATALOG))
