from pathlib import Path

import pytest

from coordsynth.enhancement import EnhancementSpec, apply_enhancement
from coordsynth.formats import read_buchi, read_lts
from coordsynth.msc import parse_msc
from coordsynth.synthesis import synthesize
from coordsynth.system import Component, SystemModel

EXAMPLE = Path(__file__).resolve().parents[1] / "src" / "coordsynth" / "data" / "example"


@pytest.fixture(scope="session")
def example_dir():
    return EXAMPLE


@pytest.fixture(scope="session")
def components():
    return (Component("Client1", read_lts(EXAMPLE / "Client1.lts"), 1),
            Component("Client2", read_lts(EXAMPLE / "Client2.lts"), 2),
            Component("Server", read_lts(EXAMPLE / "Server.lts"), 3))


@pytest.fixture(scope="session")
def alternating():
    return read_buchi(EXAMPLE / "AlternatingProtocol.buchi")


@pytest.fixture(scope="session")
def cfa(components):
    return SystemModel(components)


@pytest.fixture(scope="session")
def cba(cfa, alternating):
    return synthesize(cfa, [alternating])


@pytest.fixture(scope="session")
def retry_doc():
    return parse_msc((EXAMPLE / "RETRY.msc").read_text(), source="RETRY.msc")


@pytest.fixture(scope="session")
def retry(cba, retry_doc, alternating):
    return apply_enhancement(cba, EnhancementSpec(retry_doc, "WR", {1}, name="RETRY"),
                             [alternating])
