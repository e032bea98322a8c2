import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rtlic.cfg import build_cfg_set  # noqa: E402
from rtlic.frontend import SourceDesign, elaborate, load_design, parse_design  # noqa: E402

ROOT = Path(__file__).resolve().parent.parent
RAM = ROOT / "src" / "rtlic" / "designs" / "ram.v"
DESIGNS = Path(__file__).parent / "designs"


def design_from_text(text, overrides=None):
    return elaborate(parse_design(SourceDesign.from_text(text)), overrides)


@pytest.fixture(scope="session")
def ram_path():
    return str(RAM)


@pytest.fixture(scope="session")
def ram():
    return load_design(RAM)


@pytest.fixture(scope="session")
def ram_cfg(ram):
    return build_cfg_set(ram)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
