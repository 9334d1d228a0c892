import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lcnl import Translator, demo_pack_path, load_pack

# The other language of the two-language demo pack, for corpus-driven tests.
OTHER = {"eng": "fra", "fra": "eng"}


@pytest.fixture(scope="session")
def demo_pack():
    return load_pack(demo_pack_path())


@pytest.fixture(scope="session")
def lg(demo_pack):
    return demo_pack.grammar


@pytest.fixture(scope="session")
def translator(lg):
    return Translator(lg)
