import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lealba.signature import bundled_signature  # noqa: E402


@pytest.fixture(scope="session")
def sigs():
    return {name: bundled_signature(name).expand() for name in ("lml", "dml", "lambek", "lg")}


@pytest.fixture
def report(capsys):
    """Print one PASS/FAIL line, then assert."""

    def emit(label: str, ok: bool, detail: str = "") -> None:
        with capsys.disabled():
            tail = f"  ({detail})" if detail else ""
            print(f"\n{'PASS' if ok else 'FAIL'}: {label}{tail}")
        assert ok, f"{label}{tail}"

    return emit
