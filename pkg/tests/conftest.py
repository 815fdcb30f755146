import pytest


@pytest.fixture
def report(request, capsys):
    """Print one verdict line per acceptance criterion, even under capture."""
    def emit(label: str, ok: bool, detail: str = "") -> None:
        with capsys.disabled():
            print(f"\n[{label}] {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    return emit
