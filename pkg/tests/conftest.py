import numpy as np
import pytest

from latentpack import _accel

_ACCEPTANCE = []


def record_acceptance(number, name, passed, detail):
    _ACCEPTANCE.append((number, name, passed, detail))
    status = "PASS" if passed is True else ("INFO" if passed is None else "FAIL")
    print(f"criterion {number} [{status}] {name}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(_ACCEPTANCE):
        status = "PASS" if passed is True else ("INFO" if passed is None else "FAIL")
        terminalreporter.write_line(f"criterion {number} [{status}] {name}: {detail}")


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile (or load cached) numba kernels once so timing tests measure the codec."""
    from latentpack import CompressorConfig, Consecutive, Lookback, NumberKind, compress_array, decompress_array
    from latentpack.modes import IntMult

    x = np.arange(2000, dtype=np.uint64) * 3
    for delta in (Consecutive(1), Lookback(8)):
        for kind in (NumberKind.U64, NumberKind.U32):
            blob = compress_array(x.astype(kind.dtype), kind, CompressorConfig(mode=IntMult(3), delta=delta))
            decompress_array(blob)
    yield


@pytest.fixture(params=_accel.BACKENDS)
def backend(request):
    with _accel.use_backend(request.param):
        yield request.param
