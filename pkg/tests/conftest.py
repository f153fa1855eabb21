import pytest

from newsflow import _kernels

_FUNCS = ("ci_values", "ci_removal", "gc_trajectory", "largest_component", "wcc_labels", "loess")


@pytest.fixture(params=sorted(_kernels.available_backends()))
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    mod = _kernels.available_backends()[request.param]
    for name in _FUNCS:
        monkeypatch.setattr(_kernels, name, getattr(mod, name))
    monkeypatch.setattr(_kernels, "BACKEND", request.param)
    return request.param
