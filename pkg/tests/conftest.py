from __future__ import annotations

import numpy as np
import pytest

from motsocr import _kernels
from motsocr.dataset import Corpus, FontSpec, default_fonts


def available_backends():
    backends = [("numpy", _kernels.numpy_ref)]
    try:
        from motsocr._kernels import _core

        backends.append(("cython", _core))
    except ImportError:
        pass
    return backends


@pytest.fixture(params=available_backends(), ids=lambda b: b[0])
def kernel_backend(request):
    return request.param[1]


@pytest.fixture(scope="session")
def fonts() -> tuple[FontSpec, ...]:
    return default_fonts()


@pytest.fixture(scope="session")
def tiny_corpus() -> Corpus:
    return Corpus(("le", "la", "été", "chat", "robe", "lune", "porte", "vert", "mardi", "sous"))


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
