"""Printed French word OCR: projection-profile preprocessing, a
bidirectional peephole LSTM trained with CTC, and a multi-font experiment
harness."""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
