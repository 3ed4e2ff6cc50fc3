"""qsurrogate: exact few-qubit simulation, trained attention surrogates,
block-decomposed 3-qubit extension, and diagonal-readout tomography."""

from . import bench, codec, datagen, extend3q, qcore, surrogate, tomo

__version__ = "0.1.0"

__all__ = ["bench", "codec", "datagen", "extend3q", "qcore", "surrogate", "tomo", "__version__"]
