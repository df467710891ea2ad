"""Phonology-driven phone embeddings for multilingual acoustic modeling.

The package joins top-down phone embeddings computed from 51-bit
phonological-vectors with a bottom-up acoustic encoder to form phone
posteriors, trains them under exact CTC or CTC-CRF losses, and measures
multilingual, zero-shot and few-shot crosslingual behavior on synthetic
corpora.
"""

__version__ = "0.1.0"
