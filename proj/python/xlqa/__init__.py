"""Cross-lingual extractive QA toolkit.

Thin python surface over the C++ core: tokenization and BPE vocabularies,
IBM-1 word alignment, a small trainable encoder with exact gradients,
alignment fine-tuning, QA task-tuning/prediction and the evaluation and
significance metrics.
"""

from xlqa._core import *  # noqa: F401,F403
from xlqa._core import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
