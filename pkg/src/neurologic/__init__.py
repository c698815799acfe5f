"""Rule extraction from neural networks.

Pipeline: collect layer activations, mine purity-thresholded hidden
predicates per class, build/distill DNF rule models, and ground predicates
back to the input space (symbolic expressions for tabular data, causal
keyword/template pairs for text).
"""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
