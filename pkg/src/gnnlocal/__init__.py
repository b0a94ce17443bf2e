"""Message-passing graph neural networks viewed as distributed algorithms.

Subpackages and modules:

* ``graph``, ``catalog``, ``bits``: attributed graphs, named families, bit codecs
* ``oracles``: brute-force solvers used as ground truth
* ``local``: synchronous LOCAL / CONGEST simulator
* ``engine``: exact fixed-precision message-passing networks and the
  network/algorithm translations
* ``train``: trainable GIN networks, attribute schemes, WL refinement
* ``lowerbound``: two-party lower-bound graph families and datasets
* ``experiments``, ``cli``: grid search and the command line
"""
from .graph import AttributedGraph, SubgraphIndicator, build_graph

__version__ = "0.1.0"
__all__ = ["AttributedGraph", "SubgraphIndicator", "build_graph", "__version__"]
