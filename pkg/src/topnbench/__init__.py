"""topnbench: benchmark workbench for top-n selection strategies.

Trains collaborative-filtering recommenders on interaction data and
exhaustively evaluates every way of selecting n items from the top-K
predictions under nDCG@n and Precision@n, including rank-based
significance tests and validation-to-test generalization analysis.
"""

__version__ = "0.1.0"
