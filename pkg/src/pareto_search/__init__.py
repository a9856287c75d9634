"""Pareto-optimal consistency/robustness tradeoffs for search games with a prediction.

Modules: ``core`` (instances, curves), ``matrix_game`` (LP oracle),
``box_perfect`` and ``box_imperfect`` (box search), ``line_search``
(search on the line), ``montecarlo`` (simulation), ``verify`` and ``cli``.
"""

__version__ = "0.1.0"
