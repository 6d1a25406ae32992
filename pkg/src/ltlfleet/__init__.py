"""Multi-robot LTL task planning, simulation and online replanning."""

__version__ = "0.1.0"
