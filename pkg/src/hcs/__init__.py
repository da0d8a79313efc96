"""Herbrand consistency search: grounding first-order sentences to SAT,
compiling search problems into HCS instances and reducing between them."""

__version__ = "0.1.0"
