"""Streaming spammer detection with online linear learners.

Subpackages: ``learners`` (the sixteen update rules and a brute-force
projection oracle), ``features`` (account feature sets), ``harness``
(prequential experiments and reports). ``stream``, ``baseline`` and ``rng``
hold the example streams, batch baselines and the seeded generator.
"""

__version__ = "0.1.0"
