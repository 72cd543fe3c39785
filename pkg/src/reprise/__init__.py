"""Melody compression with typed combinator programs.

The package turns symbolic melodies into short typed-combinator programs
under joint limits on description length (bits) and search effort
(number of candidate programs), optionally reusing a Pitman-Yor cache of
previously successful subprograms. `experiments` and `pid` provide the
sweep harness and the synergy-based curriculum builder; `cli` ties
everything together.
"""

__version__ = "0.1.0"
