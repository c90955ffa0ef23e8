"""Time reversal of classical Markov chains and quantum channels, with harmonic processes, relative-entropy monotonicity and path-space weights."""

__version__ = "0.1.0"
