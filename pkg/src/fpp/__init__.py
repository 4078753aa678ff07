"""First-passage percolation on Z^d: exact passage times, Monte Carlo estimates
of a(n) = E T(0, n e1), and per-sample checks of the monotonicity coupling."""

__version__ = "0.1.0"
