"""Amortized Bayesian-style hyper-parameter tuning.

Randomized weighted objectives, closed-form weighted ridge with GCV,
cross-validation harness, envelope-reweighted quantile regression, trained
generator maps with label-free criterion training, an outer tuning loop with
posterior-style uncertainty summaries, and a desk-scale hypernetwork demo.
"""

__version__ = "0.1.0"
