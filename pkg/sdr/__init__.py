"""
Stochastic Douglas-Rachford
Constant-step stochastic DR splitting, proximity operators and experiment harness
"""

__version__ = "1.0.0"
