"""Equilibrium analysis of voting with and without vote delegation.

Modules: :mod:`model` (instances), :mod:`engine` (outcome probabilities),
:mod:`weights` (log-likelihood weights), :mod:`equilibrium` (best responses,
dominance, iterated elimination), :mod:`neutral` (neutral profiles and
weighted constructions), :mod:`dominance` (dominance-solvability suites),
:mod:`incomplete` (threshold strategies under type uncertainty),
:mod:`scenario`, :mod:`golden` and :mod:`cli`.
"""
__version__ = "0.1.0"
