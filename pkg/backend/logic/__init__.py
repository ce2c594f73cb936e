"""
Simulation logic: model evaluation, solvers, network generation and experiments.
"""
