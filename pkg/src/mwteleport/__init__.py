"""Noise budgets, Gaussian simulation, and Fock-space repeater numerics
for continuous-variable teleportation of propagating microwaves."""

__version__ = "0.1.0"
