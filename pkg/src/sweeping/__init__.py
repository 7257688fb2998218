"""Catching-up solvers and verification tools for perturbed sweeping processes."""
