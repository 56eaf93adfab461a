"""Exact Weingarten calculus, tensor diagrams, and random quantum channels."""

from .perm import Permutation, build_gamma_delta, cycle_type, distance, mobius
from .weingarten import MonomialSpec, monomial_integral, weingarten_exact, weingarten_table

__all__ = ["Permutation", "build_gamma_delta", "cycle_type", "distance", "mobius",
           "MonomialSpec", "monomial_integral", "weingarten_exact", "weingarten_table"]
__version__ = "0.1.0"
