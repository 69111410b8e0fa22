"""Derivations on AF algebras: commutator-small unitary homotopies, inductive-limit
constructions with Hamiltonian ladders, and finite-level obstruction certificates."""

__version__ = "0.1.0"
