"""Finite poc sets and median algebras."""
