"""Domination numbers of 2-designs and their incidence graphs."""

__version__ = '1.0.0'
