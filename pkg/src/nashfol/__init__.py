"""Exact Nash-limit computations for polynomial foliations and algebroids."""

__version__ = "0.1.0"
