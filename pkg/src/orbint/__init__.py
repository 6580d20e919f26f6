"""Exact computation of orbital-integral expansions and Shalika germs for
split reductive groups over a local function field."""

__version__ = "0.1.0"
