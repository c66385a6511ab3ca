"""Exact covering of lattice simplices by dilations"""
__version__ = "0.1.0"
