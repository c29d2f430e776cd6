"""Exact verification toolkit for Lubin-Tate groups, the multivariable ring A
and explicit etale (phi, O_K^x)-modules attached to semisimple mod p
representations."""

__version__ = "0.1.0"
