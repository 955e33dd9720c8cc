"""Exact interval exchange transformations, Rauzy-Veech induction and
rigidity certificates for the skew product over a symmetric IET."""
