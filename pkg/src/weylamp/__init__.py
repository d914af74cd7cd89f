"""Certified constructive objects behind the remainder-term Weyl law:
dual-torus invariant rings, p-adic and archimedean Plancherel densities,
Hecke amplifiers with machine-checkable certificates, and the Weyl-law
main-term and remainder envelopes."""

from weylamp.rootdata import RootDatum, Weight, build_root_datum, parse_group

__version__ = "0.1.0"

__all__ = ["RootDatum", "Weight", "build_root_datum", "parse_group", "__version__"]
