"""Gain synthesis and simulation for tripartite and sign consensus on signed
networks split into three clusters."""
from .network import (ALL_LABELINGS, Labeling, NetworkFormatError, SignedNetwork,
                      check_close_friendship, enumerate_admissible_labelings,
                      example_network, load_network, parse_network, validate)
from .signcons import SignConfig, synthesize_sign
from .simulate import classify, integrate
from .tripartite import TripartiteConfig, synthesize_tripartite

__all__ = [
    "ALL_LABELINGS", "Labeling", "NetworkFormatError", "SignedNetwork",
    "check_close_friendship", "enumerate_admissible_labelings", "example_network",
    "load_network", "parse_network", "validate", "SignConfig", "synthesize_sign",
    "classify", "integrate", "TripartiteConfig", "synthesize_tripartite",
]
