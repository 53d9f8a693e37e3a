"""policymc: train RL policies on PRISM-subset MDPs and model-check them."""

__version__ = "0.1.0"

from .prism import parse_model, SymbolicModel  # noqa: F401
