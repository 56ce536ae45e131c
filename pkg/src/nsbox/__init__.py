"""Exact toolkit for bipartite no-signaling behaviours and their nonlocality."""

from .core import (
    Behaviour,
    Setting,
    deterministic_point,
    from_json,
    isotropic,
    marginals,
    mix,
    parse_catalog,
    pr_box,
    uniform,
    validate,
)
from .errors import NsboxError
from .localset import BellFunctional, Local, Nonlocal, is_local, local_decomposition
from .wccpi import LocalWiring, apply_wiring, compare

__version__ = "0.1.0"
