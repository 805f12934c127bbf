"""Gaussian simulation of storing and retrieving a four-mode CV cluster state in atomic ensembles."""

from .gaussian import (
    GaussianState,
    ModeKind,
    ModeLabel,
    QuadratureCombination,
    QuadratureOrdering,
    SymplecticTransform,
    apply,
    check_symplectic,
    commutator_coefficient,
    embed,
    mode_expansion_oracle,
    vacuum_state,
    variance,
)
from .memory import coefficients, transfer_beam_splitter
from .protocol import ProtocolConfig, Stage, run_protocol

__version__ = "0.1.0"
