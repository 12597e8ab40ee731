"""Quasifree channels on hybrid quantum-classical phase spaces."""

from . import channel, charfun, fock_oracle, gaussian, kernels, phasespace, protocols
from .channel import QuasifreeChannel, apply, concatenate, make_channel, tensor
from .charfun import CharFn, PositivityError, SamplingPolicy, TwistedPDReport, twisted_pd_check
from .gaussian import GaussianChannel, make_gaussian_channel
from .phasespace import PhaseMap, PhaseSpace, direct_sum, make_hybrid, trivial_space

__version__ = "0.1.0"

__all__ = [
    "CharFn",
    "GaussianChannel",
    "PhaseMap",
    "PhaseSpace",
    "PositivityError",
    "QuasifreeChannel",
    "SamplingPolicy",
    "TwistedPDReport",
    "apply",
    "channel",
    "charfun",
    "concatenate",
    "direct_sum",
    "fock_oracle",
    "gaussian",
    "kernels",
    "make_channel",
    "make_gaussian_channel",
    "make_hybrid",
    "phasespace",
    "protocols",
    "tensor",
    "trivial_space",
    "twisted_pd_check",
]
