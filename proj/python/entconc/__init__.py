# SPDX-License-Identifier: Apache-2.0
"""Concentration bounds for discrete-entropy log-likelihoods."""

from ._core import *  # noqa: F401,F403
from ._core import __version__, BlockCode, Error, InvalidArgument, DomainError, Infeasible  # noqa: F401
