"""Closed-form Fock amplitudes of the pointer inputs and target states.

Every constructor truncates an exact infinite expansion and refuses to return
a state whose discarded tail exceeds ``NORM_TOL`` in squared norm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import TruncationError
from .fock import StateVector, _dim, coherent_guard, squeeze_guard

NORM_TOL = 1e-8

__all__ = [
    "NORM_TOL",
    "PointerInput",
    "coherent_state",
    "squeezed_vacuum",
    "fock",
    "vacuum",
    "spac",
    "spasv",
    "coherent_cutoff",
    "squeezed_cutoff",
]


def _coherent_amps(beta: complex, n: int) -> np.ndarray:
    k = np.arange(n)
    b = abs(beta)
    if b == 0.0:
        out = np.zeros(n, dtype=complex)
        out[0] = 1.0
        return out
    logmag = k * math.log(b) - 0.5 * b * b - 0.5 * gammaln(k + 1)
    return np.exp(logmag) * np.exp(1j * math.atan2(beta.imag, beta.real) * k)


def _squeezed_amps(eta: float, phi: float, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=complex)
    m = np.arange((n + 1) // 2)
    if eta == 0.0:
        out[0] = 1.0
        return out
    t = math.tanh(eta)
    logmag = (
        m * math.log(t)
        + 0.5 * gammaln(2 * m + 1)
        - m * math.log(2.0)
        - gammaln(m + 1)
        - 0.5 * math.log(math.cosh(eta))
    )
    # (-e^{i phi} tanh eta)^m
    out[0::2] = np.exp(logmag) * np.where(m % 2, -1.0, 1.0) * np.exp(1j * phi * m)
    return out


def _checked(amps: np.ndarray, what: str) -> StateVector:
    loss = 1.0 - float(np.vdot(amps, amps).real)
    if abs(loss) > NORM_TOL:
        raise TruncationError(
            f"{what}: truncation discards {loss:.3g} of the norm (limit {NORM_TOL:g}); "
            "increase the cutoff"
        )
    return StateVector.single(amps)


def _require(n: int, need: int, what: str, even: bool = False):
    if n < need or (even and n % 2):
        parity = "an even " if even else ""
        raise TruncationError(f"{what}: cutoff {n} too small, need {parity}cutoff >= {need}")


def coherent_state(beta: complex, space, *, guard: bool = True) -> StateVector:
    """Coherent state ``|beta>`` with ``c_n = beta^n exp(-|beta|^2/2)/sqrt(n!)``.

    ``guard=False`` skips the cutoff formula and keeps only the norm check;
    the idler arms use this because their amplitudes are tiny.
    """
    n = _dim(space)
    beta = complex(beta)
    if guard:
        _require(n, coherent_guard(beta), f"coherent |beta|={abs(beta):.4g}")
    return _checked(_coherent_amps(beta, n), f"coherent |beta|={abs(beta):.4g}")


def squeezed_vacuum(eta: float, phi: float, space) -> StateVector:
    r"""Squeezed vacuum :math:`S(\xi)|0\rangle`, :math:`\xi = \eta e^{i\phi}`.

    Even amplitudes are ``(-e^{i phi} tanh eta)^m sqrt((2m)!)/(2^m m! sqrt(cosh eta))``.
    """
    n = _dim(space)
    if eta < 0:
        raise ValueError("eta must be non-negative")
    _require(n, squeeze_guard(eta), f"squeezed eta={eta:.4g}", even=True)
    return _checked(_squeezed_amps(eta, phi, n), f"squeezed eta={eta:.4g}")


def fock(n: int, space) -> StateVector:
    dim = _dim(space)
    if not 0 <= n < dim:
        raise IndexError(f"Fock level {n} outside cutoff {dim}")
    out = np.zeros(dim, dtype=complex)
    out[n] = 1.0
    return StateVector.single(out)


def vacuum(space) -> StateVector:
    return fock(0, space)


def _raise_once(amps: np.ndarray) -> np.ndarray:
    # a^dag applied to an untruncated expansion, keeping levels below the cutoff
    out = np.zeros_like(amps)
    out[1:] = np.sqrt(np.arange(1, amps.size)) * amps[:-1]
    return out


def spac(beta: complex, space) -> StateVector:
    """Single-photon-added coherent state ``a^dag|beta>/sqrt(1+|beta|^2)``."""
    n = _dim(space)
    beta = complex(beta)
    _require(n, coherent_guard(beta), f"SPAC |beta|={abs(beta):.4g}")
    amps = _raise_once(_coherent_amps(beta, n)) / math.sqrt(1.0 + abs(beta) ** 2)
    return _checked(amps, f"SPAC |beta|={abs(beta):.4g}")


def spasv(eta: float, phi: float, space) -> StateVector:
    """Single-photon-added squeezed vacuum ``a^dag S(xi)|0>/cosh(eta)``."""
    n = _dim(space)
    if eta < 0:
        raise ValueError("eta must be non-negative")
    _require(n, squeeze_guard(eta), f"SPASV eta={eta:.4g}", even=True)
    amps = _raise_once(_squeezed_amps(eta, phi, n)) / math.cosh(eta)
    return _checked(amps, f"SPASV eta={eta:.4g}")


# -- automatic cutoffs ------------------------------------------------------------


def _first_below(tail: np.ndarray, tol: float) -> int:
    idx = np.nonzero(tail <= tol)[0]
    if idx.size == 0:
        raise TruncationError("no cutoff below the search limit reaches the tail tolerance")
    return int(idx[0])


def coherent_cutoff(beta: complex, tail: float = 1e-11, margin: int = 4) -> int:
    """Smallest cutoff passing the guard whose discarded weight is below ``tail``.

    ``margin`` extra levels leave room for a few creation operators.
    """
    b = abs(beta)
    limit = int(b * b + 40 * b + 200)
    p = np.abs(_coherent_amps(complex(beta), limit)) ** 2
    # weight at or above level k, summed from the top to avoid cancellation
    tails = np.cumsum(p[::-1])[::-1]
    tails = np.append(tails, 0.0)
    n = _first_below(tails, tail)
    return max(coherent_guard(beta), n) + margin


def squeezed_cutoff(eta: float, tail: float = 1e-11, margin: int = 4) -> int:
    """Even counterpart of :func:`coherent_cutoff` for squeezed vacuum."""
    if eta == 0.0:
        return squeeze_guard(0.0) + margin
    # geometric decay tanh^2 per pair fixes the search horizon
    t2 = max(math.tanh(eta) ** 2, 1e-300)
    limit = int(2 * (math.log(1e-40) / math.log(t2))) + 64
    limit += limit % 2
    p = np.abs(_squeezed_amps(eta, 0.0, limit)) ** 2
    tails = np.append(np.cumsum(p[::-1])[::-1], 0.0)
    # the photon-added partner carries n*p_n, so demand a margin there too
    weighted = np.append(np.cumsum((np.arange(limit) * p)[::-1])[::-1], 0.0)
    n = max(_first_below(tails, tail), _first_below(weighted, tail))
    n = max(squeeze_guard(eta), n) + margin
    return n + (n % 2)


@dataclass(frozen=True)
class PointerInput:
    """Signal (pointer) input: vacuum, coherent or squeezed vacuum.

    The phase of a coherent input lives inside the complex ``beta``.
    """

    kind: str = "vacuum"
    beta: complex = 0j
    eta: float = 0.0
    phi: float = 0.0
    cutoff: int | None = field(default=None, compare=True)

    def __post_init__(self):
        if self.kind not in ("vacuum", "coherent", "squeezed"):
            raise ValueError(f"unknown pointer kind {self.kind!r}")
        object.__setattr__(self, "beta", complex(self.beta))
        if self.eta < 0:
            raise ValueError("eta must be non-negative")

    @classmethod
    def vacuum(cls, cutoff=None) -> "PointerInput":
        return cls("vacuum", cutoff=cutoff)

    @classmethod
    def coherent(cls, beta, cutoff=None) -> "PointerInput":
        return cls("coherent", beta=complex(beta), cutoff=cutoff)

    @classmethod
    def squeezed(cls, eta, phi=0.0, cutoff=None) -> "PointerInput":
        return cls("squeezed", eta=float(eta), phi=float(phi), cutoff=cutoff)

    def auto_cutoff(self, margin: int = 4) -> int:
        if self.kind == "coherent":
            return coherent_cutoff(self.beta, margin=margin)
        if self.kind == "squeezed":
            return squeezed_cutoff(self.eta, margin=margin)
        return squeeze_guard(0.0) + margin

    def resolved_cutoff(self, margin: int = 4) -> int:
        return self.cutoff if self.cutoff is not None else self.auto_cutoff(margin)

    def state(self, cutoff: int | None = None) -> StateVector:
        n = cutoff if cutoff is not None else self.resolved_cutoff()
        if self.kind == "coherent":
            return coherent_state(self.beta, n)
        if self.kind == "squeezed":
            return squeezed_vacuum(self.eta, self.phi, n)
        return vacuum(n)

    def photon_added(self, cutoff: int | None = None) -> StateVector:
        """The one-photon-added target: |1>, SPAC or SPASV."""
        n = cutoff if cutoff is not None else self.resolved_cutoff()
        if self.kind == "coherent":
            return spac(self.beta, n)
        if self.kind == "squeezed":
            return spasv(self.eta, self.phi, n)
        return fock(1, n)
