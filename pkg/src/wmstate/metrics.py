"""Fidelity, photon statistics, quadrature squeezing and the SNR ratio.

Numerical moments are taken in the truncated space. The ``closed_*``
functions are the analytic expressions for the two-term output states; they
are kept for cross-checking only (see :mod:`wmstate.deviations`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, DimensionMismatchError
from .fock import StateVector, annihilator, quadrature
from .protocol import (
    ProtocolParams,
    conditional_state_exact,
    conditional_state_first_order,
    nonpostselected_pointer,
)
from .states import PointerInput, coherent_state

SQRT2 = math.sqrt(2.0)

__all__ = [
    "PhotonStats",
    "SnrReport",
    "fidelity",
    "expect",
    "photon_stats",
    "squeezing",
    "snr_ratio",
    "closed_theta_norm",
    "closed_theta_fidelities",
    "closed_theta_moments",
    "closed_snr_moments",
    "closed_omega_norm",
    "closed_omega_fidelities",
]


@dataclass(frozen=True)
class PhotonStats:
    mean_n: float
    g2: float
    mandel_q: float


@dataclass(frozen=True)
class SnrReport:
    chi: float
    r_post_per_sqrtN: float
    r_non_per_sqrtN: float
    delta_q: float
    delta_q_prime: float
    variance_post: float
    variance_non: float


def _vec(state) -> np.ndarray:
    if isinstance(state, StateVector):
        return state.amplitudes
    return np.asarray(state, dtype=complex)


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def fidelity(s1, s2) -> float:
    """Uhlmann-Jozsa fidelity; ``|<s1|s2>|^2`` when both states are pure."""
    a, b = _vec(s1), _vec(s2)
    if isinstance(s1, StateVector) and isinstance(s2, StateVector) and s1.dims != s2.dims:
        raise DimensionMismatchError(f"dims {s1.dims} vs {s2.dims}")
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatchError(f"dimension {a.shape[0]} vs {b.shape[0]}")
    if a.ndim == 1 and b.ndim == 1:
        ov = np.vdot(a, b)
        return float(abs(ov) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real))
    if a.ndim == 1:
        a, b = b, a
    if b.ndim == 1:
        return float(np.vdot(b, a @ b).real / np.vdot(b, b).real)
    ra = _psd_sqrt(a)
    inner = _psd_sqrt(ra @ b @ ra)
    return float(np.trace(inner).real ** 2)


def expect(op: np.ndarray, state) -> complex:
    """``<op>`` in a pure state (vector) or a density matrix."""
    s = _vec(state)
    if s.ndim == 1:
        return complex(np.vdot(s, op @ s) / np.vdot(s, s))
    return complex(np.trace(op @ s) / np.trace(s))


def photon_stats(state) -> PhotonStats:
    """Mean photon number, ``g2(0)`` and Mandel ``Q`` of a single-mode state.

    ``g2`` is NaN for the vacuum, whose Mandel ``Q`` is 0.
    """
    s = _vec(state)
    a = annihilator(s.shape[0])
    if s.ndim == 1:
        s = s / np.linalg.norm(s)
        # norms of lowered vectors avoid the truncated a^dag entirely
        a1 = a @ s
        mean_n = float(np.vdot(a1, a1).real)
        a2 = a @ a1
        n2 = float(np.vdot(a2, a2).real)
    else:
        mean_n = expect(a.conj().T @ a, s).real
        n2 = expect(a.conj().T @ a.conj().T @ a @ a, s).real
    if mean_n == 0.0:
        return PhotonStats(0.0, float("nan"), 0.0)
    g2 = n2 / mean_n**2
    return PhotonStats(mean_n, g2, (n2 - mean_n**2) / mean_n)


def quadrature_variance(state, phi: float) -> float:
    s = _vec(state)
    x = quadrature(s.shape[0], phi)
    m1 = expect(x, s).real
    if s.ndim == 1:
        # <X^2> as |X psi|^2 would pick up the truncated top level; use the
        # normal-ordered form instead
        a = annihilator(s.shape[0])
        ep = np.exp(-1j * phi)
        aa = expect(a @ a, s)
        nn = expect(a.conj().T @ a, s).real
        m2 = 0.5 * (2 * (ep**2 * aa).real + 2 * nn + 1)
    else:
        m2 = expect(x @ x, s).real
    return float(m2 - m1 * m1)


def squeezing(state, phi: float) -> float:
    """Squeezing parameter ``S_phi = Var(X_phi) - 1/2``."""
    return quadrature_variance(state, phi) - 0.5


# -- SNR ratio ---------------------------------------------------------------------


def snr_ratio(params: ProtocolParams, beta: complex | None = None, *, exact: bool = False, ps: str = "zeroth") -> SnrReport:
    """Postselected over nonpostselected signal-to-noise ratio of the q shift.

    ``exact=False`` takes both pointer states to first order in ``g`` (the
    nonpostselected moments are linear in ``g``); ``exact=True`` uses the full
    three-mode evolution. ``ps`` selects the success probability entering
    ``sqrt(N P_s)``: ``"zeroth"`` is ``|alpha eps|^2``, ``"model"`` is the
    branch probability of the chosen model.
    """
    if beta is not None:
        params = params.with_(pointer=PointerInput.coherent(beta))
    if params.pointer.kind != "coherent":
        raise ValueError("the SNR ratio is defined for a coherent pointer")
    if params.g == 0:
        raise DegenerateError("g = 0: both pointer shifts vanish and chi is undefined")
    if ps not in ("zeroth", "model"):
        raise ValueError(f"ps must be 'zeroth' or 'model', got {ps!r}")
    n = params.resolved_signal_cutoff()
    params = params.with_(signal_cutoff=n)
    q = quadrature(n, 0.0)
    ref = coherent_state(params.pointer.beta, n)
    q_ref = expect(q, ref).real

    out = conditional_state_exact(params) if exact else conditional_state_first_order(params)
    theta = out.state
    dq = expect(q, theta).real - q_ref
    var_post = quadrature_variance(theta, 0.0)
    p_s = out.p_zeroth if ps == "zeroth" else out.p_model

    marg = nonpostselected_pointer(params, first_order=not exact)
    dq_non = marg.mean_q - q_ref
    var_non = marg.var_q
    if dq_non == 0 or dq == 0:
        raise DegenerateError("vanishing pointer shift")
    r_post = math.sqrt(p_s) * dq / math.sqrt(var_post)
    r_non = dq_non / math.sqrt(var_non)
    return SnrReport(
        chi=r_post / r_non,
        r_post_per_sqrtN=r_post,
        r_non_per_sqrtN=r_non,
        delta_q=dq,
        delta_q_prime=dq_non,
        variance_post=var_post,
        variance_non=var_non,
    )


# -- closed forms for the coherent-input output state ---------------------------------


def closed_theta_norm(beta, kappa1, kappa2) -> float:
    b2 = abs(beta) ** 2
    inv = abs(kappa1) ** 2 + abs(kappa2) ** 2 * (1 + b2) - 2 * (kappa1 * np.conj(kappa2) * beta).real
    return float(inv**-0.5)


def closed_theta_fidelities(beta, kappa1, kappa2):
    """``(F1, F2)``: overlaps with ``|beta>`` and with the SPAC state."""
    nn = closed_theta_norm(beta, kappa1, kappa2)
    b2 = abs(beta) ** 2
    f1 = abs(nn * (kappa1 - kappa2 * np.conj(beta))) ** 2
    f2 = nn**2 * abs(kappa1 * beta - kappa2 * (1 + b2)) ** 2 / (1 + b2)
    return float(f1), float(f2)


def closed_theta_moments(beta, kappa1, kappa2):
    """``(<a^dag a>, <a^dag2 a^2>)`` of the normalized two-term state.

    The cross terms are read as ``-2 Re[kappa1 kappa2^* (...)]``.
    """
    nn2 = closed_theta_norm(beta, kappa1, kappa2) ** 2
    b2 = abs(beta) ** 2
    k12 = kappa1 * np.conj(kappa2)
    mean_n = nn2 * (
        abs(kappa1) ** 2 * b2
        - 2 * (k12 * (beta + b2 * beta)).real
        + abs(kappa2) ** 2 * (3 * b2 + b2**2 + 1)
    )
    n2 = nn2 * (
        abs(kappa1) ** 2 * b2**2
        - 2 * (k12 * (2 * b2 * beta + b2**2 * beta)).real
        + abs(kappa2) ** 2 * (5 * b2**2 + b2**3 + 4 * b2)
    )
    return float(mean_n), float(n2)


def closed_snr_moments(beta, kappa1, kappa2) -> dict:
    """Coherent-state matrix elements and the postselected ``<q>``, ``<q^2>``.

    ``q2_f`` reproduces the published expression, whose cross term carries
    ``w2``; ``q2_f_w3`` uses ``w3`` in its place.
    """
    beta = complex(beta)
    b2 = abs(beta) ** 2
    h1 = SQRT2 * beta.real
    h2 = SQRT2 * (2 + b2) * beta.real
    h3 = (1 + b2 + beta**2) / SQRT2
    w1 = 0.5 * (2 * (beta**2).real + 2 * b2 + 1)
    w2 = 0.5 * (3 + 7 * b2 + 2 * b2**2 + 2 * (3 + b2) * (beta**2).real)
    w3 = 0.5 * (3 * beta + beta**3 + 2 * np.conj(beta) + np.conj(beta) * b2 + 2 * beta * b2)
    nn2 = closed_theta_norm(beta, kappa1, kappa2) ** 2
    k12 = kappa1 * np.conj(kappa2)
    q_f = nn2 * (abs(kappa1) ** 2 * h1 + abs(kappa2) ** 2 * h2 - 2 * (k12 * h3).real)
    q2_f = nn2 * (abs(kappa1) ** 2 * w1 + abs(kappa2) ** 2 * w2 - 2 * (k12 * w2).real)
    q2_f_w3 = nn2 * (abs(kappa1) ** 2 * w1 + abs(kappa2) ** 2 * w2 - 2 * (k12 * w3).real)
    return {
        "h1": h1, "h2": h2, "h3": complex(h3),
        "w1": w1, "w2": w2, "w3": complex(w3),
        "q_f": float(q_f), "q2_f": float(q2_f), "q2_f_w3": float(q2_f_w3),
    }


# -- closed forms for the squeezed-input output state ----------------------------------


def closed_omega_norm(eta, phi, lambda1, lambda2) -> float:
    """Normalization ``chi`` of the squeezed-input output state."""
    inv = (
        1
        + abs(lambda1) ** 2 * math.sinh(eta) ** 2
        - (lambda1 * np.conj(lambda2) * np.exp(1j * phi)).real * math.sinh(2 * eta)
        + abs(lambda2) ** 2 * math.cosh(eta) ** 2
    )
    return float(inv**-0.5)


def closed_omega_fidelities(eta, phi, lambda1, lambda2):
    """``(F1, F2)``: overlaps with squeezed vacuum and with SPASV."""
    chi = closed_omega_norm(eta, phi, lambda1, lambda2)
    f1 = chi**2
    f2 = (chi / math.cosh(eta)) ** 2 * abs(
        0.5 * np.exp(1j * phi) * lambda1 * math.sinh(2 * eta) - lambda2 * math.cosh(eta) ** 2
    ) ** 2
    return float(f1), float(f2)
