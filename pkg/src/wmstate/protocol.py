"""Pre-selection, weak interaction and single-photon postselection.

Modes are ordered ``(signal, transmitted idler, reflected idler)``. The
parametric interaction ``U = exp(g (a^dag b_t^dag - a b_t))`` couples the
signal to the transmitted idler arm; the reflected arm only enters through
postselection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .errors import OrthogonalPostselectionError
from .fock import (
    StateVector,
    annihilator,
    apply,
    contract_bra,
    matrix_exp,
    partial_trace,
    quadrature,
    tensor,
)
from .states import PointerInput, coherent_state

SQRT2 = math.sqrt(2.0)

__all__ = [
    "BeamSplitterSpec",
    "WeakValues",
    "ProtocolParams",
    "ConditionalOutput",
    "PointerMarginal",
    "preselection_amplitudes",
    "weak_values",
    "postselection_probability",
    "postselection_ket",
    "interaction_generator",
    "conditional_state_first_order",
    "conditional_state_exact",
    "exact_weak_values",
    "nonpostselected_pointer",
]


@dataclass(frozen=True)
class BeamSplitterSpec:
    """Lossless beam splitter with ``T = cos(theta) e^{i phi_t}``, ``R = sin(theta) e^{i phi_r}``."""

    theta: float = math.pi / 4
    phi_t: float = 0.0
    phi_r: float = math.pi / 2

    @property
    def transmittance(self) -> complex:
        return math.cos(self.theta) * np.exp(1j * self.phi_t)

    @property
    def reflectance(self) -> complex:
        return math.sin(self.theta) * np.exp(1j * self.phi_r)

    def matrix(self) -> np.ndarray:
        """Scattering matrix taking input annihilators to output annihilators."""
        t, r = self.transmittance, self.reflectance
        return np.array([[t, r], [-np.conj(r), np.conj(t)]], dtype=complex)


# Output port 0 of this splitter is a_2d = (a_t + i a_r)/sqrt(2).
POSTSELECTION_SPLITTER = BeamSplitterSpec(math.pi / 4, 0.0, math.pi / 2)


@dataclass(frozen=True)
class WeakValues:
    A_w: complex
    B_w: complex


@dataclass(frozen=True)
class ProtocolParams:
    g: float = 0.105
    alpha: complex = 0.01
    epsilon: float = 0.1
    pointer: PointerInput = field(default_factory=PointerInput.vacuum)
    signal_cutoff: int | None = None
    idler_cutoff: int = 6

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        if not abs(self.alpha) < 1:
            raise ValueError(f"|alpha| must be < 1, got {abs(self.alpha)}")
        if not 0 < self.epsilon <= 0.5:
            raise ValueError(f"epsilon must lie in (0, 0.5], got {self.epsilon}")
        if self.g < 0:
            raise ValueError("g must be non-negative")
        if self.idler_cutoff < 4:
            raise ValueError("idler_cutoff must be >= 4")

    def with_(self, **changes) -> "ProtocolParams":
        return replace(self, **changes)

    def resolved_signal_cutoff(self) -> int:
        if self.signal_cutoff is not None:
            return self.signal_cutoff
        if self.pointer.cutoff is not None:
            return self.pointer.cutoff
        # the interaction can add up to idler_cutoff photons
        return self.pointer.auto_cutoff(margin=4 + self.idler_cutoff)


@dataclass
class ConditionalOutput:
    state: StateVector
    p_zeroth: float
    p_model: float
    coefficients: dict = field(default_factory=dict)


class PointerMarginal(NamedTuple):
    rho: np.ndarray
    mean_q: float
    mean_q2: float
    var_q: float


def preselection_amplitudes(alpha, epsilon):
    """Coherent amplitudes ``(alpha_t, alpha_r)`` behind the unbalanced splitter."""
    alpha = complex(alpha)
    return alpha * (1 - epsilon) / SQRT2, 1j * alpha * (1 + epsilon) / SQRT2


def weak_values(alpha, epsilon) -> WeakValues:
    """First-order-in-epsilon weak values of the idler quadratures A and B."""
    alpha = complex(alpha)
    if alpha * epsilon == 0:
        raise OrthogonalPostselectionError("weak values diverge when alpha*epsilon = 0")
    inv = 1.0 / (2 * alpha * epsilon)
    return WeakValues(A_w=alpha / 2 - inv, B_w=1j * inv + 1j * alpha / 2)


def postselection_probability(alpha, epsilon) -> float:
    return float(abs(complex(alpha) * epsilon) ** 2)


def postselection_ket(idler_cutoff: int, splitter: BeamSplitterSpec = POSTSELECTION_SPLITTER, port: int = 0) -> StateVector:
    """``a_out^dag |0,0>`` on the ``(t, r)`` arms for the detector at ``port``.

    With the default splitter and port this is
    ``(|1>_t|0>_r - i|0>_t|1>_r)/sqrt(2)``.
    """
    row = splitter.matrix()[port]
    amps = np.zeros((idler_cutoff, idler_cutoff), dtype=complex)
    amps[1, 0] = np.conj(row[0])
    amps[0, 1] = np.conj(row[1])
    return StateVector((idler_cutoff, idler_cutoff), amps.ravel())


def interaction_generator(signal_cutoff: int, idler_cutoff: int) -> np.ndarray:
    """``a^dag b^dag - a b`` on ``signal (x) idler``."""
    a = annihilator(signal_cutoff)
    b = annihilator(idler_cutoff)
    ab = np.kron(a, b)
    return ab.conj().T - ab


def _first_order_coefficients(params: ProtocolParams):
    lam1 = params.g * params.alpha / SQRT2
    lam2 = params.g / (SQRT2 * params.alpha * params.epsilon)
    return lam1, lam2


def conditional_state_first_order(params: ProtocolParams) -> ConditionalOutput:
    """Pointer state after postselection, to first order in ``g``.

    Applies ``1 - lambda1 a - lambda2 a^dag`` with ``lambda1 = g alpha/sqrt2``
    and ``lambda2 = g/(sqrt2 alpha eps)``; the lambda1 term is retained.
    """
    if params.alpha * params.epsilon == 0:
        raise OrthogonalPostselectionError("alpha*epsilon = 0")
    n = params.resolved_signal_cutoff()
    phi = params.pointer.state(n)
    lam1, lam2 = _first_order_coefficients(params)
    a = annihilator(n)
    vec = phi.amplitudes - lam1 * (a @ phi.amplitudes) - lam2 * (a.conj().T @ phi.amplitudes)
    out = StateVector.single(vec)
    p_zeroth = postselection_probability(params.alpha, params.epsilon)
    if params.pointer.kind == "coherent":
        beta = params.pointer.beta
        coeffs = {"kappa1": 1 - params.g * beta * params.alpha / SQRT2, "kappa2": lam2}
    else:
        coeffs = {"lambda1": lam1, "lambda2": lam2}
    return ConditionalOutput(
        state=out.normalized(),
        p_zeroth=p_zeroth,
        p_model=p_zeroth * out.norm**2,
        coefficients=coeffs,
    )


def _input_state(params: ProtocolParams, ns: int) -> StateVector:
    at, ar = preselection_amplitudes(params.alpha, params.epsilon)
    ni = params.idler_cutoff
    return tensor(
        params.pointer.state(ns),
        coherent_state(at, ni, guard=False),
        coherent_state(ar, ni, guard=False),
    )


def _evolve(params: ProtocolParams, state: StateVector) -> StateVector:
    if params.g == 0:
        return state
    u = matrix_exp(params.g * interaction_generator(state.dims[0], state.dims[1]))
    return apply(u, state, [0, 1])


def conditional_state_exact(params: ProtocolParams) -> ConditionalOutput:
    """Pointer state from the full three-mode evolution and projection.

    ``p_model`` is the squared norm of the projected branch, i.e. the exact
    probability of one photon at D2 and none at D1 within the truncation.
    """
    ns = params.resolved_signal_cutoff()
    total = _evolve(params, _input_state(params, ns))
    branch = contract_bra(total, postselection_ket(params.idler_cutoff), [1, 2])
    p_model = branch.norm**2
    ev = exact_weak_values(params.alpha, params.epsilon, params.idler_cutoff)
    coeffs = {
        "b_w": ev["b_w"],
        "bdag_w": ev["bdag_w"],
        "lambda1": params.g * ev["b_w"],
        "lambda2": -params.g * ev["bdag_w"],
    }
    return ConditionalOutput(
        state=branch.normalized(),
        p_zeroth=postselection_probability(params.alpha, params.epsilon),
        p_model=float(p_model),
        coefficients=coeffs,
    )


def exact_weak_values(alpha, epsilon, idler_cutoff: int = 6) -> dict:
    """Weak values of ``b_t``, ``b_t^dag``, A and B from truncated matrix elements."""
    at, ar = preselection_amplitudes(alpha, epsilon)
    psi_i = tensor(
        coherent_state(at, idler_cutoff, guard=False),
        coherent_state(ar, idler_cutoff, guard=False),
    )
    fin = postselection_ket(idler_cutoff).amplitudes
    b = np.kron(annihilator(idler_cutoff), np.eye(idler_cutoff))
    overlap = np.vdot(fin, psi_i.amplitudes)
    if abs(overlap) < 1e-300:
        raise OrthogonalPostselectionError("pre- and post-selected states are orthogonal")
    b_w = np.vdot(fin, b @ psi_i.amplitudes) / overlap
    bdag_w = np.vdot(fin, b.conj().T @ psi_i.amplitudes) / overlap
    return {
        "overlap": complex(overlap),
        "b_w": complex(b_w),
        "bdag_w": complex(bdag_w),
        "A_w": complex((b_w + bdag_w) / SQRT2),
        "B_w": complex(1j * (b_w - bdag_w) / SQRT2),
    }


def _q_moments(rho: np.ndarray) -> PointerMarginal:
    q = quadrature(rho.shape[0], 0.0)
    m1 = float(np.trace(q @ rho).real)
    m2 = float(np.trace(q @ q @ rho).real)
    return PointerMarginal(rho, m1, m2, m2 - m1 * m1)


def nonpostselected_pointer(params: ProtocolParams, first_order: bool = False) -> PointerMarginal:
    """Reduced pointer state when no postselection is made, with q moments.

    ``first_order=True`` keeps the reduced state to linear order in ``g``,
    ``rho_0 + g Tr_idler[G rho_0 + rho_0 G^dag]``; otherwise the full unitary
    is applied and both idler arms are traced out.
    """
    ns = params.resolved_signal_cutoff()
    psi0 = _input_state(params, ns)
    if not first_order:
        return _q_moments(partial_trace(_evolve(params, psi0), [0]))
    # the reflected arm is a product factor and traces to 1
    ni = params.idler_cutoff
    at, _ = preselection_amplitudes(params.alpha, params.epsilon)
    st = tensor(params.pointer.state(ns), coherent_state(at, ni, guard=False))
    v = interaction_generator(ns, ni) @ st.amplitudes
    p0 = st.amplitudes.reshape(ns, ni)
    pv = v.reshape(ns, ni)
    rho = p0 @ p0.conj().T + params.g * (pv @ p0.conj().T + p0 @ pv.conj().T)
    return _q_moments(rho / np.trace(rho).real)
