"""Dense linear algebra on truncated Fock spaces.

Operators are plain ``numpy`` arrays. Multi-mode states carry their mode
dimensions so that bras can be contracted against, and modes traced out of,
a subset of modes. Basis ordering is row-major over the mode list: the first
mode is the slowest index, exactly as produced by :func:`numpy.kron`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence, Union

import numpy as np

from .errors import ConvergenceError, ModeMismatchError, TruncationError

__all__ = [
    "ModeSpace",
    "StateVector",
    "annihilator",
    "creator",
    "number_op",
    "quadrature",
    "displacement",
    "squeeze_op",
    "matrix_exp",
    "tensor",
    "apply",
    "contract_bra",
    "partial_trace",
    "coherent_guard",
    "squeeze_guard",
]


@dataclass(frozen=True)
class ModeSpace:
    """A single bosonic mode truncated to ``|0>, ..., |cutoff-1>``."""

    cutoff: int

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 2:
            raise ValueError(f"cutoff must be an integer >= 2, got {self.cutoff!r}")


Space = Union[int, ModeSpace]


def _dim(space: Space) -> int:
    if isinstance(space, ModeSpace):
        return space.cutoff
    return ModeSpace(int(space)).cutoff


@dataclass
class StateVector:
    """Amplitudes over the product basis of ``dims``."""

    dims: tuple
    amplitudes: np.ndarray

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).ravel()
        if self.amplitudes.size != math.prod(self.dims):
            raise ValueError(
                f"{self.amplitudes.size} amplitudes do not fit dims {self.dims}"
            )

    @classmethod
    def single(cls, amplitudes) -> "StateVector":
        amplitudes = np.asarray(amplitudes, dtype=complex).ravel()
        return cls((amplitudes.size,), amplitudes)

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        nrm = self.norm
        if nrm == 0.0:
            raise ZeroDivisionError("cannot normalize the zero vector")
        return StateVector(self.dims, self.amplitudes / nrm)

    def as_tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def __array__(self, dtype=None, copy=None):
        return self.amplitudes if dtype is None else self.amplitudes.astype(dtype)


# -- guards -----------------------------------------------------------------


def coherent_guard(beta: complex) -> int:
    """Smallest cutoff accepted for a coherent amplitude ``beta``."""
    b = abs(beta)
    return math.ceil(b * b + 6.0 * b + 10.0 - 1e-12)


def squeeze_guard(eta: float) -> int:
    """Smallest (even) cutoff accepted for squeezing strength ``eta``."""
    n = math.ceil(10.0 + 8.0 * math.sinh(eta) ** 2 - 1e-12)
    return n + (n % 2)


# -- single-mode operators ----------------------------------------------------


def annihilator(space: Space) -> np.ndarray:
    n = _dim(space)
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)


def creator(space: Space) -> np.ndarray:
    return annihilator(space).conj().T


def number_op(space: Space) -> np.ndarray:
    return np.diag(np.arange(_dim(space), dtype=float)).astype(complex)


def quadrature(space: Space, phi: float) -> np.ndarray:
    r"""Quadrature :math:`X_\phi = (a e^{-i\phi} + a^\dagger e^{i\phi})/\sqrt{2}`."""
    a = annihilator(space)
    x = a * np.exp(-1j * phi)
    return (x + x.conj().T) / math.sqrt(2.0)


def displacement(space: Space, beta: complex, tol: float = 1e-12) -> np.ndarray:
    r""":math:`D(\beta) = \exp(\beta a^\dagger - \beta^* a)` on the truncated space."""
    n = _dim(space)
    if n < coherent_guard(beta):
        raise TruncationError(
            f"cutoff {n} too small for displacement |beta|={abs(beta):.4g}; "
            f"need >= {coherent_guard(beta)}"
        )
    a = annihilator(n)
    gen = beta * a.conj().T - np.conj(beta) * a
    return matrix_exp(gen, tol=tol)


def squeeze_op(space: Space, eta: float, phi: float, tol: float = 1e-12) -> np.ndarray:
    r"""Squeeze operator :math:`S(\xi) = \exp[(\xi^* a^2 - \xi a^{\dagger 2})/2]`.

    With ``xi = eta * exp(i phi)`` this satisfies
    ``S^dag a S = a cosh(eta) - a^dag exp(i phi) sinh(eta)``, so ``phi = 0``
    squeezes the ``X_0`` quadrature.
    """
    n = _dim(space)
    if eta < 0:
        raise ValueError("eta must be non-negative")
    if n < squeeze_guard(eta) or n % 2:
        raise TruncationError(
            f"cutoff {n} invalid for squeezing eta={eta:.4g}; "
            f"need an even cutoff >= {squeeze_guard(eta)}"
        )
    a = annihilator(n)
    a2 = a @ a
    xi = eta * np.exp(1j * phi)
    gen = 0.5 * (np.conj(xi) * a2 - xi * a2.conj().T)
    return matrix_exp(gen, tol=tol)


# -- matrix exponential ---------------------------------------------------------


def matrix_exp(op, tol: float = 1e-12, order: int = 18) -> np.ndarray:
    """Exponential of a square matrix by scaling and squaring.

    The matrix is scaled by ``2**-s`` until its 1-norm is at most 1/2, the
    exponential of the scaled matrix is taken from its Taylor series truncated
    at ``order`` terms (Horner form), and the result is squared ``s`` times.

    The a-priori bound on the error relative to ``||exp(op)||`` is
    ``2**s * theta**(order+1) / (order+1)! * e**theta`` with ``theta <= 1/2``;
    :class:`ConvergenceError` is raised when that bound exceeds ``tol``.
    """
    a = np.asarray(op, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix_exp needs a square matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    n = a.shape[0]
    norm1 = float(np.abs(a).sum(axis=0).max()) if n else 0.0
    s = 0
    if norm1 > 0.5:
        s = int(math.ceil(math.log2(norm1 / 0.5)))
    theta = norm1 / 2.0**s
    bound = 2.0**s * theta ** (order + 1) / math.factorial(order + 1) * math.exp(theta)
    if bound > tol:
        raise ConvergenceError(
            f"Taylor order {order} gives error bound {bound:.3g} > tol {tol:.3g}"
        )
    b = a / 2.0**s
    eye = np.eye(n, dtype=complex)
    result = eye.copy()
    for k in range(order, 0, -1):
        result = eye + (b @ result) / k
    for _ in range(s):
        result = result @ result
    return result


# -- composites -------------------------------------------------------------------


def tensor(*parts):
    """Kronecker product of operators, or of :class:`StateVector` objects."""
    if len(parts) == 1 and isinstance(parts[0], (list, tuple)):
        parts = tuple(parts[0])
    if not parts:
        raise ValueError("tensor needs at least one factor")
    if all(isinstance(p, StateVector) for p in parts):
        dims = sum((p.dims for p in parts), ())
        amps = reduce(np.kron, [p.amplitudes for p in parts])
        return StateVector(dims, amps)
    if any(isinstance(p, StateVector) for p in parts):
        raise TypeError("cannot mix states and operators in a tensor product")
    return reduce(np.kron, [np.asarray(p, dtype=complex) for p in parts])


def _check_modes(state: StateVector, modes: Sequence[int]) -> list:
    modes = [int(m) for m in modes]
    if len(set(modes)) != len(modes) or any(m < 0 or m >= state.n_modes for m in modes):
        raise ModeMismatchError(f"invalid modes {modes} for a {state.n_modes}-mode state")
    return modes


def apply(op, state: StateVector, modes: Sequence[int]) -> StateVector:
    """Apply ``op`` (acting on the listed ``modes``, in that order) to ``state``."""
    modes = _check_modes(state, modes)
    sub = [state.dims[m] for m in modes]
    op = np.asarray(op, dtype=complex)
    if op.shape != (math.prod(sub), math.prod(sub)):
        raise ModeMismatchError(f"operator shape {op.shape} does not act on dims {sub}")
    k = len(modes)
    psi = state.as_tensor()
    out = np.tensordot(op.reshape(sub + sub), psi, axes=(list(range(k, 2 * k)), modes))
    # tensordot puts the acted-on axes first
    out = np.moveaxis(out, list(range(k)), modes)
    return StateVector(state.dims, out.ravel())


def contract_bra(state: StateVector, bra: StateVector, modes: Sequence[int] | None = None) -> StateVector:
    """Partial inner product of ``bra`` (given as a ket) with ``state``.

    ``bra`` acts on ``modes`` of ``state`` (default: the leading modes). The
    returned vector on the remaining modes is unnormalized; its squared norm
    is the probability of the projected branch.
    """
    if modes is None:
        modes = list(range(bra.n_modes))
    modes = _check_modes(state, modes)
    if len(modes) != bra.n_modes or tuple(state.dims[m] for m in modes) != bra.dims:
        raise ModeMismatchError(
            f"bra dims {bra.dims} do not match modes {modes} of state dims {state.dims}"
        )
    if len(modes) == state.n_modes:
        raise ModeMismatchError("bra covers every mode; nothing would remain")
    out = np.tensordot(bra.as_tensor().conj(), state.as_tensor(), axes=(list(range(len(modes))), modes))
    rest = tuple(d for m, d in enumerate(state.dims) if m not in modes)
    return StateVector(rest, out.ravel())


def partial_trace(state: StateVector, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of a pure multi-mode state on the ``keep`` modes."""
    keep = _check_modes(state, keep)
    rest = [m for m in range(state.n_modes) if m not in keep]
    psi = np.transpose(state.as_tensor(), keep + rest)
    dk = math.prod(state.dims[m] for m in keep)
    mat = psi.reshape(dk, -1)
    rho = mat @ mat.conj().T
    return rho / np.trace(rho).real
