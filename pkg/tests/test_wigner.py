import math

import numpy as np
import pytest
from scipy.linalg import expm

from wmstate.errors import TruncationError
from wmstate.fock import annihilator
from wmstate.metrics import quadrature_variance
from wmstate.protocol import ProtocolParams, conditional_state_first_order
from wmstate.states import PointerInput, coherent_state, fock, spac, squeezed_vacuum, vacuum
from wmstate.wigner import (
    WIGNER_BOUND,
    GridSpec,
    wigner_closed_spac,
    wigner_closed_spasv,
    wigner_numeric,
)

SMALL = GridSpec((-2.0, 2.0), (-2.0, 2.0), 21, 21)
DEFAULTS = ProtocolParams()


def parity_oracle(vec, z, pad=60):
    # direct displaced parity with scipy expm on a padded space
    n = vec.size + pad
    v = np.zeros(n, dtype=complex)
    v[: vec.size] = vec
    a = annihilator(n)
    d = expm(-z * a.conj().T + np.conj(z) * a)  # D(-z)
    w = d @ v
    parity = np.where(np.arange(n) % 2, -1.0, 1.0)
    return (2 / math.pi) * np.vdot(w, parity * w).real


def test_grid_spec():
    g = GridSpec()
    assert g.xs.size == 161 and g.xs[0] == -4 and g.xs[-1] == 4
    guarded = g.guarded()
    assert guarded.x_range[0] <= -5.5 and guarded.p_range[1] >= 5.5
    assert np.diff(guarded.xs)[0] == pytest.approx(np.diff(g.xs)[0])
    with pytest.raises(ValueError):
        GridSpec((1.0, 0.0))


def test_vacuum_and_fock_at_origin():
    grid = GridSpec((-1.0, 1.0), (-1.0, 1.0), 3, 3)
    w = wigner_numeric(vacuum(10), grid)
    assert w.values[1, 1] == pytest.approx(2 / math.pi, abs=1e-12)
    np.testing.assert_allclose(w.values, (2 / math.pi) * np.exp(-2 * np.abs(grid.xs[:, None] + 1j * grid.ps) ** 2), atol=1e-12)
    w1 = wigner_numeric(fock(1, 10), grid)
    assert w1.values[1, 1] == pytest.approx(-2 / math.pi, abs=1e-12)


def test_coherent_peak_and_integral():
    w = wigner_numeric(coherent_state(1.0, 30), GridSpec().guarded())
    i, j = np.unravel_index(np.argmax(w.values), w.values.shape)
    assert complex(w.xs[i], w.ps[j]) == pytest.approx(1.0, abs=1e-12)
    assert w.max() == pytest.approx(2 / math.pi, abs=1e-12)
    assert w.integral() == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("z", [0.3 - 0.2j, -1.1 + 0.7j, 1.6j])
def test_matches_direct_displaced_parity(z):
    vec = spac(0.6 + 0.3j, 30).amplitudes
    grid = GridSpec((z.real, z.real + 1), (z.imag, z.imag + 1), 2, 2)
    w = wigner_numeric(vec, grid)
    assert w.values[0, 0] == pytest.approx(parity_oracle(vec, z), abs=1e-10)


def test_density_matrix_matches_mixture():
    a, b = coherent_state(0.5, 20).amplitudes, fock(1, 20).amplitudes
    rho = 0.3 * np.outer(a, a.conj()) + 0.7 * np.outer(b, b.conj())
    expected = 0.3 * wigner_numeric(a, SMALL).values + 0.7 * wigner_numeric(b, SMALL).values
    np.testing.assert_allclose(wigner_numeric(rho, SMALL).values, expected, atol=1e-12)


def test_edge_weight_check(monkeypatch):
    import wmstate.wigner as wg

    # the padding normally keeps the edge weight near 1e-30; a zero tolerance
    # makes the check fire and proves it is wired in
    monkeypatch.setattr(wg, "_TAIL_TOL", 0.0)
    with pytest.raises(TruncationError):
        wigner_numeric(coherent_state(1.0, 30), SMALL)


def test_wigner_single_mode_only():
    from wmstate.fock import StateVector

    with pytest.raises(ValueError):
        wigner_numeric(StateVector((2, 2), np.array([1, 0, 0, 0])), SMALL)


def test_closed_spac_limits():
    grid = GridSpec((-3.0, 3.0), (-3.0, 3.0), 61, 61)
    z = grid.xs[:, None] + 1j * grid.ps[None, :]
    coh = wigner_closed_spac(0.8 + 0.3j, 1.0, 0.0, grid)
    np.testing.assert_allclose(coh.values, (2 / math.pi) * np.exp(-2 * np.abs(z - (0.8 + 0.3j)) ** 2), atol=1e-10)
    f1 = wigner_closed_spac(0.0, 0.0, 1.0, grid)
    assert np.abs(f1.values - wigner_numeric(fock(1, 20), grid).values).max() <= 1e-8
    s = wigner_closed_spac(1.2, 0.0, 1.0, grid)
    assert np.abs(s.values - wigner_numeric(spac(1.2, 40), grid).values).max() <= 1e-8


@pytest.mark.parametrize("beta", [0.0, 1.0, 2.0])
def test_closed_spac_derived_cross_term_matches_numeric(beta):
    out = conditional_state_first_order(DEFAULTS.with_(pointer=PointerInput.coherent(beta)))
    k1, k2 = out.coefficients["kappa1"], out.coefficients["kappa2"]
    derived = wigner_closed_spac(beta, k1, k2, SMALL, cross_term="derived")
    assert np.abs(derived.values - wigner_numeric(out.state, SMALL).values).max() < 1e-9
    with pytest.raises(ValueError):
        wigner_closed_spac(beta, k1, k2, SMALL, cross_term="other")


def test_closed_spasv_limits():
    grid = GridSpec((-3.0, 3.0), (-3.0, 3.0), 61, 61)
    gauss = wigner_closed_spasv(1.0, 0.0, 0.0, 0.0, grid)
    assert gauss.min() > 0
    f1 = wigner_closed_spasv(0.0, 0.0, 0.0, 1e4, grid)
    assert np.abs(f1.values - wigner_numeric(fock(1, 20), grid).values).max() <= 1e-6


def test_omega_keeps_negativity_and_squeezing():
    out = conditional_state_first_order(DEFAULTS.with_(pointer=PointerInput.squeezed(1.0)))
    w = wigner_numeric(out.state, GridSpec())
    assert w.min() < 0
    variances = [quadrature_variance(out.state, a) for a in np.linspace(0, math.pi, 91)]
    assert min(variances) < 0.5


@pytest.mark.parametrize(
    "state",
    [
        lambda: coherent_state(1.5, 40),
        lambda: spac(1.0, 40),
        lambda: squeezed_vacuum(1.0, 0.4, 110),
        lambda: fock(3, 10),
    ],
)
def test_bound_and_normalization(state):
    w = wigner_numeric(state(), GridSpec().guarded())
    assert np.abs(w.values).max() <= WIGNER_BOUND + 1e-9
    assert w.integral() == pytest.approx(1.0, abs=1e-3)
