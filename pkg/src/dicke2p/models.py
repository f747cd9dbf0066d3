"""Hamiltonians for two three-level atoms coupled to a single cavity mode.

The full model couples the g-i and i-e transitions of both atoms to the
same mode within the rotating-wave approximation.  When the intermediate
level is far detuned it can be eliminated, leaving an effective two-photon
interaction W between |gg> and |ee> plus Stark shifts.  Both pictures are
built here as dense operators on the shared tensor layout
atom A (x) atom B (x) field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hilbert import (
    FockCutoff,
    Operator,
    StateVector,
    annihilation_op,
    collective_op,
    creation_op,
    number_op,
    tripartite_tag,
)

__all__ = [
    "FullModelParams",
    "EffectiveModelParams",
    "ValidityReport",
    "VALIDITY_MARGIN",
    "full_hamiltonian",
    "two_photon_w",
    "stark_shift",
    "constant_of_motion",
    "effective_coupling",
    "trapped_ion_coupling",
    "dispersive_generator",
    "embed_two_level_state",
    "validity_report",
]

VALIDITY_MARGIN = 0.1


@dataclass(frozen=True)
class FullModelParams:
    """Three-level model: cavity frequency omega, intermediate-level
    detuning delta, and the two transition couplings."""

    omega: float
    delta: float
    g_g: float
    g_e: float
    cutoff: FockCutoff

    def __post_init__(self) -> None:
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.g_g <= 0 or self.g_e <= 0:
            raise ValueError("couplings g_g, g_e must be positive")


@dataclass(frozen=True)
class EffectiveModelParams:
    """Two-photon model with a single coupling g (sign included)."""

    g: float
    cutoff: FockCutoff

    def __post_init__(self) -> None:
        if self.g == 0:
            raise ValueError("coupling g must be nonzero")


def effective_coupling(g_g: float, g_e: float, delta: float) -> float:
    """Two-photon coupling after adiabatic elimination: -g_g g_e / delta."""
    if delta == 0:
        raise ValueError("delta must be nonzero")
    return -g_g * g_e / delta


def trapped_ion_coupling(rabi: float, lamb_dicke: float) -> float:
    """Effective coupling of the motional analogue: -rabi * eta^2 / 2."""
    return -rabi * lamb_dicke**2 / 2.0


def _field_ops(cutoff: FockCutoff) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    a = annihilation_op(cutoff).matrix
    ad = creation_op(cutoff).matrix
    n = number_op(cutoff).matrix
    eye = np.eye(cutoff.dim, dtype=np.complex128)
    return a, ad, n, eye


def full_hamiltonian(params: FullModelParams) -> Operator:
    """RWA Hamiltonian of both cascade atoms coupled to one mode.

    H = omega a^dag a + 2 omega S_ee + (omega + delta) S_ii
        + g_g (a S_ig + a^dag S_gi) + g_e (a S_ei + a^dag S_ie)
    """
    cutoff = params.cutoff
    a, ad, n, eye_f = _field_ops(cutoff)
    eye_a = np.eye(9, dtype=np.complex128)

    s_ee = collective_op("e", "e", 3).matrix
    s_ii = collective_op("i", "i", 3).matrix
    s_ig = collective_op("i", "g", 3).matrix
    s_ei = collective_op("e", "i", 3).matrix

    h = params.omega * np.kron(eye_a, n)
    h += 2.0 * params.omega * np.kron(s_ee, eye_f)
    h += (params.omega + params.delta) * np.kron(s_ii, eye_f)
    h += params.g_g * (np.kron(s_ig, a) + np.kron(s_ig.conj().T, ad))
    h += params.g_e * (np.kron(s_ei, a) + np.kron(s_ei.conj().T, ad))
    return Operator(h, tripartite_tag(cutoff, levels=3), hermitian=True)


def two_photon_w(params: EffectiveModelParams) -> Operator:
    """Two-photon interaction W = g (a^2 S_eg + a^dag^2 S_ge) on two-level atoms."""
    cutoff = params.cutoff
    a, ad, _, _ = _field_ops(cutoff)
    s_eg = collective_op("e", "g", 2).matrix
    s_ge = collective_op("g", "e", 2).matrix
    w = params.g * (np.kron(s_eg, a @ a) + np.kron(s_ge, ad @ ad))
    return Operator(w, tripartite_tag(cutoff, levels=2), hermitian=True)


def stark_shift(params: FullModelParams) -> Operator:
    """Level shifts accompanying W after the intermediate level is removed.

    S = -2(g_g^2/delta) I - ((g_e^2 - g_g^2)/delta) a a^dag S_ee
        + 3(g_g^2/delta) S_ee,
    with I the excitation counter a^dag a + 2 S_ee, on the two-level
    atomic space.  The photon-dependent part vanishes when g_g = g_e.
    """
    cutoff = params.cutoff
    a, ad, _, eye_f = _field_ops(cutoff)
    s_ee = collective_op("e", "e", 2).matrix
    i_mat = constant_of_motion(cutoff, levels=2).matrix
    mat = -2.0 * (params.g_g**2 / params.delta) * i_mat
    mat += -((params.g_e**2 - params.g_g**2) / params.delta) * np.kron(s_ee, a @ ad)
    mat += 3.0 * (params.g_g**2 / params.delta) * np.kron(s_ee, eye_f)
    return Operator(mat, tripartite_tag(cutoff, levels=2), hermitian=True)


def constant_of_motion(cutoff: FockCutoff, levels: int = 2) -> Operator:
    """Excitation counter a^dag a + 2 S_ee (+ S_ii for three-level atoms).

    Commutes with the full Hamiltonian and with W, including under
    truncation, because every interaction term conserves it exactly.
    """
    if levels not in (2, 3):
        raise ValueError("levels must be 2 or 3")
    _, _, n, eye_f = _field_ops(cutoff)
    eye_a = np.eye(levels * levels, dtype=np.complex128)
    s_ee = collective_op("e", "e", levels).matrix
    mat = np.kron(eye_a, n) + 2.0 * np.kron(s_ee, eye_f)
    if levels == 3:
        mat += np.kron(collective_op("i", "i", 3).matrix, eye_f)
    return Operator(mat, tripartite_tag(cutoff, levels=levels), hermitian=True)


def dispersive_generator(params: FullModelParams) -> np.ndarray:
    """Anti-Hermitian generator of the frame change that removes the
    intermediate level to first order in g/delta."""
    cutoff = params.cutoff
    a, ad, _, _ = _field_ops(cutoff)
    s_ig = collective_op("i", "g", 3).matrix
    s_gi = collective_op("g", "i", 3).matrix
    s_ei = collective_op("e", "i", 3).matrix
    s_ie = collective_op("i", "e", 3).matrix
    g = (params.g_g / params.delta) * (np.kron(s_ig, a) - np.kron(s_gi, ad))
    g -= (params.g_e / params.delta) * (np.kron(s_ei, a) - np.kron(s_ie, ad))
    return g


_EMBED_ATOM = (0, 2)  # two-level g, e -> three-level indices


def embed_two_level_state(state: StateVector, cutoff: FockCutoff) -> StateVector:
    """Lift a state of two two-level atoms + field into the three-level
    space, leaving the intermediate level unpopulated."""
    if state.space.dims != (2, 2, cutoff.dim):
        raise ValueError("expected a two-level tripartite state matching the cutoff")
    src = state.reshaped()
    out = np.zeros((3, 3, cutoff.dim), dtype=np.complex128)
    for i2, i3 in enumerate(_EMBED_ATOM):
        for j2, j3 in enumerate(_EMBED_ATOM):
            out[i3, j3, :] = src[i2, j2, :]
    return StateVector(out.ravel(), tripartite_tag(cutoff, levels=3))


def embed_indices(cutoff: FockCutoff) -> np.ndarray:
    """Flat indices of the two-level subspace inside the three-level layout."""
    nf = cutoff.dim
    idx = []
    for i3 in _EMBED_ATOM:
        for j3 in _EMBED_ATOM:
            base = (i3 * 3 + j3) * nf
            idx.extend(range(base, base + nf))
    return np.array(idx, dtype=np.intp)


@dataclass(frozen=True)
class ValidityReport:
    """Where the effective description can be trusted.

    time_horizon bounds the usable evolution time; the two booleans check
    that the Stark shifts nearly cancel and that a full revival fits inside
    the dispersive regime.
    """

    time_horizon: float
    stark_closeness_ok: bool
    revival_reachable_ok: bool

    @property
    def ok(self) -> bool:
        return self.stark_closeness_ok and self.revival_reachable_ok


def validity_report(params: FullModelParams, nbar: float) -> ValidityReport:
    if nbar <= 0:
        raise ValueError("nbar must be positive")
    horizon = VALIDITY_MARGIN * params.delta**2 / (params.g_e**3 * nbar)
    stark_ok = abs(params.g_e**2 - params.g_g**2) < params.g_e**3 / params.delta
    revival_ok = params.g_e * nbar * math.pi < VALIDITY_MARGIN * params.delta
    return ValidityReport(horizon, stark_ok, revival_ok)
