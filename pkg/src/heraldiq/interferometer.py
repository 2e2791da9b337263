"""Linear-optical circuits and their mode unitaries.

Beam-splitter convention (every built-in scheme is expressed in it)::

    BS(theta, phi) = [[cos t,            i e^{-i phi} sin t],
                      [i e^{i phi} sin t, cos t            ]]

so ``theta = pi/4, phi = 0`` is a balanced 50:50 splitter. Circuits apply
their elements in list order: ``compile([a, b]) == B @ A``. Column ``s`` of
the unitary is the output of a photon injected in mode ``s``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

UNITARY_TOL = 1e-10


class CircuitError(ValueError):
    """Malformed circuit, element or matrix."""


def verify_unitarity(matrix) -> float:
    """Max-abs residual of ``M^dagger M - I``."""
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise CircuitError(f"expected a square matrix, got shape {m.shape}")
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def check_unitary(matrix, tol: float = UNITARY_TOL) -> np.ndarray:
    u = np.asarray(matrix, dtype=complex)
    res = verify_unitarity(u)
    if res > tol:
        raise CircuitError(f"matrix is not unitary (residual {res:.3g} > {tol:g})")
    return u


def bs_matrix(theta: float, phi: float = 0.0) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array(
        [[c, 1j * np.exp(-1j * phi) * s], [1j * np.exp(1j * phi) * s, c]],
        dtype=complex,
    )


def dft(m: int) -> np.ndarray:
    """``U_jk = w^{jk} / sqrt(m)`` with ``w = exp(2 pi i / m)``."""
    if m < 1:
        raise CircuitError("DFT size must be positive")
    j, k = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    return np.exp(2j * np.pi * j * k / m) / math.sqrt(m)


# --- elements ---------------------------------------------------------------


@dataclass(frozen=True)
class BeamSplitter:
    i: int
    j: int
    theta: float = math.pi / 4
    phi: float = 0.0

    @property
    def modes(self) -> tuple[int, ...]:
        return (self.i, self.j)

    def local_matrix(self) -> np.ndarray:
        return bs_matrix(self.theta, self.phi)


@dataclass(frozen=True)
class PhaseShift:
    i: int
    phi: float

    @property
    def modes(self) -> tuple[int, ...]:
        return (self.i,)

    def local_matrix(self) -> np.ndarray:
        return np.array([[np.exp(1j * self.phi)]])


@dataclass(frozen=True)
class Swap:
    i: int
    j: int

    @property
    def modes(self) -> tuple[int, ...]:
        return (self.i, self.j)

    def local_matrix(self) -> np.ndarray:
        return np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True)
class DFT:
    """DFT on the listed modes (in the given order)."""

    modes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(int(x) for x in self.modes))

    def local_matrix(self) -> np.ndarray:
        return dft(len(self.modes))


@dataclass(frozen=True, eq=False)
class UnitaryBlock:
    matrix: np.ndarray
    modes: tuple[int, ...]

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "modes", tuple(int(x) for x in self.modes))
        if mat.shape != (len(self.modes), len(self.modes)):
            raise CircuitError(f"block shape {mat.shape} does not match {len(self.modes)} modes")
        check_unitary(mat)

    def local_matrix(self) -> np.ndarray:
        return self.matrix


Element = BeamSplitter | PhaseShift | Swap | DFT | UnitaryBlock


def element_matrix(el: Element, m: int) -> np.ndarray:
    modes = list(el.modes)
    if len(set(modes)) != len(modes):
        raise CircuitError(f"{el} repeats a mode")
    if any(not 0 <= x < m for x in modes):
        raise CircuitError(f"{el} addresses a mode outside 0..{m - 1}")
    full = np.eye(m, dtype=complex)
    full[np.ix_(modes, modes)] = el.local_matrix()
    return full


@dataclass(frozen=True)
class Circuit:
    m: int
    elements: tuple[Element, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.m < 1:
            raise CircuitError("a circuit needs at least one mode")
        for el in self.elements:
            if any(not 0 <= x < self.m for x in el.modes):
                raise CircuitError(f"{el} addresses a mode outside 0..{self.m - 1}")

    def __add__(self, other: Circuit) -> Circuit:
        if other.m != self.m:
            raise CircuitError("cannot concatenate circuits of different width")
        return Circuit(self.m, self.elements + other.elements)

    def count(self, kind: type) -> int:
        return sum(isinstance(e, kind) for e in self.elements)


def compile_circuit(c: Circuit) -> np.ndarray:
    u = np.eye(c.m, dtype=complex)
    for el in c.elements:
        modes = list(el.modes)
        u[modes, :] = el.local_matrix() @ u[modes, :]
    return u


# --- rectangular mesh -------------------------------------------------------


def mesh_layout(m: int) -> list[tuple[int, int]]:
    """Mode pairs of the rectangular mesh, in application order.

    The layout is what :func:`decompose` emits for any ``m x m`` unitary, so a
    parameter vector over it reaches every unitary.
    """
    right, left = [], []
    for i in range(1, m):
        if i % 2:
            right.extend((i - j - 1, i - j) for j in range(i))
        else:
            left.extend((m + j - i - 2, m + j - i - 1) for j in range(1, i + 1))
    return right + left[::-1]


def n_mesh_params(m: int) -> int:
    return m * (m - 1) + m


def mesh_circuit(params: Sequence[float], m: int) -> Circuit:
    """Circuit from ``[theta_0, phi_0, theta_1, phi_1, ..., out_phase_0..m-1]``."""
    params = np.asarray(params, dtype=float)
    if params.shape != (n_mesh_params(m),):
        raise CircuitError(f"expected {n_mesh_params(m)} mesh parameters, got {params.shape}")
    els: list[Element] = []
    for k, (i, j) in enumerate(mesh_layout(m)):
        els.append(BeamSplitter(i, j, params[2 * k], params[2 * k + 1]))
    off = m * (m - 1)
    els.extend(PhaseShift(i, params[off + i]) for i in range(m))
    return Circuit(m, tuple(els))


def mesh_unitary(params: Sequence[float], m: int) -> np.ndarray:
    """Fast path of ``compile_circuit(mesh_circuit(params, m))``."""
    params = np.asarray(params, dtype=float)
    u = np.eye(m, dtype=complex)
    for k, (i, j) in enumerate(mesh_layout(m)):
        c, s = math.cos(params[2 * k]), math.sin(params[2 * k])
        e = complex(math.cos(params[2 * k + 1]), math.sin(params[2 * k + 1]))
        ri, rj = u[i].copy(), u[j]
        u[i] = c * ri + 1j * s / e * rj
        u[j] = 1j * s * e * ri + c * rj
    off = m * (m - 1)
    return np.exp(1j * params[off:off + m])[:, None] * u


def _null_right(a: complex, b: complex) -> tuple[float, float]:
    # a*c - i*b*e^{i phi}*s = 0
    if abs(a) < 1e-300:
        return 0.0, 0.0
    if abs(b) < 1e-300:
        return math.pi / 2, float(np.angle(-1j * a))
    return math.atan2(abs(a), abs(b)), float(np.angle(-1j * a / b))


def _null_left(a: complex, b: complex) -> tuple[float, float]:
    # i*e^{i phi}*s*a + c*b = 0
    if abs(b) < 1e-300:
        return 0.0, 0.0
    if abs(a) < 1e-300:
        return math.pi / 2, float(np.angle(1j * b))
    return math.atan2(abs(b), abs(a)), float(np.angle(1j * b / a))


def decompose_params(u) -> np.ndarray:
    """Mesh parameters (see :func:`mesh_circuit`) reproducing ``u``."""
    u = check_unitary(u, 1e-8).copy()
    m = u.shape[0]
    rights: list[tuple[int, int, float, float]] = []
    lefts: list[tuple[int, int, float, float]] = []
    for i in range(1, m):
        if i % 2:
            for j in range(i):
                p, q, r = i - j - 1, i - j, m - 1 - j
                theta, phi = _null_right(u[r, p], u[r, q])
                t_inv = bs_matrix(theta, phi).conj().T
                u[:, [p, q]] = u[:, [p, q]] @ t_inv
                rights.append((p, q, theta, phi))
        else:
            for j in range(1, i + 1):
                p, q, col = m + j - i - 2, m + j - i - 1, j - 1
                theta, phi = _null_left(u[p, col], u[q, col])
                u[[p, q], :] = bs_matrix(theta, phi) @ u[[p, q], :]
                lefts.append((p, q, theta, phi))
    d = np.diag(u).copy()
    # U = L1^-1 ... Lk^-1 D R_n ... R_1; push D leftwards through each L^-1.
    moved = []
    for p, q, theta, phi in reversed(lefts):
        # BS(-t, phi) D = D BS(-t, phi - arg(d_q/d_p)) = D BS(t, phi - arg(d_q/d_p) + pi)
        new_phi = phi - float(np.angle(d[q] / d[p])) + math.pi
        moved.append((p, q, theta, new_phi))
    # moved is Lk', ..., L1' in matrix-product order from the right; application
    # order after the R's is Lk' first.
    seq = rights + moved
    assert [(p, q) for p, q, _, _ in seq] == mesh_layout(m)
    params = []
    for _, _, theta, phi in seq:
        params += [theta, phi]
    params += list(np.angle(d))
    return np.array(params, dtype=float)


def decompose(u) -> Circuit:
    """Rectangular beam-splitter mesh plus output phases equal to ``u``."""
    u = np.asarray(u, dtype=complex)
    return mesh_circuit(decompose_params(u), u.shape[0])


def haar_unitary(m: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
