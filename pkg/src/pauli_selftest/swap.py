"""Swap-isometry circuit shared by the single-copy and parallel self-tests.

Register layout of the circuit state, leftmost first:
    C, A, C''_1..C''_n, A''_1..A''_n, C'_1..C'_n, A'_1..A'_n
where C and A are the (possibly large) systems of the tested strategy and
every primed register is an auxiliary qubit starting in |0>.
"""

import os
from dataclasses import dataclass, field

import numpy as np

from .linalg import apply_controlled, apply_local

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
DEFAULT_MAX_QUBITS = 24
MAX_QUBITS_ENV = "PAULI_SELFTEST_MAX_QUBITS"


class ResourceCapExceeded(RuntimeError):
    """The circuit state would exceed the configured number of qubits."""


def max_qubits():
    value = os.environ.get(MAX_QUBITS_ENV)
    return DEFAULT_MAX_QUBITS if value is None else int(value)


@dataclass
class JunkDecomposition:
    """Junk states |xi_q> keyed by control bitstring q (site 1 first).

    ``off_diagonal`` is the total squared norm found on mismatched control
    branches <q|<r| with q != r, which vanishes for an exact self-test.
    """

    components: dict
    norms: dict
    off_diagonal: float = 0.0
    site_fidelities: list = field(default_factory=list)

    @property
    def weights(self):
        return {q: v ** 2 for q, v in self.norms.items()}

    @property
    def total_weight(self):
        return float(sum(self.weights.values()))


def register_dims(dim_c, dim_a, n):
    return (dim_c, dim_a) + (2,) * (4 * n)


def circuit_qubits(dim_c, dim_a, n):
    return float(np.log2(dim_c * dim_a)) + 4 * n


def _axes(n):
    c2 = [2 + i for i in range(n)]
    a2 = [2 + n + i for i in range(n)]
    c1 = [2 + 2 * n + i for i in range(n)]
    a1 = [2 + 3 * n + i for i in range(n)]
    return c2, a2, c1, a1


def run_circuit(psi, dim_c, dim_a, charlie_ops, alice_ops):
    """Apply the swap circuit to |psi> (x) |0...0>.

    ``charlie_ops[i]`` and ``alice_ops[i]`` are the (Z, X, Y) Hermitian
    unitaries of copy i acting on the whole C or A system.
    """
    n = len(charlie_ops)
    qubits = circuit_qubits(dim_c, dim_a, n)
    if qubits > max_qubits():
        raise ResourceCapExceeded(
            f"circuit needs {qubits:.0f} qubits, cap is {max_qubits()} "
            f"(set {MAX_QUBITS_ENV} to raise it)")
    dims = register_dims(dim_c, dim_a, n)
    c2, a2, c1, a1 = _axes(n)
    state = np.zeros((dim_c * dim_a, 2 ** (4 * n)), dtype=complex)
    state[:, 0] = psi
    v = state.reshape(-1)

    for ax in c2 + a2 + c1 + a1:
        v = apply_local(HADAMARD, [ax], v, dims)
    for i in range(n):
        v = apply_controlled(charlie_ops[i][0], [c1[i]], [0], v, dims)
        v = apply_controlled(alice_ops[i][0], [a1[i]], [1], v, dims)
    for ax in c1 + a1:
        v = apply_local(HADAMARD, [ax], v, dims)
    for i in range(n):
        v = apply_controlled(charlie_ops[i][1], [c1[i]], [0], v, dims)
        v = apply_controlled(alice_ops[i][1], [a1[i]], [1], v, dims)
    for i in range(n):
        z, x, y = charlie_ops[i]
        v = apply_controlled(1j * y @ x, [c2[i]], [0], v, dims)
        z, x, y = alice_ops[i]
        v = apply_controlled(1j * y @ x, [a2[i]], [1], v, dims)
    for ax in c2 + a2:
        v = apply_local(HADAMARD, [ax], v, dims)
    return v


def project_reference(v, dim_c, dim_a, n):
    """(<Phi+|^{(x)n} on C'A') v, as an array of shape (dC, dA, 2^n, 2^n)
    indexed by the C'' and A'' bitstrings."""
    t = v.reshape(dim_c, dim_a, 2 ** n, 2 ** n, 2 ** n, 2 ** n)
    return np.einsum("abqrkk->abqr", t) / np.sqrt(2 ** n)


def site_fidelity(v, dim_c, dim_a, n, i):
    """<Phi+| rho |Phi+> for the reduced state of C'_i A'_i."""
    dims = register_dims(dim_c, dim_a, n)
    _, _, c1, a1 = _axes(n)
    t = np.moveaxis(v.reshape(dims), [c1[i], a1[i]], [-2, -1]).reshape(-1, 4)
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    return float(np.linalg.norm(t @ phi) ** 2)


def bitstring(k, n):
    return format(k, f"0{n}b") if n else ""


def decompose_junk(v, dim_c, dim_a, n):
    xi = project_reference(v, dim_c, dim_a, n)
    components, norms = {}, {}
    off = 0.0
    for q in range(2 ** n):
        for r in range(2 ** n):
            block = xi[:, :, q, r].reshape(-1)
            if q == r:
                key = bitstring(q, n)
                components[key] = block
                norms[key] = float(np.linalg.norm(block))
            else:
                off += float(np.linalg.norm(block) ** 2)
    fids = [site_fidelity(v, dim_c, dim_a, n, i) for i in range(n)]
    return JunkDecomposition(components, norms, off, fids)
