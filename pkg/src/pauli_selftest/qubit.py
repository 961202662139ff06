"""Single-copy self-test: triple CHSH operator, its sum-of-squares
certificate and the swap isometry extracting Phi+ from a strategy."""

import warnings
from dataclasses import dataclass

import numpy as np

from . import swap
from .linalg import kron, regularize
from .objects import SQRT2, pauli

MAX_BELL_VALUE = 6 * SQRT2
# The six squared polynomials sum to sqrt(2) (6 sqrt2 - B); scaling each
# by 2^(1/4) turns the identity into 2 (6 sqrt2 - B) = sum_l P_l^2.
SOS_SCALE = 2 ** 0.25


@dataclass(frozen=True)
class BellOperator:
    matrix: np.ndarray
    max_quantum_value: float
    blocks: tuple = ()

    def value(self, state):
        state = np.asarray(state)
        if state.ndim == 1:
            return float(np.vdot(state, self.matrix @ state).real)
        return float(np.trace(self.matrix @ state).real)


@dataclass(frozen=True)
class SosReport:
    residuals: tuple
    bell_value: float

    @property
    def epsilon(self):
        return MAX_BELL_VALUE - self.bell_value


def _label(s, k):
    return (k,) if s.parallel else k


def qubit_observables(s):
    """Charlie's three and Alice's six observables of a single-copy strategy.

    Returns ``(charlie, alice)`` with charlie = [Z, X, Y] and
    alice = [D_zx, E_zx, D_zy, E_zy, D_xy, E_xy].
    """
    if s.parallel and s.n != 1:
        raise ValueError("expected a single-copy strategy")
    try:
        charlie = [s.charlie.observable(_label(s, z)) for z in (1, 2, 3)]
        alice = [s.alice.observable(_label(s, x)) for x in range(1, 7)]
    except (KeyError, TypeError) as err:
        raise ValueError(f"strategy does not have the 3/6-setting shape: {err}") from None
    for fam, labels in ((s.charlie, (1, 2, 3)), (s.alice, range(1, 7))):
        for k in labels:
            if set(fam.outcomes(_label(s, k))) != {1, -1}:
                raise ValueError("measurements must be dichotomic with outcomes +1/-1")
    return charlie, alice


def triple_chsh_blocks(charlie, alice, product=kron):
    """The three CHSH expressions built from Charlie's (Z, X, Y) and Alice's
    D/E observables; ``product`` combines a Charlie and an Alice operator."""
    z, x, y = charlie
    dzx, ezx, dzy, ezy, dxy, exy = alice
    return (
        product(z, dzx + ezx) + product(x, dzx - ezx),
        product(z, dzy + ezy) - product(y, dzy - ezy),
        product(x, dxy + exy) - product(y, dxy - exy),
    )


def build_triple_chsh(s):
    blocks = triple_chsh_blocks(*qubit_observables(s))
    return BellOperator(sum(blocks), MAX_BELL_VALUE, blocks)


def sos_terms(charlie, alice):
    """Six operators P_l with 2 (6 sqrt2 I - B) = sum_l P_l^dagger P_l."""
    z, x, y = charlie
    dzx, ezx, dzy, ezy, dxy, exy = alice
    ic, ia = np.eye(z.shape[0]), np.eye(dzx.shape[0])
    terms = (
        kron(z, ia) - kron(ic, dzx + ezx) / SQRT2,
        kron(x, ia) - kron(ic, dzx - ezx) / SQRT2,
        kron(z, ia) - kron(ic, dzy + ezy) / SQRT2,
        kron(y, ia) + kron(ic, dzy - ezy) / SQRT2,
        kron(x, ia) - kron(ic, dxy + exy) / SQRT2,
        kron(y, ia) + kron(ic, dxy - exy) / SQRT2,
    )
    return tuple(SOS_SCALE * t for t in terms)


def sos_residuals(s):
    charlie, alice = qubit_observables(s)
    bell = BellOperator(sum(triple_chsh_blocks(charlie, alice)), MAX_BELL_VALUE)
    if not s.is_pure:
        rho = s.state
        res = [np.sqrt(max(np.trace(p @ rho @ p.conj().T).real, 0.0))
               for p in sos_terms(charlie, alice)]
    else:
        res = [float(np.linalg.norm(p @ s.state)) for p in sos_terms(charlie, alice)]
    return SosReport(tuple(float(r) for r in res), bell.value(s.state))


def anticommutator_norms(s):
    """(||{Z,X} psi||, ||{Z,Y} psi||, ||{X,Y} psi||) for Charlie's observables."""
    (z, x, y), _ = qubit_observables(s)
    out = []
    for a, b in ((z, x), (z, y), (x, y)):
        v = s.apply(a @ b + b @ a, None)
        out.append(float(np.linalg.norm(v)))
    return tuple(out)


def circuit_operators(s):
    """Charlie's (Z, X, Y) and Alice's regularized (Z^, X^, Y^)."""
    (z, x, y), alice = qubit_observables(s)
    dzx, ezx, dzy, ezy = alice[:4]
    charlie_ops = tuple(regularize(o) for o in (z, x, y))
    alice_ops = (regularize((dzx + ezx) / SQRT2),
                 regularize((dzx - ezx) / SQRT2),
                 regularize((dzy - ezy) / SQRT2))
    return charlie_ops, alice_ops


def _require_pure(s):
    if not s.is_pure:
        raise ValueError("the swap circuit needs a pure state; purify it first")


def swap_isometry(s, epsilon=1e-6):
    """Run the swap circuit on |psi>|0000>.

    Returns ``(transformed, junk, fidelity)`` where ``fidelity`` is the overlap
    of the C'A' reduced state with Phi+. A warning is issued when the Bell
    value is more than ``epsilon`` below its maximum.
    """
    _require_pure(s)
    deficit = MAX_BELL_VALUE - build_triple_chsh(s).value(s.state)
    if deficit > epsilon:
        warnings.warn(f"Bell value is {deficit:.3g} below maximal; "
                      "the extraction is not guaranteed", stacklevel=2)
    charlie_ops, alice_ops = circuit_operators(s)
    out = swap.run_circuit(s.state, s.dim_c, s.dim_a, [charlie_ops], [alice_ops])
    junk = swap.decompose_junk(out, s.dim_c, s.dim_a, 1)
    return out, junk, junk.site_fidelities[0]


def pauli_action_residuals(s):
    """Residuals of U[O psi (x) 00] against the predicted output, O in {1,Z,X,Y}.

    The prediction uses xi = (1 (x) <Phi+|_{C'A'}) U[psi (x) 00]. The Y action
    carries a sigma_z on C''; ``Y_uncontrolled`` reports the residual
    obtained when that factor is dropped.
    """
    _require_pure(s)
    charlie_ops, alice_ops = circuit_operators(s)
    dc, da = s.dim_c, s.dim_a

    def run(vec):
        return swap.run_circuit(vec, dc, da, [charlie_ops], [alice_ops])

    xi = swap.project_reference(run(s.state), dc, da, 1)
    z_c2 = np.array([1.0, -1.0])

    def predicted(sigma, control):
        branch = xi * z_c2[None, None, :, None] if control else xi
        return np.einsum("abqr,kl->abqrkl", branch, sigma / SQRT2).reshape(-1)

    report = {"I": float(np.linalg.norm(run(s.state) - predicted(pauli("i"), False)))}
    for name, op, sigma in (("Z", charlie_ops[0], "z"), ("X", charlie_ops[1], "x"),
                            ("Y", charlie_ops[2], "y")):
        out = run(s.apply(op, None))
        report[name] = float(np.linalg.norm(out - predicted(pauli(sigma), name == "Y")))
        if name == "Y":
            report["Y_uncontrolled"] = float(
                np.linalg.norm(out - predicted(pauli(sigma), False)))
    return report
