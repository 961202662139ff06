"""States, observables and measurement families used by the protocols.

Setting labels follow one convention throughout: for Charlie 1, 2, 3 select
sigma_z, sigma_x, sigma_y; for Alice 1..6 select D and E (odd and even) for
the Pauli pairs (z, x), (z, y), (x, y). Dichotomic outcomes are +1 and -1.
Parallel strategies use tuples of these labels, one entry per copy, and two
extra Alice settings performing Bell-state measurements on neighbouring
qubit pairs.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .linalg import HERMITIAN_TOL, kron

SQRT2 = np.sqrt(2.0)

I2 = np.eye(2, dtype=complex)
SIGMA = {
    "i": I2,
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
SETTING_AXIS = {1: "z", 2: "x", 3: "y"}
ALICE_SETTINGS = {
    1: ("z", "x", +1), 2: ("z", "x", -1),
    3: ("z", "y", +1), 4: ("z", "y", -1),
    5: ("x", "y", +1), 6: ("x", "y", -1),
}
DIAMOND = "diamond"
FILLED_DIAMOND = "filled_diamond"
STAR = "star"


def pauli(which):
    """Pauli matrix for 'x', 'y', 'z' (or 'i'), or for a setting label 1..3."""
    key = SETTING_AXIS.get(which, which)
    try:
        return SIGMA[key].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli label {which!r}") from None


def pauli_projector(c, z):
    """Projector (I + c sigma_z) / 2 onto outcome c = +-1 of setting z."""
    if c not in (1, -1):
        raise ValueError(f"outcome must be +1 or -1, got {c!r}")
    if z not in SETTING_AXIS:
        raise ValueError(f"setting must be 1, 2 or 3, got {z!r}")
    return (I2 + c * pauli(z)) / 2


def alice_observable(x):
    """D = (s_i + s_j)/sqrt2 for odd x and E = (s_i - s_j)/sqrt2 for even x."""
    i, j, sign = ALICE_SETTINGS[x]
    return (pauli(i) + sign * pauli(j)) / SQRT2


def bell_state(k):
    """Bell basis vector k: Phi+, Phi-, Psi+, Psi- for k = 0..3."""
    vecs = {
        0: [1, 0, 0, 1],
        1: [1, 0, 0, -1],
        2: [0, 1, 1, 0],
        3: [0, 1, -1, 0],
    }
    if k not in vecs:
        raise ValueError(f"Bell index must be 0..3, got {k!r}")
    return np.array(vecs[k], dtype=complex) / SQRT2


def max_entangled(d):
    """sum_i |ii> / sqrt(d)."""
    if int(d) < 1:
        raise ValueError("dimension must be positive")
    return np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)


def projector(v):
    v = np.asarray(v)
    return np.outer(v, v.conj())


def isotropic_state(p, d):
    """p |Phi+_d><Phi+_d| + (1 - p) I / d^2."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return p * projector(max_entangled(d)) + (1 - p) * np.eye(d * d) / d ** 2


def werner_state(p):
    """Two-qubit Werner state p |Phi+><Phi+| + (1 - p) I / 4."""
    return isotropic_state(p, 2)


def as_density(state):
    state = np.asarray(state)
    return projector(state) if state.ndim == 1 else state


class MeasurementFamily:
    """A collection of settings, each with labelled outcomes and effects.

    Effects are produced on demand by ``effect_fn(setting, outcome)`` so that
    families with thousands of settings never hold every matrix at once.
    """

    def __init__(self, outcomes, effect_fn, dim):
        self._outcomes = {s: tuple(o) for s, o in outcomes.items()}
        self._effect_fn = effect_fn
        self.dim = int(dim)

    @classmethod
    def from_effects(cls, effects):
        effects = {s: {o: np.asarray(m) for o, m in e.items()} for s, e in effects.items()}
        dims = {m.shape[0] for e in effects.values() for m in e.values()}
        if len(dims) != 1:
            raise ValueError("all effects must share one dimension")
        return cls({s: tuple(e) for s, e in effects.items()},
                   lambda s, o: effects[s][o], dims.pop())

    @classmethod
    def from_observables(cls, observables):
        """Dichotomic family with effects (I +- O)/2 for each observable O."""
        obs = {s: np.asarray(o) for s, o in observables.items()}
        dim = next(iter(obs.values())).shape[0]
        eye = np.eye(dim)
        return cls({s: (1, -1) for s in obs},
                   lambda s, c: (eye + c * obs[s]) / 2, dim)

    @property
    def settings(self):
        return tuple(self._outcomes)

    def outcomes(self, setting):
        try:
            return self._outcomes[setting]
        except KeyError:
            raise KeyError(f"unknown setting {setting!r}") from None

    def effect(self, setting, outcome):
        if outcome not in self.outcomes(setting):
            raise KeyError(f"unknown outcome {outcome!r} for setting {setting!r}")
        return self._effect_fn(setting, outcome)

    def effects(self, setting):
        return {o: self._effect_fn(setting, o) for o in self.outcomes(setting)}

    def observable(self, setting, sign=None):
        """sum_o sign(o) M_o; by default the outcome label itself is the sign."""
        sign = sign or (lambda o: o)
        return sum(sign(o) * m for o, m in self.effects(setting).items())

    def map(self, fn, dim=None):
        """New family whose effects are ``fn(effect)``."""
        return MeasurementFamily(self._outcomes, lambda s, o: fn(self._effect_fn(s, o)),
                                 self.dim if dim is None else dim)

    def check(self, tol=HERMITIAN_TOL, settings=None):
        """Raise ValueError unless every setting is a complete PSD measurement."""
        eye = np.eye(self.dim)
        for s in self.settings if settings is None else settings:
            total = np.zeros((self.dim, self.dim), dtype=complex)
            for o, m in self.effects(s).items():
                if np.max(np.abs(m - m.conj().T)) > tol:
                    raise ValueError(f"effect {o!r} of setting {s!r} is not Hermitian")
                if np.linalg.eigvalsh(m)[0] < -tol:
                    raise ValueError(f"effect {o!r} of setting {s!r} is not PSD")
                total = total + m
            if np.max(np.abs(total - eye)) > tol:
                raise ValueError(f"effects of setting {s!r} do not sum to identity")


@dataclass(frozen=True)
class Strategy:
    """A bipartite realization: a state on C (x) A and one family per party.

    ``state`` is normally a unit vector; a density matrix is accepted for
    functions that only need expectation values. ``n`` is the number of
    parallel copies the setting labels refer to (tuple labels when the
    strategy was built by ``parallel_strategy``).
    """

    state: np.ndarray
    c_dims: tuple
    a_dims: tuple
    charlie: MeasurementFamily
    alice: MeasurementFamily
    n: int = 1

    def __post_init__(self):
        dc, da = self.dim_c, self.dim_a
        shape = np.asarray(self.state).shape
        if shape not in ((dc * da,), (dc * da, dc * da)):
            raise ValueError(f"state shape {shape} does not match dims {dc}x{da}")
        if self.charlie.dim != dc or self.alice.dim != da:
            raise ValueError("measurement dimensions do not match the state")

    @property
    def dim_c(self):
        return int(np.prod(self.c_dims))

    @property
    def dim_a(self):
        return int(np.prod(self.a_dims))

    @property
    def is_pure(self):
        return np.asarray(self.state).ndim == 1

    @property
    def parallel(self):
        return isinstance(self.charlie.settings[0], tuple)

    def apply(self, c_op=None, a_op=None, vec=None):
        """(c_op (x) a_op) applied to ``vec`` (default: the state)."""
        psi = (self.state if vec is None else vec).reshape(self.dim_c, self.dim_a)
        if c_op is not None:
            psi = c_op @ psi
        if a_op is not None:
            psi = psi @ a_op.T
        return psi.reshape(-1)

    def expectation(self, c_op=None, a_op=None):
        """<c_op (x) a_op>; identity where an operator is omitted."""
        c_op = np.eye(self.dim_c) if c_op is None else c_op
        a_op = np.eye(self.dim_a) if a_op is None else a_op
        if self.is_pure:
            return complex(np.vdot(self.state, self.apply(c_op, a_op)))
        rho = self.state.reshape(self.dim_c, self.dim_a, self.dim_c, self.dim_a)
        return complex(np.einsum("ijkl,ki,lj->", rho, c_op, a_op))

    def probability(self, z, x, c, a):
        return self.expectation(self.charlie.effect(z, c), self.alice.effect(x, a)).real


def correlation_table(s):
    """Every p(c, a | z, x) of a strategy, keyed by (z, x, c, a)."""
    table = {}
    for z in s.charlie.settings:
        c_eff = s.charlie.effects(z)
        for x in s.alice.settings:
            a_eff = s.alice.effects(x)
            for c, m in c_eff.items():
                for a, n in a_eff.items():
                    table[(z, x, c, a)] = s.expectation(m, n).real
    return table


def qubit_strategy(state, charlie_obs, alice_obs, c_dims=(2,), a_dims=(2,)):
    """Dichotomic strategy from observables acting on the full C and A spaces."""
    return Strategy(np.asarray(state, dtype=complex), tuple(c_dims), tuple(a_dims),
                    MeasurementFamily.from_observables(charlie_obs),
                    MeasurementFamily.from_observables(alice_obs))


def ideal_observables():
    charlie = {z: pauli(z) for z in SETTING_AXIS}
    alice = {x: alice_observable(x) for x in ALICE_SETTINGS}
    return charlie, alice


def ideal_qubit_strategy():
    """Phi+ with Pauli measurements for Charlie and D/E measurements for Alice."""
    charlie, alice = ideal_observables()
    return qubit_strategy(bell_state(0), charlie, alice)


def transpose_strategy(s):
    """Transpose every measurement operator; the (real) state is unchanged."""
    if np.max(np.abs(np.imag(s.state)), initial=0.0) > 1e-12:
        raise ValueError("transposition equivalence needs a real state")
    return Strategy(s.state, s.c_dims, s.a_dims,
                    s.charlie.map(np.transpose), s.alice.map(np.transpose), s.n)


def _pair_effects(pairs_from, n):
    """Layout of a Bell-state measurement on pairs (k, k+1) starting at
    0-based site ``pairs_from``: returns (number of pairs, leading singles,
    trailing singles)."""
    m = max(0, (n - pairs_from) // 2)
    return m, pairs_from, n - pairs_from - 2 * m


def _bsm_family_entries(n, pairs_from):
    m, lead, trail = _pair_effects(pairs_from, n)
    outcomes = tuple(itertools.product(range(4), repeat=m))
    bell = [projector(bell_state(k)) for k in range(4)]

    def effect(a):
        return kron(np.eye(2 ** lead), *[bell[k] for k in a], np.eye(2 ** trail))

    return outcomes, effect


def parallel_family(site_observables, bsm=False):
    """Product measurements on n qubits, labelled by tuples of site settings.

    ``site_observables[i]`` maps each setting label to a 2x2 observable of
    site i. With ``bsm=True`` the Bell-state-measurement settings on pairs
    (1,2),(3,4),... (``DIAMOND``) and (2,3),(4,5),... (``FILLED_DIAMOND``)
    are added.
    """
    n = len(site_observables)
    labels = [tuple(obs) for obs in site_observables]
    proj = [{(s, c): (I2 + c * o) / 2 for s, o in obs.items() for c in (1, -1)}
            for obs in site_observables]
    outcomes = {}
    signs = tuple(itertools.product((1, -1), repeat=n))
    for setting in itertools.product(*labels):
        outcomes[setting] = signs
    bsm_effects = {}
    if bsm:
        for label, start in ((DIAMOND, 0), (FILLED_DIAMOND, 1)):
            outs, fn = _bsm_family_entries(n, start)
            outcomes[label] = outs
            bsm_effects[label] = fn

    def effect(setting, outcome):
        if setting in bsm_effects:
            return bsm_effects[setting](outcome)
        return kron(*[proj[i][(setting[i], outcome[i])] for i in range(n)])

    return MeasurementFamily(outcomes, effect, 2 ** n)


def parallel_state(n):
    """|Phi+>^{(x)n} pairing C_i with A_i, factor order C_1..C_n A_1..A_n.

    This is exactly the maximally entangled state of dimension 2^n.
    """
    return max_entangled(2 ** n)


def parallel_strategy(n, transposed_sites=(), charlie_sites=None, alice_sites=None):
    """n copies of the ideal qubit strategy measured independently.

    ``transposed_sites`` (0-based) lists copies whose measurements use
    sigma_y -> -sigma_y; custom per-site observables may replace the ideal ones.
    """
    if not 1 <= n <= 4:
        raise ValueError(f"n must be between 1 and 4, got {n}")
    charlie, alice = ideal_observables()
    charlie_sites = charlie_sites or [dict(charlie) for _ in range(n)]
    alice_sites = alice_sites or [dict(alice) for _ in range(n)]
    for i in transposed_sites:
        charlie_sites[i] = {k: o.T for k, o in charlie_sites[i].items()}
        alice_sites[i] = {k: o.T for k, o in alice_sites[i].items()}
    dims = (2,) * n
    return Strategy(parallel_state(n), dims, dims,
                    parallel_family(charlie_sites),
                    parallel_family(alice_sites, bsm=True), n)


def direct_sum(s0, s1, weight=0.5):
    """Block-diagonal combination sqrt(1-w)|psi0>|00> + sqrt(w)|psi1>|11>.

    A flag qubit is appended to each side; each party measures its family
    conditioned on the flag. Both strategies need identical labels and dims.
    """
    if (s0.c_dims, s0.a_dims) != (s1.c_dims, s1.a_dims):
        raise ValueError("direct sum needs equal dimensions")
    dc, da = s0.dim_c, s0.dim_a
    psi = np.zeros((dc, 2, da, 2), dtype=complex)
    psi[:, 0, :, 0] = np.sqrt(1 - weight) * s0.state.reshape(dc, da)
    psi[:, 1, :, 1] = np.sqrt(weight) * s1.state.reshape(dc, da)
    flags = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]

    def combine(f0, f1):
        return MeasurementFamily(
            {s: f0.outcomes(s) for s in f0.settings},
            lambda s, o: kron(f0.effect(s, o), flags[0]) + kron(f1.effect(s, o), flags[1]),
            2 * f0.dim)

    return Strategy(psi.reshape(-1), s0.c_dims + (2,), s0.a_dims + (2,),
                    combine(s0.charlie, s1.charlie), combine(s0.alice, s1.alice), s0.n)


def werner_purification(v):
    """Pure state on (C, C', C'') (x) (A, A', A'') whose (C, A) marginal is
    the Werner state of visibility v; the primed qubits are junk."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v}")
    phi = bell_state(0).reshape(2, 2)
    e0 = np.array([1.0, 0.0])
    e1 = np.array([0.0, 1.0])
    # axes: C, C', C'', A, A', A''
    signal = np.einsum("ad,b,c,e,f->abcdef", phi, e0, e0, e0, e0)
    noise = np.einsum("ab,de,c,f->abcdef", phi, phi, e1, e1)
    return (np.sqrt(v) * signal + np.sqrt(1 - v) * noise).reshape(-1).astype(complex)


def werner_strategy(v):
    """Ideal measurements on the purified Werner state of visibility v."""
    charlie, alice = ideal_observables()
    junk = np.eye(4)
    return qubit_strategy(werner_purification(v),
                          {k: kron(o, junk) for k, o in charlie.items()},
                          {k: kron(o, junk) for k, o in alice.items()},
                          c_dims=(2, 2, 2), a_dims=(2, 2, 2))
