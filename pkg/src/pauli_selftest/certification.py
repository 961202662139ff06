"""Four-party network certification of an entangled target state.

Charlie and Daisy measure one half of auxiliary states shared with Alice
(on A0) and Bob (on B0); Alice and Bob then perform a joint measurement of
their auxiliary system with their half of the target. Witness coefficients
omega weight the resulting probabilities into the functional I.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .linalg import is_hermitian, kron, partial_trace
from .objects import (STAR, MeasurementFamily, Strategy, ideal_observables,
                      isotropic_state, max_entangled, parallel_family, pauli,
                      pauli_projector, projector)


@dataclass
class NetworkStrategy:
    """States and measurements of the network; factor orders are (C, A0),
    (A, B) and (B0, D). Alice's effects act on (A0, A) and Bob's on (B, B0).
    ``alice_local`` and ``bob_local`` hold the self-test measurements acting
    on A0 and B0 alone; the same settings appear in ``alice``/``bob``."""

    n: int
    aux_ca: np.ndarray
    target_ab: np.ndarray
    aux_bd: np.ndarray
    charlie: MeasurementFamily
    alice: MeasurementFamily
    bob: MeasurementFamily
    daisy: MeasurementFamily
    alice_local: MeasurementFamily = None
    bob_local: MeasurementFamily = None

    @property
    def d(self):
        return 2 ** self.n

    def with_target(self, target_ab):
        target_ab = np.asarray(target_ab, dtype=complex)
        if target_ab.shape != (self.d ** 2, self.d ** 2):
            raise ValueError(f"target must be {self.d ** 2}x{self.d ** 2}")
        return NetworkStrategy(self.n, self.aux_ca, target_ab, self.aux_bd, self.charlie,
                               self.alice, self.bob, self.daisy, self.alice_local,
                               self.bob_local)

    def charlie_alice(self):
        """The (C, A0) self-test as a Strategy on a density matrix."""
        dims = (2,) * self.n
        return Strategy(self.aux_ca, dims, dims, self.charlie, self.alice_local, self.n)

    def daisy_bob(self):
        """The (D, B0) self-test with Daisy in the role of Charlie."""
        d = self.d
        rho = self.aux_bd.reshape(d, d, d, d).transpose(1, 0, 3, 2).reshape(d * d, d * d)
        dims = (2,) * self.n
        return Strategy(rho, dims, dims, self.daisy, self.bob_local, self.n)


@dataclass
class Witness:
    """Witness operator on A (x) B with coefficients omega[(c, d, z, w)].

    Keys are tuples of per-copy outcomes (+1/-1) and settings (1..3); the
    witness equals sum omega * (x)_i pi_{c_i|z_i} (x) (x)_i pi_{d_i|w_i}.
    """

    matrix: np.ndarray
    omega: dict
    n: int

    @property
    def l1_norm(self):
        return float(sum(abs(v) for v in self.omega.values()))

    def reconstruct(self):
        return reconstruct_witness(self.omega, self.n)


@dataclass
class SteeredEnsemble:
    states: dict
    dim: int

    def marginals(self):
        out = {}
        for (c, z), tau in self.states.items():
            out[z] = out.get(z, 0) + tau
        return out

    def signalling_gap(self):
        ms = list(self.marginals().values())
        return max(float(np.max(np.abs(m - ms[0]))) for m in ms)


def _pauli_families(n):
    charlie, alice = ideal_observables()
    return ([dict(charlie) for _ in range(n)], [dict(alice) for _ in range(n)])


def _star_effect(d):
    phi = projector(max_entangled(d))
    eye = np.eye(d * d)
    return {1: phi, -1: eye - phi}


def _with_star(local, d, aux_first):
    """Embed a family on the auxiliary space into (aux, target) or
    (target, aux) order and add the dichotomic star setting."""
    star = _star_effect(d)
    outcomes = {s: local.outcomes(s) for s in local.settings}
    outcomes[STAR] = (1, -1)
    eye = np.eye(d)

    def effect(s, o):
        if s == STAR:
            return star[o]
        m = local.effect(s, o)
        return kron(m, eye) if aux_first else kron(eye, m)

    return MeasurementFamily(outcomes, effect, d * d)


def ideal_network(target_ab, n=1, visibility=1.0, transpose_charlie=False,
                  transpose_daisy=False):
    """Protocol network with maximally entangled auxiliaries (or isotropic
    ones of the given visibility), Pauli measurements for Charlie and Daisy
    and the Bell-state projection as Alice's and Bob's star setting."""
    d = 2 ** n
    target_ab = np.asarray(target_ab, dtype=complex)
    if target_ab.shape != (d * d, d * d):
        raise ValueError(f"target must be {d * d}x{d * d} for n={n}")
    aux = isotropic_state(visibility, d).astype(complex)
    c_sites, a_sites = _pauli_families(n)
    charlie = parallel_family(c_sites)
    daisy = parallel_family([dict(s) for s in c_sites])
    if transpose_charlie:
        charlie = charlie.map(np.transpose)
    if transpose_daisy:
        daisy = daisy.map(np.transpose)
    alice_local = parallel_family(a_sites, bsm=True)
    bob_local = parallel_family([dict(s) for s in a_sites], bsm=True)
    return NetworkStrategy(n, aux, target_ab, aux.copy(), charlie,
                           _with_star(alice_local, d, aux_first=True),
                           _with_star(bob_local, d, aux_first=False),
                           daisy, alice_local, bob_local)


def steered_states(ns, side="alice"):
    """tau_{c|z} on A0 (side 'alice') or tau_{d|w} on B0 (side 'bob')."""
    d = ns.d
    if side == "alice":
        fam, rho, keep, first = ns.charlie, ns.aux_ca, [1], True
    elif side == "bob":
        fam, rho, keep, first = ns.daisy, ns.aux_bd, [0], False
    else:
        raise ValueError("side must be 'alice' or 'bob'")
    eye = np.eye(d)
    states = {}
    for z in fam.settings:
        for c, m in fam.effects(z).items():
            op = kron(m, eye) if first else kron(eye, m)
            states[(c, z)] = partial_trace(op @ rho, keep, (d, d))
    return SteeredEnsemble(states, d)


def _steered(ns, side, c, z):
    d = ns.d
    eye = np.eye(d)
    if side == "alice":
        return partial_trace(kron(ns.charlie.effect(z, c), eye) @ ns.aux_ca, [1], (d, d))
    return partial_trace(kron(eye, ns.daisy.effect(z, c)) @ ns.aux_bd, [0], (d, d))


def _alice_operator(m, tau, d):
    """tr_A0[M (tau (x) 1_A)] for M on (A0, A)."""
    return np.einsum("aibk,ba->ik", m.reshape(d, d, d, d), tau)


def _bob_operator(m, sigma, d):
    """tr_B0[M (1_B (x) sigma)] for M on (B, B0)."""
    return np.einsum("iakb,ba->ik", m.reshape(d, d, d, d), sigma)


def _contract(x, y, rho, d):
    return complex(np.einsum("ij,kl,jlik->", x, y, rho.reshape(d, d, d, d)))


def network_probability(ns, c, z, a, x, b, y, d_out, w):
    """p(c, a, b, d | z, x, y, w) via the steered states."""
    d = ns.d
    tau = _steered(ns, "alice", c, z)
    sigma = _steered(ns, "bob", d_out, w)
    xa = _alice_operator(ns.alice.effect(x, a), tau, d)
    yb = _bob_operator(ns.bob.effect(y, b), sigma, d)
    return _contract(xa, yb, ns.target_ab, d).real


def global_probability(ns, c, z, a, x, b, y, d_out, w):
    """Same probability from the full product state; small n only."""
    rho = kron(ns.aux_ca, ns.target_ab, ns.aux_bd)
    op = kron(ns.charlie.effect(z, c), ns.alice.effect(x, a),
              ns.bob.effect(y, b), ns.daisy.effect(w, d_out))
    return float(np.trace(op @ rho).real)


def _site_basis(k):
    return pauli("i") if k == 0 else pauli(k)


def pauli_coefficients(w, n):
    """t[u, v] = tr[w (sigma_u (x) sigma_v)] / 4^n over all 2n-site Pauli
    strings, with 0 = identity and 1, 2, 3 = z, x, y."""
    m = 2 * n
    basis = np.array([_site_basis(k) for k in range(4)])
    t = np.asarray(w, dtype=complex).reshape((2,) * (2 * m))
    # t has axes r_0..r_{m-1}, c_0..c_{m-1}; contract site by site.
    for i in range(m):
        rows = m - i
        t = np.tensordot(t, basis, axes=([0, rows], [2, 1]))
        # contracted r_i and c_i; the new Pauli index is appended last
    return t.reshape((4,) * m) / 4 ** n


def _expand_site(k):
    if k == 0:
        return [(1, 1, 1.0), (-1, 1, 1.0)]
    return [(1, k, 1.0), (-1, k, -1.0)]


def decompose_witness(w, n=1, tol=1e-13):
    """Canonical omega from the Pauli expansion, identity routed via setting 1."""
    w = np.asarray(w, dtype=complex)
    d = 2 ** n
    if w.shape != (d * d, d * d):
        raise ValueError(f"witness must be {d * d}x{d * d} for n={n}")
    if not is_hermitian(w):
        raise ValueError("witness must be Hermitian")
    t = pauli_coefficients(w, n)
    omega = {}
    for idx in zip(*np.nonzero(np.abs(t) > tol)):
        idx = tuple(int(k) for k in idx)
        coef = float(t[idx].real)
        for terms in itertools.product(*[_expand_site(k) for k in idx]):
            outs = tuple(o for o, _, _ in terms)
            sets = tuple(s for _, s, _ in terms)
            sign = np.prod([f for _, _, f in terms])
            key = (outs[:n], outs[n:], sets[:n], sets[n:])
            omega[key] = omega.get(key, 0.0) + sign * coef
    omega = {k: float(v) for k, v in omega.items() if abs(v) > tol}
    return Witness(w, omega, n)


def reconstruct_witness(omega, n):
    d = 2 ** n
    total = np.zeros((d * d, d * d), dtype=complex)
    for (c, dd, z, w), value in omega.items():
        total += value * kron(*[pauli_projector(ci, zi) for ci, zi in zip(c, z)],
                              *[pauli_projector(di, wi) for di, wi in zip(dd, w)])
    return total


def witness_operator(ns, wit):
    """K with I = tr[K rho_AB] for every target state of this network."""
    if wit.n != ns.n:
        raise ValueError(f"witness is for n={wit.n}, network for n={ns.n}")
    d = ns.d
    m_a, m_b = ns.alice.effect(STAR, 1), ns.bob.effect(STAR, 1)
    xs, ys = {}, {}
    k = np.zeros((d * d, d * d), dtype=complex)
    for (c, dd, z, w), value in wit.omega.items():
        if (c, z) not in xs:
            xs[(c, z)] = _alice_operator(m_a, _steered(ns, "alice", c, z), d)
        if (dd, w) not in ys:
            ys[(dd, w)] = _bob_operator(m_b, _steered(ns, "bob", dd, w), d)
        k += value * kron(xs[(c, z)], ys[(dd, w)])
    return k


def certification_value(ns, wit):
    """I = sum omega p(c, +, +, d | z, star, star, w)."""
    k = witness_operator(ns, wit)
    return float(np.trace(k @ ns.target_ab).real)


def isotropic_witness(n=1):
    """2 (1 - d |Phi+_d><Phi+_d|); negative on states with fidelity > 1/d.

    For one copy this is 1 - XX + YY - ZZ, whose value on the Werner state
    of parameter p is 1 - 3p.
    """
    d = 2 ** n
    return 2 * (np.eye(d * d) - d * projector(max_entangled(d)))


def swap_witness():
    """1 + XX + YY + ZZ (twice the swap operator)."""
    return np.eye(4) + sum(kron(pauli(k), pauli(k)) for k in "xyz")


def _unit_vectors(angles, d):
    """Complex unit vectors from d-1 hyperspherical and d-1 phase angles."""
    theta, phi = angles[..., : d - 1], angles[..., d - 1:]
    mags = np.ones(angles.shape[:-1] + (d,))
    for j in range(d - 1):
        mags[..., j] *= np.cos(theta[..., j])
        mags[..., j + 1:] *= np.sin(theta[..., j])[..., None]
    phases = np.concatenate([np.zeros(angles.shape[:-1] + (1,)), phi], axis=-1)
    return mags * np.exp(1j * phases)


def _product_values(k4, a, b):
    return np.einsum("ni,nj,ijkl,nk,nl->n", a.conj(), b.conj(), k4, a, b).real


@dataclass
class SeparableSearch:
    min_value: float
    alice_state: np.ndarray
    bob_state: np.ndarray
    samples: int
    history: list = field(default_factory=list)


def separable_minimum(wit, ns_template, samples=10_000, restarts=16, sweeps=60, seed=42):
    """Minimize I over pure product targets |a>|b>.

    Random angle samples seed a coordinate descent with shrinking steps.
    I is linear in the target, so the result bounds every separable state.
    """
    d = ns_template.d
    k4 = witness_operator(ns_template, wit).reshape(d, d, d, d)
    rng = np.random.default_rng(seed)
    npar = 2 * (d - 1)
    scale = np.concatenate([np.full(d - 1, np.pi / 2), np.full(d - 1, 2 * np.pi)])
    pa = rng.random((samples, npar)) * scale
    pb = rng.random((samples, npar)) * scale
    values = _product_values(k4, _unit_vectors(pa, d), _unit_vectors(pb, d))
    best = np.argsort(values)[:restarts]

    def value(x):
        a = _unit_vectors(x[None, :npar], d)
        b = _unit_vectors(x[None, npar:], d)
        return float(_product_values(k4, a, b)[0])

    found = None
    for idx in best:
        x = np.concatenate([pa[idx], pb[idx]])
        fx = value(x)
        step = 0.5
        for _ in range(sweeps):
            improved = False
            for j in range(x.size):
                for delta in (step, -step):
                    trial = x.copy()
                    trial[j] += delta
                    ft = value(trial)
                    if ft < fx:
                        x, fx, improved = trial, ft, True
                        break
            if not improved:
                step /= 2
                if step < 1e-9:
                    break
        if found is None or fx < found[0]:
            found = (fx, x)
    fx, x = found
    return SeparableSearch(fx, _unit_vectors(x[:npar], d), _unit_vectors(x[npar:], d),
                           samples, [float(values.min())])


def network_records(ns, alice_settings=(STAR,), bob_settings=(STAR,)):
    """Correlation records {settings, outcomes, p} for the chosen Alice and
    Bob settings and every Charlie and Daisy setting."""
    for z in ns.charlie.settings:
        for x in alice_settings:
            for y in bob_settings:
                for w in ns.daisy.settings:
                    for c, a, b, dd in itertools.product(
                            ns.charlie.outcomes(z), ns.alice.outcomes(x),
                            ns.bob.outcomes(y), ns.daisy.outcomes(w)):
                        yield {
                            "settings": {"z": list(z), "x": x, "y": y, "w": list(w)},
                            "outcomes": {"c": list(c), "a": a, "b": b, "d": list(dd)},
                            "p": network_probability(ns, c, z, a, x, b, y, dd, w),
                        }

