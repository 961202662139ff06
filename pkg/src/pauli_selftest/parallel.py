"""Parallel self-test of n copies: coarse-grained observables, the n triple
CHSH values, the parallel swap circuit and the Bell-state-measurement
alignment table."""

import itertools
from dataclasses import dataclass

import numpy as np

from . import swap
from .linalg import regularize
from .objects import DIAMOND, FILLED_DIAMOND, SQRT2, Strategy
from .qubit import MAX_BELL_VALUE, triple_chsh_blocks

ALICE_PAIR_LABELS = ("Dzx", "Ezx", "Dzy", "Ezy", "Dxy", "Exy")
CHARLIE_LABELS = ("Z", "X", "Y")
CORRELATORS = ("I", "ZZ", "XX", "YY")
# Rows of the alignment table: Bell outcome a -> expected <S_a (x) R> for
# R in (I, ZZ, XX, YY). The same rows hold for the shifted pairs.
BSM_TABLE = {
    0: (0.25, 0.25, 0.25, -0.25),
    1: (0.25, 0.25, -0.25, 0.25),
    2: (0.25, -0.25, 0.25, 0.25),
    3: (0.25, -0.25, -0.25, -0.25),
}


@dataclass
class CoarseObservables:
    """Averaged observables per copy plus access to the sharp versions.

    ``charlie[(i, 'Z')]`` averages O_{i|z} over all z with z_i = 1, and
    ``alice[(i, 'Dzx')]`` averages P_{i|x} over all x with x_i = 1, etc.
    """

    n: int
    charlie: dict
    alice: dict
    strategy: Strategy

    def sharp_charlie(self, i, label, k=1):
        """O_{i|z} for the k-th (1-based, lexicographic) z with z_i fixed."""
        z = _compatible(self.n, i, CHARLIE_LABELS.index(label) + 1, 3, k)
        return site_observable(self.strategy.charlie, z, i)

    def sharp_alice(self, i, label, k=1):
        x = _compatible(self.n, i, ALICE_PAIR_LABELS.index(label) + 1, 6, k)
        return site_observable(self.strategy.alice, x, i)

    def charlie_ops(self, i):
        return [self.charlie[(i, lab)] for lab in CHARLIE_LABELS]

    def alice_ops(self, i):
        return [self.alice[(i, lab)] for lab in ALICE_PAIR_LABELS]


def _compatible(n, i, value, base, k):
    others = list(itertools.product(range(1, base + 1), repeat=n - 1))
    rest = others[k - 1]
    return tuple(rest[:i]) + (value,) + tuple(rest[i:])


def site_observable(family, setting, i):
    """sum_c c_i Pi_{c|setting}: the observable of copy i within a setting."""
    return family.observable(setting, sign=lambda c: c[i])


def _check_shape(s, n):
    if not s.parallel or s.n != n:
        raise ValueError(f"strategy is not shaped for {n} parallel copies")


def coarse_grain(s, n):
    _check_shape(s, n)
    charlie, alice = {}, {}
    for i in range(n):
        for fam, labels, base, out in ((s.charlie, CHARLIE_LABELS, 3, charlie),
                                       (s.alice, ALICE_PAIR_LABELS, 6, alice)):
            for v, lab in enumerate(labels, start=1):
                settings = [_compatible(n, i, v, base, k) for k in range(1, base ** (n - 1) + 1)]
                out[(i, lab)] = sum(site_observable(fam, t, i) for t in settings) / len(settings)
    return CoarseObservables(n, charlie, alice, s)


def parallel_bell_values(s, n, coarse=None):
    """Value of the triple CHSH expression of each copy."""
    coarse = coarse or coarse_grain(s, n)
    values = []
    for i in range(n):
        blocks = triple_chsh_blocks(coarse.charlie_ops(i), coarse.alice_ops(i),
                                    product=lambda c, a: s.expectation(c, a))
        values.append(float(np.real(sum(blocks))))
    return values


def circuit_operators(coarse, k=1):
    """Per-copy Charlie (Z, X, Y) sharp operators and Alice's regularized ones."""
    charlie_ops, alice_ops = [], []
    for i in range(coarse.n):
        charlie_ops.append(tuple(regularize(coarse.sharp_charlie(i, lab, k))
                                 for lab in CHARLIE_LABELS))
        dzx, ezx, dzy, ezy = (coarse.alice[(i, lab)] for lab in ALICE_PAIR_LABELS[:4])
        alice_ops.append((regularize((dzx + ezx) / SQRT2),
                          regularize((dzx - ezx) / SQRT2),
                          regularize((dzy - ezy) / SQRT2)))
    return charlie_ops, alice_ops


def parallel_swap_isometry(s, n, k=1):
    """Run the n-copy swap circuit; returns the junk decomposition whose
    ``site_fidelities`` hold the Phi+ overlap of every C'_i A'_i pair."""
    _check_shape(s, n)
    if not s.is_pure:
        raise ValueError("the swap circuit needs a pure state")
    charlie_ops, alice_ops = circuit_operators(coarse_grain(s, n), k)
    out = swap.run_circuit(s.state, s.dim_c, s.dim_a, charlie_ops, alice_ops)
    return swap.decompose_junk(out, s.dim_c, s.dim_a, n)


@dataclass
class BsmCorrelationReport:
    """``table[(family, l, a, R)]`` = <psi| S_{l,a} (x) R |psi> where family is
    'S' (pairs 2l-1, 2l) or 'T' (pairs 2l, 2l+1), l is 1-based."""

    table: dict
    max_deviation: float

    def deviation(self, key):
        return abs(self.table[key] - BSM_TABLE[key[2]][CORRELATORS.index(key[3])])


def pair_correlator(s, n, first, label, k=1):
    """Charlie's product observable O_{first} O_{first+1} from the k-th setting
    in which both copies use ``label``."""
    value = CHARLIE_LABELS.index(label) + 1
    others = list(itertools.product((1, 2, 3), repeat=n - 2))[k - 1]
    z = others[:first] + (value, value) + others[first:]
    return site_observable(s.charlie, z, first) @ site_observable(s.charlie, z, first + 1)


def bsm_correlations(s, n, k=1):
    _check_shape(s, n)
    if n < 2:
        raise ValueError("the alignment table needs at least two copies")
    if DIAMOND not in s.alice.settings or FILLED_DIAMOND not in s.alice.settings:
        raise ValueError("strategy lacks the Bell-state-measurement settings")
    table = {}
    for fam, setting, start in (("S", DIAMOND, 0), ("T", FILLED_DIAMOND, 1)):
        outcomes = s.alice.outcomes(setting)
        m = len(outcomes[0]) if outcomes else 0
        for l in range(m):
            first = start + 2 * l
            cor = {"I": None}
            for lab in CHARLIE_LABELS:
                cor[lab * 2] = pair_correlator(s, n, first, lab, k)
            for a in range(4):
                proj = sum(e for o, e in s.alice.effects(setting).items() if o[l] == a)
                for name in CORRELATORS:
                    table[(fam, l + 1, a, name)] = s.expectation(cor[name], proj).real
    devs = [abs(v - BSM_TABLE[key[2]][CORRELATORS.index(key[3])]) for key, v in table.items()]
    return BsmCorrelationReport(table, max(devs, default=0.0))


def bsm_identity_residuals(s, n, k=1):
    """For each pair l: ||S_{l,0} psi - (1 + ZZ + XX - YY) psi / 4|| and
    ||(XX ZZ + YY) psi||, with Charlie's sharp pair observables."""
    _check_shape(s, n)
    out = []
    for l in range(n // 2):
        first = 2 * l
        zz, xx, yy = (pair_correlator(s, n, first, lab, k) for lab in CHARLIE_LABELS)
        proj = sum(e for o, e in s.alice.effects(DIAMOND).items() if o[l] == 0)
        lhs = s.apply(None, proj)
        rhs = s.apply((np.eye(s.dim_c) + zz + xx - yy) / 4, None)
        out.append((float(np.linalg.norm(lhs - rhs)),
                    float(np.linalg.norm(s.apply(xx @ zz + yy, None)))))
    return out


def verify_junk_branches(s, n, tol=1e-9, k=1):
    """Check the two-branch junk structure when its hypotheses hold.

    Returns a dict with ``applicable`` (hypotheses met within ``tol``),
    ``aligned`` and ``two_term_residual`` (junk weight outside the all-zero
    and all-one branches, including mismatched control branches).
    """
    bell = parallel_bell_values(s, n)
    bell_gap = max(abs(b - MAX_BELL_VALUE) for b in bell)
    report = {"bell_values": bell, "bell_gap": bell_gap}
    if n >= 2:
        report["bsm_deviation"] = bsm_correlations(s, n, k).max_deviation
    else:
        report["bsm_deviation"] = 0.0
    report["applicable"] = bell_gap <= tol and report["bsm_deviation"] <= tol
    if not report["applicable"]:
        report["aligned"] = None
        report["two_term_residual"] = None
        return report
    junk = parallel_swap_isometry(s, n, k)
    allowed = {"0" * n, "1" * n}
    residual = junk.off_diagonal + sum(w for q, w in junk.weights.items() if q not in allowed)
    report["two_term_residual"] = float(residual)
    report["aligned"] = residual <= tol
    report["junk_weights"] = junk.weights
    return report


def site_relation_residuals(s, n, k=1):
    """max_i ||(Z_i^(k) - Z^_{i+n}) psi|| over labels Z, X and the analogous
    ||(Y_i^(k) + Y^_{i+n}) psi|| for Y, on Charlie's sharp operators."""
    coarse = coarse_grain(s, n)
    charlie_ops, alice_ops = circuit_operators(coarse, k)
    worst = 0.0
    for i in range(n):
        for j, sign in ((0, -1), (1, -1), (2, 1)):
            v = s.apply(charlie_ops[i][j], None) + sign * s.apply(None, alice_ops[i][j])
            worst = max(worst, float(np.linalg.norm(v)))
    return worst


def commutation_residual(s, n, k=1, k2=1):
    """max over sites i != j and labels of ||[O_i^(k), O_j^(k2)] psi||."""
    coarse = coarse_grain(s, n)
    worst = 0.0
    for i, j in itertools.permutations(range(n), 2):
        for a, b in itertools.product(CHARLIE_LABELS, repeat=2):
            oa, ob = coarse.sharp_charlie(i, a, k), coarse.sharp_charlie(j, b, k2)
            worst = max(worst, float(np.linalg.norm(s.apply(oa @ ob - ob @ oa, None))))
    return worst
