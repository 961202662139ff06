"""Dense and matrix-free linear algebra on tensor-factored Hilbert spaces.

Factor 0 is the leftmost tensor factor and composite basis indices are
big-endian in factor order, so ``kron(a, b)`` places ``a`` on factor 0.
Operators are plain complex ``numpy`` arrays and state vectors are 1-D
complex arrays accompanied by a tuple of factor dimensions.
"""

from functools import reduce

import numpy as np

HERMITIAN_TOL = 1e-10


def kron(*ops):
    """Kronecker product of one or more matrices, leftmost factor first."""
    if not ops:
        raise ValueError("kron needs at least one operand")
    return reduce(np.kron, (np.asarray(op) for op in ops))


def is_hermitian(m, tol=HERMITIAN_TOL):
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(
        np.abs(m - m.conj().T), initial=0.0) <= tol


def _check_targets(targets, dims):
    targets = [int(t) for t in targets]
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target in {targets}")
    for t in targets:
        if not 0 <= t < len(dims):
            raise ValueError(f"target {t} out of range for {len(dims)} factors")
    return targets


def apply_local(op, targets, v, dims):
    """Apply ``op`` to the factors ``targets`` of ``v`` without padding it.

    ``op`` acts on the targeted factors in the order given, so
    ``apply_local(U, [2, 0], ...)`` treats factor 2 as the leading index of U.
    """
    dims = tuple(int(d) for d in dims)
    targets = _check_targets(targets, dims)
    v = np.asarray(v)
    if v.shape != (int(np.prod(dims)),):
        raise ValueError(f"state of shape {v.shape} does not match dims {dims}")
    op = np.asarray(op)
    k = int(np.prod([dims[t] for t in targets]))
    if op.shape != (k, k):
        raise ValueError(f"operator shape {op.shape} does not match targets (dim {k})")
    psi = v.reshape(dims)
    psi = np.moveaxis(psi, targets, range(len(targets)))
    rest = psi.shape[len(targets):]
    out = (op @ psi.reshape(k, -1)).reshape(tuple(dims[t] for t in targets) + rest)
    out = np.moveaxis(out, range(len(targets)), targets)
    return out.reshape(-1)


def apply_controlled(op, controls, targets, v, dims, control_value=1):
    """Apply ``op`` on ``targets`` in the branch where every control qubit equals
    ``control_value``; other branches are left untouched."""
    dims = tuple(int(d) for d in dims)
    controls = _check_targets(controls, dims)
    targets = _check_targets(targets, dims)
    if set(controls) & set(targets):
        raise ValueError("controls and targets overlap")
    psi = np.array(v, dtype=complex).reshape(dims)
    index = [slice(None)] * len(dims)
    for c in controls:
        index[c] = control_value
    index = tuple(index)
    sub = psi[index]
    remaining = [i for i in range(len(dims)) if i not in controls]
    sub_dims = tuple(dims[i] for i in remaining)
    sub_targets = [remaining.index(t) for t in targets]
    psi[index] = apply_local(op, sub_targets, sub.reshape(-1), sub_dims).reshape(sub.shape)
    return psi.reshape(-1)


def embed(op, targets, dims):
    """Dense padding of ``op`` to the full space; meant for small spaces and tests."""
    dims = tuple(int(d) for d in dims)
    n = int(np.prod(dims))
    cols = [apply_local(op, targets, col, dims) for col in np.eye(n, dtype=complex)]
    return np.array(cols).T


def partial_trace(m, keep, dims):
    """Trace out every factor not listed in ``keep``; kept factors stay in order."""
    dims = tuple(int(d) for d in dims)
    m = np.asarray(m)
    n = int(np.prod(dims))
    if m.shape != (n, n):
        raise ValueError(f"matrix of shape {m.shape} does not match dims {dims}")
    keep = sorted(_check_targets(keep, dims))
    k = len(dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    if 2 * k > len(letters):
        raise ValueError("too many factors")
    row = list(letters[:k])
    col = [letters[k + i] if i in keep else row[i] for i in range(k)]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    t = np.einsum("".join(row) + "".join(col) + "->" + out, m.reshape(dims + dims))
    d = int(np.prod([dims[i] for i in keep]))
    return t.reshape(d, d)


def eigh(m, tol=HERMITIAN_TOL):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending."""
    m = np.asarray(m)
    if not is_hermitian(m, tol):
        raise ValueError("eigh requires a Hermitian matrix")
    return np.linalg.eigh((m + m.conj().T) / 2)


def regularize(m, tol=HERMITIAN_TOL):
    """Replace every eigenvalue by its sign, mapping zero to +1.

    The result is a Hermitian unitary sharing eigenvectors with ``m``.
    Eigenvalues within ``tol`` of zero count as zero.
    """
    w, v = eigh(m, tol)
    signs = np.where(w < -tol, -1.0, 1.0)
    return (v * signs) @ v.conj().T
