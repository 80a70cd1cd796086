"""Hermitian eigendecomposition by cyclic Jacobi rotations.

The sweep uses a round-robin (tournament) ordering so that each round
rotates ``d // 2`` disjoint index pairs at once; one sweep visits every
pair exactly once, as in the row-cyclic order, but each round is a single
dense matrix product.
"""

import numpy as np

OFFDIAG_RTOL = 1e-12
MAX_SWEEPS = 100


class EigensolverError(RuntimeError):
    """Raised when the Jacobi iteration fails to converge."""


def _round_robin(d):
    # Circle method: index 0 is fixed, the rest rotate. Odd d gets a bye slot.
    m = d if d % 2 == 0 else d + 1
    idx = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = []
        for i in range(m // 2):
            p, q = idx[i], idx[m - 1 - i]
            if p < d and q < d:
                pairs.append((min(p, q), max(p, q)))
        rounds.append(np.array(pairs, dtype=np.intp).reshape(-1, 2))
        idx = [idx[0]] + [idx[-1]] + idx[1:-1]
    return rounds


_ROUNDS_CACHE = {}


def _rounds(d):
    if d not in _ROUNDS_CACHE:
        _ROUNDS_CACHE[d] = _round_robin(d)
    return _ROUNDS_CACHE[d]


def _offdiag_norm(a):
    d = a.shape[-1]
    off = a * (1.0 - np.eye(d))
    return np.linalg.norm(off, axis=(-2, -1))


def jacobi_eigh(a, rtol=OFFDIAG_RTOL, max_sweeps=MAX_SWEEPS):
    """Eigenvalues and eigenvectors of a Hermitian matrix or a stack of them.

    Parameters
    ----------
    a : (..., d, d) array_like
        Hermitian matrix, or a stack of them along leading axes. Only the
        Hermitian part ``(a + a^H) / 2`` is used.
    rtol : float
        Stop once the off-diagonal Frobenius mass of every matrix falls
        below ``rtol * ||a||_F``.
    max_sweeps : int
        Raise :class:`EigensolverError` if not converged after this many
        sweeps.

    Returns
    -------
    w : (..., d) ndarray
        Eigenvalues in ascending order.
    v : (..., d, d) ndarray
        Unitary matrices whose columns are the matching eigenvectors, so that
        ``a = v @ diag(w) @ v^H``.
    """
    a = np.asarray(a)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    lead, d = a.shape[:-2], a.shape[-1]
    a = a.reshape((-1, d, d))
    a = 0.5 * (a + a.conj().transpose(0, 2, 1))
    a = a.astype(np.complex128, copy=True)
    b = a.shape[0]
    eye = np.eye(d, dtype=np.complex128)
    v = np.broadcast_to(eye, (b, d, d)).copy()
    if d > 1 and b > 0:
        a, v = _sweeps(a, v, eye, rtol, max_sweeps)
    w = a.real.diagonal(axis1=1, axis2=2)
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return w.reshape(lead + (d,)), v.reshape(lead + (d, d))


def _sweeps(a, v, eye, rtol, max_sweeps):
    target = rtol * np.linalg.norm(a, axis=(1, 2))
    rounds = _rounds(a.shape[-1])
    for _ in range(max_sweeps):
        if np.all(_offdiag_norm(a) <= target):
            return a, v
        for pairs in rounds:
            p, q = pairs[:, 0], pairs[:, 1]
            apq = a[:, p, q]
            mag = np.abs(apq)
            if not mag.any():
                continue
            live = mag > 0.0
            safe = np.where(live, mag, 1.0)
            phase = apq / safe
            zeta = (a[:, q, q].real - a[:, p, p].real) / (2.0 * safe)
            # t = tan(theta), the smaller root of t^2 + 2 zeta t - 1 = 0
            t = live * np.copysign(1.0, zeta) / (np.abs(zeta) + np.hypot(1.0, zeta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            j = np.broadcast_to(eye, a.shape).copy()
            j[:, p, p] = c
            j[:, q, q] = c
            j[:, p, q] = s * phase
            j[:, q, p] = -s * phase.conj()
            a = j.conj().transpose(0, 2, 1) @ a @ j
            v = v @ j
    off = _offdiag_norm(a)
    if np.any(off > target):
        worst = int(np.argmax(off - target))
        raise EigensolverError(
            f"Jacobi iteration did not converge in {max_sweeps} sweeps "
            f"(off-diagonal mass {off[worst]:.3e}, target {target[worst]:.3e})"
        )
    return a, v


def jacobi_eigvalsh(a, **kwargs):
    return jacobi_eigh(a, **kwargs)[0]


def singular_values(x):
    """Singular values of ``x`` in descending order.

    Computed from the Hermitian dilation ``[[0, x], [x^H, 0]]`` whose
    spectrum is ``{+s_i, -s_i}``; this keeps small singular values at
    absolute accuracy ``~eps * ||x||`` instead of ``~sqrt(eps) * ||x||``.
    """
    x = np.asarray(x, dtype=np.complex128)
    m, n = x.shape
    dil = np.zeros((m + n, m + n), dtype=np.complex128)
    dil[:m, m:] = x
    dil[m:, :m] = x.conj().T
    w = jacobi_eigvalsh(dil)
    k = min(m, n)
    return np.clip(w[::-1][:k], 0.0, None)
