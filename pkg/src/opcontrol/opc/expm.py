"""Matrix exponential by scaling and squaring with Pade approximants.

Follows Higham (2005), "The scaling and squaring method for the matrix
exponential revisited": pick the lowest Pade degree in {3, 5, 7, 9, 13} whose
1-norm bound holds, otherwise scale by 2**-s, use degree 13 and square back.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidParameterError

_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}

_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
         960960.0, 16380.0, 182.0, 1.0),
}


def _pade_uv(X, m):
    b = _PADE[m]
    n = X.shape[0]
    I = np.eye(n)
    X2 = X @ X
    if m == 13:
        X4 = X2 @ X2
        X6 = X4 @ X2
        U = X @ (X6 @ (b[13] * X6 + b[11] * X4 + b[9] * X2)
                 + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * I)
        V = X6 @ (b[12] * X6 + b[10] * X4 + b[8] * X2) + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * I
        return U, V
    powers = [I, X2]
    for _ in range(2, m // 2 + 1):
        powers.append(powers[-1] @ X2)
    U = X @ sum(b[2 * k + 1] * powers[k] for k in range(m // 2 + 1))
    V = sum(b[2 * k] * powers[k] for k in range(m // 2 + 1))
    return U, V


def matrix_exponential(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise InvalidParameterError(f"matrix_exponential needs a square matrix, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidParameterError("matrix_exponential input has non-finite entries")
    norm = np.linalg.norm(X, 1)
    for m in (3, 5, 7, 9):
        if norm <= _THETA[m]:
            U, V = _pade_uv(X, m)
            return np.linalg.solve(V - U, V + U)
    s = max(0, int(np.ceil(np.log2(norm / _THETA[13])))) if norm > 0 else 0
    U, V = _pade_uv(X / 2.0**s, 13)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


def expm_frechet(X, E) -> np.ndarray:
    """Frechet derivative ``L(X, E)`` of the exponential at ``X`` in direction ``E``.

    Read off the upper-right block of ``expm([[X, E], [0, X]])``.  ``L`` is
    linear in ``E``, so ``E`` is scaled to the size of ``X`` first; otherwise
    a large ``E`` would force needless squarings and wipe out the result.
    """
    X = np.asarray(X, dtype=float)
    E = np.asarray(E, dtype=float)
    n = X.shape[0]
    e_norm = np.linalg.norm(E, 1)
    if e_norm == 0.0:
        return np.zeros_like(X)
    scale = max(np.linalg.norm(X, 1), 1.0) / e_norm
    big = np.zeros((2 * n, 2 * n))
    big[:n, :n] = X
    big[n:, n:] = X
    big[:n, n:] = E * scale
    return matrix_exponential(big)[:n, n:] / scale


def expm_vjp(X, G) -> np.ndarray:
    """Gradient of ``<G, expm(X)>`` with respect to ``X``: ``L(X^T, G)``."""
    return expm_frechet(np.asarray(X, dtype=float).T, G)
