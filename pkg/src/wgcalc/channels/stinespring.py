"""
Channel numerics: Stinespring dilation, Kraus operators, product-channel outputs.

The composite space ``C^n (x) C^k`` uses row-major ordering, so basis vector
``e_a (x) e_c`` has index ``a * k + c``. The environment starts in ``e_1``.
All batched functions accept a leading sample axis.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

__all__ = [
    "ChannelError", "check_unitary", "check_state", "environment_state",
    "partial_trace", "stinespring_apply", "kraus_from_unitary", "apply_kraus",
    "bell_vector", "max_entangled_state", "input_rank", "product_factor",
    "conjugate_factor", "generalized_factor", "output_from_factor",
    "gram_spectrum", "hermitize", "output_spectrum", "power_traces",
    "hayden_overlap", "hayden_bound", "generalized_apply",
]

TOL = 1e-10


class ChannelError(ValueError):
    pass


def check_unitary(u: np.ndarray, tol: float = TOL) -> np.ndarray:
    u = np.asarray(u)
    if u.ndim < 2 or u.shape[-1] != u.shape[-2]:
        raise ChannelError(f"expected square matrices, got shape {u.shape}")
    eye = np.eye(u.shape[-1])
    resid = np.abs(np.swapaxes(u.conj(), -1, -2) @ u - eye).max()
    if resid > tol:
        raise ChannelError(f"matrix is not unitary (residual {resid:.2e})")
    return u


def check_state(x: np.ndarray, tol: float = TOL) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ChannelError(f"a state must be a square matrix, got shape {x.shape}")
    xc = x.astype(complex)
    if np.abs(xc - xc.conj().T).max() > tol:
        raise ChannelError("state is not Hermitian")
    if abs(np.trace(xc) - 1) > tol:
        raise ChannelError(f"state has trace {np.trace(xc).real:.6g}, expected 1")
    if np.linalg.eigvalsh((xc + xc.conj().T) / 2).min() < -tol:
        raise ChannelError("state is not positive semidefinite")
    return x


def environment_state(k: int) -> np.ndarray:
    y = np.zeros((k, k))
    y[0, 0] = 1
    return y


def partial_trace(m: np.ndarray, dims: tuple[int, ...], keep: tuple[int, ...]) -> np.ndarray:
    """Trace out every tensor factor not listed in ``keep`` (factors in row-major order)."""
    dims = tuple(dims)
    r = len(dims)
    t = np.asarray(m).reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = list(letters[:r])
    cols = [rows[i] if i not in keep else letters[r + i] for i in range(r)]
    out = [rows[i] for i in keep] + [cols[i] for i in keep]
    kd = int(np.prod([dims[i] for i in keep]))
    return np.einsum("".join(rows + cols) + "->" + "".join(out), t).reshape(kd, kd)


def stinespring_apply(u: np.ndarray, x: np.ndarray, n: int, k: int) -> np.ndarray:
    """``Tr_K[U (X (x) e_1 e_1^*) U^*]`` for ``U`` of size ``nk``."""
    u = check_unitary(u)
    x = check_state(x)
    if u.shape != (n * k, n * k) or x.shape != (n, n):
        raise ChannelError(f"shapes {u.shape}, {x.shape} do not fit n={n}, k={k}")
    big = u @ np.kron(x, environment_state(k)) @ u.conj().T
    return partial_trace(big, (n, k), (0,))


def kraus_from_unitary(u: np.ndarray, n: int, k: int) -> list[np.ndarray]:
    """``L_i = (I_n (x) <e_i|) U (I_n (x) |e_1>)`` for ``i = 1..k``."""
    u = check_unitary(u)
    if u.shape != (n * k, n * k):
        raise ChannelError(f"unitary of shape {u.shape} does not fit n={n}, k={k}")
    t = u.reshape(n, k, n, k)
    return [t[:, i, :, 0] for i in range(k)]


def apply_kraus(ops, x: np.ndarray) -> np.ndarray:
    return sum(l @ x @ l.conj().T for l in ops)


def bell_vector(n: int) -> np.ndarray:
    """Unnormalized ``sum_i e_i (x) e_i``."""
    return np.eye(n).reshape(n * n)


def max_entangled_state(n: int) -> np.ndarray:
    """``E_n = |Bell><Bell| / n``."""
    b = bell_vector(n)
    return np.outer(b, b) / n


def input_rank(n: int, k: int, t) -> int:
    """``p_n``: ``t * n * k`` rounded half up, required to lie in ``1..nk``."""
    t = Fraction(t) if not isinstance(t, float) else Fraction(t).limit_denominator(10 ** 9)
    if not 0 < t <= 1:
        raise ChannelError(f"t must lie in (0, 1], got {t}")
    pn = math.floor(t * n * k + Fraction(1, 2))
    if not 1 <= pn <= n * k:
        raise ChannelError(f"rank p_n = {pn} outside 1..{n * k}")
    return pn


# ---------------------------------------------------------------------------
# product outputs through factors: Z = F F^*, F of shape (..., n^2, k^2)
# ---------------------------------------------------------------------------

def _factor(a: np.ndarray, b: np.ndarray, rank: int) -> np.ndarray:
    """Columns ``vec(A_i B_j^T) / sqrt(rank)`` indexed by ``(i, j)``."""
    f = np.einsum("...ias,...jbs->...abij", a, b)
    sh = f.shape
    n, k = sh[-4], sh[-2]
    return f.reshape(sh[:-4] + (n * n, k * k)) / math.sqrt(rank)


def _input_kraus(u: np.ndarray, n: int, k: int) -> np.ndarray:
    """Kraus operators ``(..., k, n, n)`` of the channel with input ``C^n (x) e_1``."""
    t = u.reshape(u.shape[:-2] + (n, k, n, k))[..., 0]
    return np.moveaxis(t, -2, -3)


def product_factor(u: np.ndarray, v: np.ndarray, n: int, k: int) -> np.ndarray:
    """Factor of ``[Phi^U (x) Phi^V](E_n)``."""
    return _factor(_input_kraus(u, n, k), _input_kraus(v, n, k), n)


def conjugate_factor(u: np.ndarray, n: int, k: int) -> np.ndarray:
    """Factor of ``[Phi^U (x) Phi^conj(U)](E_n)``."""
    a = _input_kraus(u, n, k)
    return _factor(a, a.conj(), n)


def generalized_factor(u: np.ndarray, n: int, k: int, t) -> np.ndarray:
    """
    Factor of ``[Phi (x) conj(Phi)](E_{p_n})``, where ``Phi(X) = tr_k(U X U^*)``
    on states supported by the first ``p_n`` basis vectors of ``C^{nk}``.
    """
    pn = input_rank(n, k, t)
    w = u[..., :pn].reshape(u.shape[:-2] + (n, k, pn))
    a = np.moveaxis(w, -2, -3)
    return _factor(a, a.conj(), pn)


def output_from_factor(f: np.ndarray) -> np.ndarray:
    return f @ np.swapaxes(f.conj(), -1, -2)


def hermitize(z: np.ndarray, tol: float = TOL) -> np.ndarray:
    zh = np.swapaxes(z.conj(), -1, -2)
    if np.abs(z - zh).max() > tol:
        raise ChannelError("output is not Hermitian within tolerance")
    return (z + zh) / 2


def gram_spectrum(f: np.ndarray) -> np.ndarray:
    """Nonzero-part spectrum of ``F F^*`` from the small Gram matrix, descending."""
    g = hermitize(np.swapaxes(f.conj(), -1, -2) @ f)
    return np.linalg.eigvalsh(g)[..., ::-1]


def output_spectrum(z: np.ndarray) -> np.ndarray:
    """Full spectrum of an output density matrix, descending."""
    return np.linalg.eigvalsh(hermitize(z))[..., ::-1]


def power_traces(eigs: np.ndarray, p: int) -> np.ndarray:
    return np.sum(eigs ** p, axis=-1)


def hayden_overlap(f: np.ndarray) -> np.ndarray:
    """``tr(Z E_n)`` for ``Z = F F^*``: ``|<Bell|F>|^2 / n`` summed over columns."""
    n2 = f.shape[-2]
    n = math.isqrt(n2)
    b = bell_vector(n)
    return np.sum(np.abs(np.einsum("a,...ac->...c", b, f)) ** 2, axis=-1) / n


def hayden_bound(z: np.ndarray, n: int, t) -> tuple[float, bool]:
    """Overlap ``tr(Z E_n)`` and whether it reaches ``t`` up to ``1e-10``."""
    z = check_state(z, tol=1e-8)
    if z.shape != (n * n, n * n):
        raise ChannelError(f"state of shape {z.shape} is not on C^{n} (x) C^{n}")
    overlap = float(np.real(np.trace(z @ max_entangled_state(n))))
    return overlap, overlap >= float(t) - TOL


def generalized_apply(u: np.ndarray, n: int, k: int, t) -> np.ndarray:
    """Output density matrix ``Z`` of size ``n^2`` of the generalized model."""
    u = check_unitary(u)
    return hermitize(output_from_factor(generalized_factor(u, n, k, t)))
