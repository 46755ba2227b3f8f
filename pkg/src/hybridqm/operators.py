"""Dense finite-dimensional operator algebra.

Everything here works on plain complex numpy matrices wrapped in a small
:class:`Operator` record that remembers the tensor-product structure.
Density matrices use the same representation; kets are :class:`Ket`.

Qubit ordering is ``(|g>, |e>)`` with ``sigma_z |g> = -|g>``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import ContractError, InvalidDimensionError, TruncationError, ValidationError

HERMITIAN_RTOL = 1e-12


@dataclass(frozen=True)
class SpaceDims:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise InvalidDimensionError(f"subsystem dimensions must be >= 1, got {self.dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        return math.prod(self.dims)

    def __len__(self):
        return len(self.dims)


def _as_space(space) -> SpaceDims:
    if isinstance(space, SpaceDims):
        return space
    if isinstance(space, int):
        return SpaceDims((space,))
    return SpaceDims(tuple(space))


@dataclass(frozen=True, eq=False)
class Operator:
    """Square complex matrix on a composite space.

    ``hermitian`` is a promise checked at construction: when set, the matrix
    is symmetrised and the residual ``max|A - A^dag|`` must be below
    ``1e-12`` relative to the largest element.
    """

    data: np.ndarray
    space: SpaceDims
    hermitian: bool = False

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        space = _as_space(self.space)
        if data.ndim != 2 or data.shape != (space.total, space.total):
            raise InvalidDimensionError(
                f"matrix shape {data.shape} does not match space {space.dims}"
            )
        if self.hermitian:
            res = hermitian_residual(data)
            if res > HERMITIAN_RTOL * max(1.0, float(np.max(np.abs(data), initial=0.0))):
                raise ContractError(f"operator flagged Hermitian but residual is {res:.3e}")
            data = 0.5 * (data + data.conj().T)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "space", space)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.space.dims

    @property
    def shape(self):
        return self.data.shape

    def dag(self) -> "Operator":
        return Operator(self.data.conj().T, self.space, self.hermitian)

    def check_hermitian(self) -> "Operator":
        """Return a copy flagged Hermitian (raises if it is not)."""
        return Operator(self.data, self.space, hermitian=True)

    def tr(self) -> complex:
        return complex(np.trace(self.data))

    def expect(self, rho: "Operator") -> complex:
        return complex(np.trace(self.data @ rho.data))

    def _coerce(self, other):
        if isinstance(other, Operator):
            if other.space != self.space:
                raise InvalidDimensionError(f"space mismatch {self.dims} vs {other.dims}")
            return other.data, other.hermitian
        return None, False

    def __add__(self, other):
        o, h = self._coerce(other)
        if o is None:
            return Operator(self.data + other * np.eye(self.space.total), self.space)
        return Operator(self.data + o, self.space, self.hermitian and h)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rsub__(self, other):
        return (-1.0) * self + other

    def __neg__(self):
        return Operator(-self.data, self.space, self.hermitian)

    def __mul__(self, scalar):
        if isinstance(scalar, Operator):
            raise TypeError("use @ for operator products")
        herm = self.hermitian and np.isreal(scalar)
        return Operator(self.data * scalar, self.space, herm)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        if isinstance(other, Ket):
            if other.space != self.space:
                raise InvalidDimensionError("ket/operator space mismatch")
            return Ket(self.data @ other.data, self.space)
        o, _ = self._coerce(other)
        return Operator(self.data @ o, self.space)

    def __repr__(self):
        return f"Operator(dims={self.dims}, hermitian={self.hermitian})"


@dataclass(frozen=True, eq=False)
class Ket:
    data: np.ndarray
    space: SpaceDims

    def __post_init__(self):
        data = np.array(self.data, dtype=complex).reshape(-1)
        space = _as_space(self.space)
        if data.shape[0] != space.total:
            raise InvalidDimensionError(f"ket length {data.shape[0]} does not match {space.dims}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "space", space)

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def normalized(self) -> "Ket":
        return Ket(self.data / self.norm(), self.space)

    def overlap(self, other: "Ket") -> complex:
        return complex(np.vdot(self.data, other.data))

    def dm(self) -> Operator:
        return Operator(np.outer(self.data, self.data.conj()), self.space, hermitian=True)

    def __repr__(self):
        return f"Ket(dims={self.space.dims})"


def is_density_matrix(rho: Operator, trace_tol=1e-9, eig_tol=1e-9) -> bool:
    if hermitian_residual(rho.data) > 1e-10:
        return False
    if abs(rho.tr() - 1.0) > trace_tol:
        return False
    return bool(np.linalg.eigvalsh(0.5 * (rho.data + rho.data.conj().T))[0] >= -eig_tol)


def hermitian_residual(a: np.ndarray) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a - a.conj().T), initial=0.0))


# --- constructors ---------------------------------------------------------


def identity(space) -> Operator:
    space = _as_space(space)
    return Operator(np.eye(space.total), space, hermitian=True)


def destroy(dim: int) -> Operator:
    """Truncated annihilation operator, ``a[n-1, n] = sqrt(n)``."""
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"bosonic truncation must be >= 2, got {dim}")
    dim = int(dim)
    return Operator(np.diag(np.sqrt(np.arange(1, dim)), k=1), SpaceDims((dim,)))


def number(dim: int) -> Operator:
    return Operator(np.diag(np.arange(dim, dtype=float)), SpaceDims((dim,)), hermitian=True)


_PAULI = {
    # basis order (g, e); sigma_z |g> = -|g>
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, 1j], [-1j, 0]], dtype=complex),
    "z": np.array([[-1, 0], [0, 1]], dtype=complex),
    "plus": np.array([[0, 0], [1, 0]], dtype=complex),  # |e><g|
    "minus": np.array([[0, 1], [0, 0]], dtype=complex),  # |g><e|
}


def pauli(which: str) -> Operator:
    try:
        mat = _PAULI[which]
    except KeyError:
        raise ValidationError(f"unknown Pauli operator {which!r}") from None
    return Operator(mat, SpaceDims((2,)), hermitian=which in ("x", "y", "z"))


def fock(dim: int, n: int) -> Ket:
    if not 0 <= n < dim:
        raise InvalidDimensionError(f"Fock index {n} outside truncation {dim}")
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return Ket(v, SpaceDims((dim,)))


def basis_ket(space, index: Sequence[int]) -> Ket:
    """Product basis state ``|i0, i1, ...>``."""
    space = _as_space(space)
    flat = np.ravel_multi_index(tuple(index), space.dims)
    v = np.zeros(space.total, dtype=complex)
    v[flat] = 1.0
    return Ket(v, space)


def tensor(*ops):
    """Kronecker product of Operators or of Kets (in argument order)."""
    if len(ops) == 1 and isinstance(ops[0], (list, tuple)):
        ops = tuple(ops[0])
    dims = tuple(d for op in ops for d in op.space.dims)
    data = reduce(np.kron, [op.data for op in ops])
    if all(isinstance(op, Ket) for op in ops):
        return Ket(data, SpaceDims(dims))
    herm = all(op.hermitian for op in ops)
    return Operator(data, SpaceDims(dims), hermitian=herm)


def embed(op: Operator, slot: int, space) -> Operator:
    """Place ``op`` on subsystem ``slot`` of ``space``, identity elsewhere."""
    space = _as_space(space)
    if not 0 <= slot < len(space.dims):
        raise InvalidDimensionError(f"slot {slot} out of range for {space.dims}")
    if op.space.total != space.dims[slot]:
        raise InvalidDimensionError(
            f"operator of size {op.space.total} cannot act on slot of size {space.dims[slot]}"
        )
    left = math.prod(space.dims[:slot])
    right = math.prod(space.dims[slot + 1 :])
    data = np.kron(np.kron(np.eye(left), op.data), np.eye(right))
    return Operator(data, space, hermitian=op.hermitian)


def commutator(a: Operator, b: Operator) -> Operator:
    return a @ b - b @ a


def displacement(beta: complex, dim: int, check: bool = True) -> Operator:
    """``D(beta) = exp(beta b^dag - beta^* b)`` on a truncated Fock space.

    The guard ``|beta|^2 + 5|beta| < dim`` keeps the coherent state well
    inside the truncation.
    """
    b = abs(beta)
    if check and b * b + 5 * b >= dim:
        raise TruncationError(
            f"displacement |beta|={b:.3g} needs dim > {b * b + 5 * b:.1f}, got {dim}"
        )
    a = destroy(dim).data
    return Operator(expm(beta * a.conj().T - np.conj(beta) * a), SpaceDims((dim,)))


def coherent(beta: complex, dim: int) -> Ket:
    """Coherent state ``D(beta)|0>`` in a truncated space."""
    return Ket(displacement(beta, dim).data[:, 0], SpaceDims((dim,)))


def coherent_analytic(beta: complex, dim: int) -> Ket:
    """Untruncated coherent-state amplitudes ``e^{-|b|^2/2} b^n / sqrt(n!)`` cut at ``dim``."""
    n = np.arange(dim)
    logfact = np.array([math.lgamma(k + 1) for k in n])
    if beta == 0:
        amp = (n == 0).astype(complex)
    else:
        amp = np.exp(-abs(beta) ** 2 / 2 + n * np.log(complex(beta)) - 0.5 * logfact)
    return Ket(amp, SpaceDims((dim,)))


def thermal_dm(dim: int, n_th: float) -> Operator:
    if n_th <= 0:
        return fock(dim, 0).dm()
    x = n_th / (1.0 + n_th)
    p = (1 - x) * x ** np.arange(dim)
    return Operator(np.diag(p / p.sum()), SpaceDims((dim,)), hermitian=True)


def parity(dim: int) -> Operator:
    return Operator(np.diag((-1.0) ** np.arange(dim)), SpaceDims((dim,)), hermitian=True)


# --- spectral -------------------------------------------------------------


def fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of each column real and positive."""
    vecs = np.array(vecs, dtype=complex)
    idx = np.argmax(np.abs(vecs), axis=0)
    pivots = vecs[idx, np.arange(vecs.shape[1])]
    return vecs * (np.abs(pivots) / pivots)


def eig_hermitian(op) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and phase-fixed eigenvectors (columns) of a Hermitian matrix."""
    data = op.data if isinstance(op, Operator) else np.asarray(op, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(data), initial=0.0)))
    res = hermitian_residual(data)
    if res > HERMITIAN_RTOL * scale:
        raise ContractError(f"eig_hermitian requires a Hermitian matrix (residual {res:.3e})")
    vals, vecs = np.linalg.eigh(0.5 * (data + data.conj().T))
    return vals, fix_phases(vecs)


def apply_function(op: Operator, func) -> Operator:
    """``f(A)`` for Hermitian ``A`` via its spectral decomposition."""
    vals, vecs = eig_hermitian(op)
    data = (vecs * func(vals)) @ vecs.conj().T
    return Operator(data, op.space, hermitian=bool(np.all(np.isreal(func(vals)))))


# --- reduced states and entanglement -------------------------------------


def _check_slots(slots: Iterable[int], n: int) -> tuple[int, ...]:
    slots = tuple(sorted(set(int(s) for s in slots)))
    if any(s < 0 or s >= n for s in slots):
        raise InvalidDimensionError(f"slots {slots} out of range for {n} subsystems")
    return slots


def ptrace(rho: Operator, keep: Sequence[int]) -> Operator:
    """Partial trace keeping the listed slots (in ascending order)."""
    dims = rho.space.dims
    n = len(dims)
    keep = _check_slots(keep, n)
    if not keep:
        raise InvalidDimensionError("must keep at least one subsystem")
    t = rho.data.reshape(dims + dims)
    drop = [i for i in range(n) if i not in keep]
    # trace out from the highest slot so earlier axis numbers stay valid
    cur = n
    for s in reversed(drop):
        t = np.trace(t, axis1=s, axis2=s + cur)
        cur -= 1
    kdims = tuple(dims[i] for i in keep)
    tot = math.prod(kdims)
    return Operator(t.reshape(tot, tot), SpaceDims(kdims), hermitian=rho.hermitian)


def partial_transpose(rho: Operator, slots: Sequence[int]) -> Operator:
    dims = rho.space.dims
    n = len(dims)
    slots = _check_slots(slots, n)
    t = rho.data.reshape(dims + dims)
    axes = list(range(2 * n))
    for s in slots:
        axes[s], axes[s + n] = axes[s + n], axes[s]
    return Operator(t.transpose(axes).reshape(rho.shape), rho.space)


def negativity(rho: Operator, cut: Sequence[int] = (0,)) -> float:
    """Sum of |negative eigenvalues| of the partial transpose over the complement of ``cut``."""
    n = len(rho.space.dims)
    side_a = _check_slots(cut, n)
    side_b = tuple(i for i in range(n) if i not in side_a)
    if not side_a or not side_b:
        raise ValidationError("negativity needs a bipartition with both sides non-empty")
    pt = partial_transpose(rho, side_b).data
    vals = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    return float(-np.sum(vals[vals < 0]))


def log_negativity(rho: Operator, cut: Sequence[int] = (0,)) -> float:
    """``log2(2N + 1)`` with ``N`` the negativity across ``cut | rest``."""
    return float(np.log2(2.0 * negativity(rho, cut) + 1.0))


def fidelity_pure(psi: Ket, rho_or_ket) -> float:
    """``<psi|rho|psi>`` (or ``|<psi|phi>|^2`` for a ket)."""
    if isinstance(rho_or_ket, Ket):
        return abs(psi.overlap(rho_or_ket)) ** 2
    return float(np.real(np.vdot(psi.data, rho_or_ket.data @ psi.data)))


# --- Wigner function ------------------------------------------------------


@dataclass(frozen=True)
class WignerGrid:
    """Wigner function sampled on ``alpha = x + i p``; ``values[j, i]`` is at ``(x[i], p[j])``."""

    x: np.ndarray
    p: np.ndarray
    values: np.ndarray
    integral: float
    accurate: bool = field(default=True)


def _wigner_laguerre(rho: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    # Fock-basis recursion for W_mn(alpha) = (2/pi) <m| D Pi D^dag |n> matrix elements
    m_max = rho.shape[0]
    a2 = 2.0 * alpha
    wl = [np.exp(-0.5 * np.abs(a2) ** 2) + 0j]
    w = np.real(rho[0, 0]) * np.real(wl[0])
    for n in range(1, m_max):
        wl.append(a2 * wl[n - 1] / np.sqrt(n))
        w = w + 2 * np.real(rho[0, n] * wl[n])
    for m in range(1, m_max):
        temp = wl[m].copy()
        wl[m] = (np.conj(a2) * temp - np.sqrt(m) * wl[m - 1]) / np.sqrt(m)
        w = w + np.real(rho[m, m] * wl[m])
        for n in range(m + 1, m_max):
            temp2 = (a2 * wl[n - 1] - np.sqrt(m) * temp) / np.sqrt(n)
            temp = wl[n].copy()
            wl[n] = temp2
            w = w + 2 * np.real(rho[m, n] * wl[n])
    return (2.0 / np.pi) * w


def _wigner_parity(rho: np.ndarray, alpha: np.ndarray, pad: int) -> np.ndarray:
    dim = max(rho.shape[0], pad)
    big = np.zeros((dim, dim), dtype=complex)
    big[: rho.shape[0], : rho.shape[0]] = rho
    a = destroy(dim).data
    ad = a.conj().T
    sign = (-1.0) ** np.arange(dim)
    out = np.empty(alpha.shape)
    for idx, al in np.ndenumerate(alpha):
        d = expm(al * ad - np.conj(al) * a)
        shifted = d.conj().T @ big @ d
        out[idx] = (2.0 / np.pi) * np.real(np.sum(sign * np.diag(shifted)))
    return out


def wigner(rho, x: np.ndarray, p: np.ndarray, method: str = "laguerre", pad: int = 0) -> WignerGrid:
    """``W(alpha) = (2/pi) Tr[rho D(alpha) Pi D(alpha)^dag]`` on the grid ``alpha = x + i p``.

    ``method="parity"`` evaluates the displaced-parity definition literally
    (padded to ``pad`` Fock states); the default uses the exact Laguerre
    recursion. The result carries the grid integral; ``accurate`` is False
    when it misses 1 by more than 1e-3, i.e. the grid does not cover the state.
    Degenerate grids (a single row or column) skip the integral check.
    """
    if isinstance(rho, Ket):
        rho = rho.dm()
    if len(rho.space.dims) != 1:
        raise ValidationError("wigner expects a single-mode density matrix")
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    alpha = x[None, :] + 1j * p[:, None]
    if method == "laguerre":
        w = _wigner_laguerre(rho.data, alpha)
    elif method == "parity":
        w = _wigner_parity(rho.data, alpha, pad)
    else:
        raise ValidationError(f"unknown wigner method {method!r}")
    if len(x) < 2 or len(p) < 2:
        return WignerGrid(x, p, w, float("nan"), False)
    integral = float(np.trapezoid(np.trapezoid(w, x, axis=1), p))
    accurate = bool(abs(integral - 1.0) <= 1e-3)
    if not accurate:
        warnings.warn(f"Wigner grid integral {integral:.4g} deviates from 1; grid too small?", stacklevel=2)
    return WignerGrid(x, p, w, integral, accurate)


def wigner_at(rho, alpha: complex, method: str = "laguerre", pad: int = 0) -> float:
    """Wigner function at a single phase-space point."""
    g = wigner(rho, np.array([alpha.real]), np.array([alpha.imag]), method, pad)
    return float(g.values[0, 0])
