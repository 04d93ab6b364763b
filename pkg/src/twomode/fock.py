"""Truncated single- and two-mode Fock-space linear algebra.

States are dense complex arrays indexed by occupation number.  Coherent
amplitudes are generated by the running recurrence
``amps[n] = amps[n-1] * alpha / sqrt(n)`` so that no factorial or power is
ever formed explicitly.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Literal, Union

import numpy as np
from scipy import stats

from .errors import NullState, TruncationTooLarge, TruncationWarning

DEFAULT_EPSILON = 1e-12
MAX_TRUNCATION = 256
NULL_NORM = 1e-12

Mode = Literal["A", "B"]


def _frozen(arr, dtype=complex):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FockKet:
    """Single-mode ket truncated at ``n_max``.

    ``tail_mass`` is the squared norm of the discarded part of the ideal
    (untruncated) normalized state.
    """

    amps: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        amps = _frozen(self.amps)
        if amps.ndim != 1 or amps.size == 0:
            raise ValueError("FockKet amplitudes must be a non-empty 1-d array")
        object.__setattr__(self, "amps", amps)

    @property
    def n_max(self) -> int:
        return self.amps.size - 1

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def to_json(self) -> dict:
        return {
            "kind": "FockKet",
            "n_max": self.n_max,
            "tail_mass": self.tail_mass,
            "amps": [[z.real, z.imag] for z in self.amps.tolist()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "FockKet":
        amps = np.array([complex(re, im) for re, im in data["amps"]])
        if amps.size != data["n_max"] + 1:
            raise ValueError("amplitude count does not match n_max")
        return cls(amps, float(data.get("tail_mass", 0.0)))


@dataclass(frozen=True)
class TwoModeKet:
    """Two-mode ket; ``amps[n_a, n_b]`` is the amplitude of ``|n_a, n_b>``."""

    amps: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        amps = _frozen(self.amps)
        if amps.ndim != 2 or amps.size == 0:
            raise ValueError("TwoModeKet amplitudes must be a non-empty 2-d array")
        object.__setattr__(self, "amps", amps)

    @property
    def n_max_a(self) -> int:
        return self.amps.shape[0] - 1

    @property
    def n_max_b(self) -> int:
        return self.amps.shape[1] - 1

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def to_json(self) -> dict:
        return {
            "kind": "TwoModeKet",
            "n_max_a": self.n_max_a,
            "n_max_b": self.n_max_b,
            "tail_mass": self.tail_mass,
            "amps": [[z.real, z.imag] for z in self.amps.ravel().tolist()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "TwoModeKet":
        shape = (data["n_max_a"] + 1, data["n_max_b"] + 1)
        flat = np.array([complex(re, im) for re, im in data["amps"]])
        return cls(flat.reshape(shape), float(data.get("tail_mass", 0.0)))


@dataclass(frozen=True)
class DensityMatrix:
    """Dense density operator.

    ``dims`` is ``(d_a, d_b)`` when the matrix lives on a two-mode space
    (row index ``n_a * d_b + n_b``) and ``(dim,)`` for a single mode.
    """

    entries: np.ndarray
    dims: tuple = ()

    def __post_init__(self):
        entries = _frozen(self.entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError("density matrix must be square")
        dims = tuple(self.dims) or (entries.shape[0],)
        if math.prod(dims) != entries.shape[0]:
            raise ValueError(f"dims {dims} do not match matrix size {entries.shape[0]}")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def check(self, trace_tol=DEFAULT_EPSILON, herm_tol=1e-12, psd_tol=1e-10):
        """Raise ``ValueError`` unless the matrix is a physical state."""
        e = self.entries
        herm = np.max(np.abs(e - e.conj().T)) if e.size else 0.0
        if herm > herm_tol:
            raise ValueError(f"not Hermitian (deviation {herm:.3e})")
        if abs(self.trace - 1.0) > trace_tol:
            raise ValueError(f"trace {self.trace!r} outside 1 +/- {trace_tol}")
        lo = np.linalg.eigvalsh(e).min()
        if lo < -psd_tol:
            raise ValueError(f"negative eigenvalue {lo:.3e}")


@dataclass(frozen=True)
class CatSpec:
    """``(|alpha> + exp(i Phi) |-alpha>) / N`` with ``N`` from the overlap."""

    alpha: complex
    Phi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "Phi", float(self.Phi) % (2 * math.pi))
        if self.normalization < NULL_NORM:
            raise NullState(
                f"cat state with alpha={self.alpha}, Phi={self.Phi} has zero norm"
            )

    @property
    def normalization(self) -> float:
        x = abs(self.alpha) ** 2
        return math.sqrt(max(0.0, 2.0 * (1.0 + math.cos(self.Phi) * math.exp(-2.0 * x))))


StateSpec = Union[complex, float, CatSpec]


def _coherent_amps(alpha, n_max):
    amps = np.empty(n_max + 1, dtype=complex)
    amps[0] = math.exp(-abs(alpha) ** 2 / 2.0)
    for n in range(1, n_max + 1):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    return amps


def _check_tail(tail, epsilon):
    if epsilon is not None and tail > epsilon:
        warnings.warn(
            f"Fock tail mass {tail:.3e} exceeds requested bound {epsilon:.1e}",
            TruncationWarning,
            stacklevel=3,
        )


def coherent_ket(alpha: complex, n_max: int, epsilon: float | None = None) -> FockKet:
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    amps = _coherent_amps(complex(alpha), n_max)
    tail = max(0.0, 1.0 - float(np.vdot(amps, amps).real))
    _check_tail(tail, epsilon)
    return FockKet(amps, tail)


def cat_ket(spec: CatSpec, n_max: int, epsilon: float | None = None) -> FockKet:
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    plus = _coherent_amps(spec.alpha, n_max)
    parity = np.where(np.arange(n_max + 1) % 2 == 0, 1.0, -1.0)
    phase = np.exp(1j * spec.Phi)
    # snap so that even and odd cats have exactly vanishing components
    phase = complex(0.0 if abs(phase.real) < 1e-15 else phase.real, 0.0 if abs(phase.imag) < 1e-15 else phase.imag)
    amps = (plus + phase * parity * plus) / spec.normalization
    tail = max(0.0, 1.0 - float(np.vdot(amps, amps).real))
    _check_tail(tail, epsilon)
    return FockKet(amps, tail)


def fock_ket(n: int, n_max: int) -> FockKet:
    """Number state ``|n>``."""
    if not 0 <= n <= n_max:
        raise ValueError("need 0 <= n <= n_max")
    amps = np.zeros(n_max + 1, dtype=complex)
    amps[n] = 1.0
    return FockKet(amps)


def tensor_product(a: FockKet, b: FockKet) -> TwoModeKet:
    tail = 1.0 - (1.0 - a.tail_mass) * (1.0 - b.tail_mass)
    return TwoModeKet(np.outer(a.amps, b.amps), tail)


def partial_trace(state: TwoModeKet | DensityMatrix, keep: Mode = "A") -> DensityMatrix:
    """Reduced density matrix of the ``keep`` mode.

    The result is not renormalized: its trace is the norm (or trace) of the
    input.
    """
    if keep not in ("A", "B"):
        raise ValueError("keep must be 'A' or 'B'")
    if isinstance(state, TwoModeKet):
        m = state.amps
        if keep == "A":
            return DensityMatrix(m @ m.conj().T)
        return DensityMatrix(m.T @ m.conj())
    if len(state.dims) != 2:
        raise ValueError("partial_trace needs a two-mode density matrix")
    da, db = state.dims
    r = state.entries.reshape(da, db, da, db)
    if keep == "A":
        return DensityMatrix(np.einsum("ikjk->ij", r))
    return DensityMatrix(np.einsum("kikj->ij", r))


def density_matrix(state: FockKet | TwoModeKet) -> DensityMatrix:
    if isinstance(state, TwoModeKet):
        v = state.amps.ravel()
        return DensityMatrix(np.outer(v, v.conj()), state.amps.shape)
    return DensityMatrix(np.outer(state.amps, state.amps.conj()))


def purity_and_linear_entropy(rho: DensityMatrix) -> tuple[float, float]:
    e = rho.entries
    # Tr(rho^2) = sum_ij rho_ij rho_ji
    purity = float(np.sum(e * e.T).real)
    return purity, 1.0 - purity


def _occupation_probs(state, mode):
    if isinstance(state, FockKet):
        return np.abs(state.amps) ** 2
    if isinstance(state, TwoModeKet):
        p = np.abs(state.amps) ** 2
        return p.sum(axis=1) if mode == "A" else p.sum(axis=0)
    if len(state.dims) == 2:
        state = partial_trace(state, mode)
    return np.diag(state.entries).real.copy()


def number_statistics(state, mode: Mode = "A") -> tuple[float, float]:
    """Mean and variance of the occupation number of ``mode``.

    Statistics are those of the normalized state, so a truncated ket with a
    small tail is renormalized before taking moments.
    """
    p = _occupation_probs(state, mode)
    p = p / p.sum()
    n = np.arange(p.size, dtype=float)
    mean = float(np.dot(p, n))
    var = float(np.dot(p, (n - mean) ** 2))
    return mean, var


def _padded(m, shape):
    out = np.zeros(shape, dtype=complex)
    out[: m.shape[0], : m.shape[1]] = m
    return out


def overlap(x: TwoModeKet, y: TwoModeKet) -> complex:
    """``<x|y>``, zero-padding the smaller truncation."""
    shape = (max(x.amps.shape[0], y.amps.shape[0]), max(x.amps.shape[1], y.amps.shape[1]))
    return complex(np.vdot(_padded(x.amps, shape), _padded(y.amps, shape)))


def number_distribution(spec: StateSpec, n_len: int) -> np.ndarray:
    """Occupation probabilities ``p[0..n_len-1]`` of a coherent or cat state."""
    n = np.arange(n_len)
    if isinstance(spec, CatSpec):
        x = abs(spec.alpha) ** 2
        weight = np.abs(1.0 + np.exp(1j * spec.Phi) * (-1.0) ** n) ** 2
        return stats.poisson.pmf(n, x) * weight / spec.normalization**2 if x > 0 else (n == 0) * 1.0
    x = abs(complex(spec)) ** 2
    return stats.poisson.pmf(n, x) if x > 0 else (n == 0) * 1.0


def _tails(p):
    # tails[n] = sum_{k>n} p[k]; summed from the small end for accuracy
    # mass beyond the evaluation window is added back so that a window that
    # is too short can never look like a converged tail
    rev = np.cumsum(p[::-1])[::-1]
    missing = max(0.0, 1.0 - float(rev[0]))
    return np.append(rev[1:], 0.0) + missing


def _first_below(tails, epsilon, ceiling):
    hits = np.nonzero(tails[: ceiling + 1] < epsilon)[0]
    if hits.size == 0:
        raise TruncationTooLarge(
            f"tail bound {epsilon:.1e} needs n_max above the ceiling {ceiling}"
        )
    return int(hits[0])


def choose_truncation(
    specs: Iterable[StateSpec], epsilon: float = DEFAULT_EPSILON, ceiling: int = MAX_TRUNCATION
) -> int:
    """Smallest ``n_max`` leaving every listed state with tail mass below ``epsilon``."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    n_len = 2 * ceiling + 64
    n_max = 0
    for spec in specs:
        n_max = max(n_max, _first_below(_tails(number_distribution(spec, n_len)), epsilon, ceiling))
    return n_max


def choose_joint_truncation(
    a: StateSpec,
    b: StateSpec,
    epsilon: float = DEFAULT_EPSILON,
    guard: int = 0,
    ceiling: int = MAX_TRUNCATION,
) -> int:
    """Per-mode ``n_max`` bounding the *total* excitation number of ``a (x) b``.

    Excitations move between the modes under the coupling but their total is
    conserved, so controlling the tail of the total-number distribution
    bounds the truncation error at every time.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    n_len = 2 * ceiling + 64
    total = np.convolve(number_distribution(a, n_len), number_distribution(b, n_len))[:n_len]
    n_max = _first_below(_tails(total), epsilon, ceiling) + guard
    if n_max > ceiling:
        raise TruncationTooLarge(f"n_max {n_max} exceeds the ceiling {ceiling}")
    return n_max
