"""I.i.d. Rayleigh channels and their MMSE estimates.

Two estimation routes are provided. :func:`mmse_estimate_pilot` simulates
orthogonal pilot training and applies the MMSE filter;
:func:`mmse_estimate_direct` draws the estimate and the error independently
with variances ``P_c`` and ``1 - P_c``. Both give the same joint law of
``(F, F_hat, E_f)``; the direct route is the cheap default.

Random numbers come from counter-based Philox streams keyed by
``(seed, trial)``, see :func:`trial_stream`.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import BinaryIO, Iterator, List, Tuple, Union

import numpy as np

from .model import csi_quality

__all__ = [
    "ChannelRealization",
    "EstimatedChannel",
    "PilotConfig",
    "trial_stream",
    "complex_gaussian",
    "draw_channels",
    "mmse_estimate_pilot",
    "mmse_estimate_direct",
    "MatrixKind",
    "write_dump",
    "read_dump",
]

_MASK64 = (1 << 64) - 1


def trial_stream(seed: int, trial: int = 0) -> np.random.Generator:
    """Independent generator for one ``(seed, trial)`` pair.

    The Philox key is the pair itself, so the stream of trial ``t`` does not
    depend on how many trials run, how they are batched or on which thread.
    """
    if seed < 0 or trial < 0:
        raise ValueError("seed and trial index must be non-negative")
    return np.random.Generator(
        np.random.Philox(key=np.array([seed & _MASK64, trial & _MASK64],
                                      dtype=np.uint64)))


def complex_gaussian(rng: np.random.Generator, shape, var: float = 1.0) -> np.ndarray:
    """Draw CN(0, var) entries (independent real/imag parts of variance var/2)."""
    shape = tuple(shape) if np.iterable(shape) else (int(shape),)
    z = rng.standard_normal(shape + (2,))
    out = z.view(np.complex128)[..., 0]
    out *= np.sqrt(var / 2.0)
    return out


@dataclass(frozen=True)
class ChannelRealization:
    """True channels: ``F`` is M x K (sources to relay), ``G`` is K x M."""

    F: np.ndarray
    G: np.ndarray

    @property
    def M(self) -> int:
        return self.F.shape[0]

    @property
    def K(self) -> int:
        return self.F.shape[1]


@dataclass(frozen=True)
class EstimatedChannel:
    """True channels, MMSE estimates and estimation errors.

    ``E_f = F_hat - F`` and ``E_g = G_hat - G``.
    """

    F: np.ndarray
    G: np.ndarray
    F_hat: np.ndarray
    G_hat: np.ndarray
    P_c: float

    @property
    def E_f(self) -> np.ndarray:
        return self.F_hat - self.F

    @property
    def E_g(self) -> np.ndarray:
        return self.G_hat - self.G

    @property
    def M(self) -> int:
        return self.F.shape[0]

    @property
    def K(self) -> int:
        return self.F.shape[1]


@dataclass(frozen=True)
class PilotConfig:
    """Pilot length, training power and the tau x K pilot matrix ``Phi``.

    ``Phi`` has orthonormal columns. :meth:`dft` builds the default one:
    the first K columns of the unitary tau-point DFT matrix.
    """

    tau: int
    P_t: float
    Phi: np.ndarray

    def __post_init__(self):
        if self.Phi.shape[0] != self.tau:
            raise ValueError("Phi must have tau rows")
        if not self.P_t > 0:
            raise ValueError("training power must be positive")

    @classmethod
    def dft(cls, tau: int, K: int, P_t: float) -> "PilotConfig":
        if tau < K:
            raise ValueError(f"pilot length tau={tau} shorter than K={K}")
        t = np.arange(tau)[:, None]
        k = np.arange(K)[None, :]
        Phi = np.exp(-2j * np.pi * t * k / tau) / np.sqrt(tau)
        return cls(tau=tau, P_t=P_t, Phi=Phi)

    @property
    def K(self) -> int:
        return self.Phi.shape[1]

    @property
    def P_c(self) -> float:
        return csi_quality(self.tau, self.P_t)


def draw_channels(M: int, K: int, rng: np.random.Generator) -> ChannelRealization:
    """Draw ``F`` (M x K) and ``G`` (K x M) with i.i.d. CN(0, 1) entries."""
    if not (M >= K >= 1):
        raise ValueError(f"need M >= K >= 1, got M={M}, K={K}")
    F = complex_gaussian(rng, (M, K))
    G = complex_gaussian(rng, (K, M))
    return ChannelRealization(F=F, G=G)


def _pilot_filter(H: np.ndarray, pc: PilotConfig, rng: np.random.Generator) -> np.ndarray:
    """MMSE estimate of an M x K channel from one pilot transmission."""
    M = H.shape[0]
    E_t = pc.tau * pc.P_t
    N = complex_gaussian(rng, (M, pc.tau))
    Y = np.sqrt(E_t) * H @ pc.Phi.T + N
    return (Y @ pc.Phi.conj()) * (np.sqrt(E_t) / (1.0 + E_t))


def mmse_estimate_pilot(ch: ChannelRealization, pc: PilotConfig,
                        rng: np.random.Generator) -> EstimatedChannel:
    """Estimate both hops by simulated orthogonal pilot training.

    The sources train ``F``; by reciprocity the destinations train ``G``
    and the relay estimates ``G^T`` the same way.
    """
    if pc.K != ch.K:
        raise ValueError(f"pilot matrix has {pc.K} columns, channel has K={ch.K}")
    if pc.tau < ch.K:
        raise ValueError(f"pilot length tau={pc.tau} shorter than K={ch.K}")
    if np.isinf(pc.P_t):
        return EstimatedChannel(F=ch.F, G=ch.G, F_hat=ch.F.copy(),
                                G_hat=ch.G.copy(), P_c=1.0)
    F_hat = _pilot_filter(ch.F, pc, rng)
    G_hat = _pilot_filter(ch.G.T, pc, rng).T
    return EstimatedChannel(F=ch.F, G=ch.G, F_hat=F_hat, G_hat=np.ascontiguousarray(G_hat),
                            P_c=pc.P_c)


def mmse_estimate_direct(M: int, K: int, P_c: float,
                         rng: np.random.Generator) -> EstimatedChannel:
    """Draw estimates and errors independently, then form the true channels.

    ``F_hat ~ CN(0, P_c)``, ``E_f ~ CN(0, 1 - P_c)`` and ``F = F_hat - E_f``;
    likewise for ``G``. Draw order is F_hat, E_f, G_hat, E_g.
    """
    if not 0.0 < P_c <= 1.0:
        raise ValueError(f"P_c must lie in (0, 1], got {P_c!r}")
    if not (M >= K >= 1):
        raise ValueError(f"need M >= K >= 1, got M={M}, K={K}")
    F_hat = complex_gaussian(rng, (M, K), P_c)
    E_f = complex_gaussian(rng, (M, K), 1.0 - P_c)
    G_hat = complex_gaussian(rng, (K, M), P_c)
    E_g = complex_gaussian(rng, (K, M), 1.0 - P_c)
    return EstimatedChannel(F=F_hat - E_f, G=G_hat - E_g, F_hat=F_hat,
                            G_hat=G_hat, P_c=P_c)


# -- binary dump --------------------------------------------------------------

_MAGIC = b"MMRL"
_HEADER = struct.Struct("<4sIII")


class MatrixKind(IntEnum):
    F = 0
    G = 1
    F_HAT = 2
    G_HAT = 3
    E_F = 4
    E_G = 5

    @property
    def transposed(self) -> bool:
        """Relay-to-destination matrices are stored K x M."""
        return self in (MatrixKind.G, MatrixKind.G_HAT, MatrixKind.E_G)


def _records(obj) -> List[Tuple[MatrixKind, np.ndarray]]:
    if isinstance(obj, EstimatedChannel):
        return [(MatrixKind.F, obj.F), (MatrixKind.G, obj.G),
                (MatrixKind.F_HAT, obj.F_hat), (MatrixKind.G_HAT, obj.G_hat),
                (MatrixKind.E_F, obj.E_f), (MatrixKind.E_G, obj.E_g)]
    if isinstance(obj, ChannelRealization):
        return [(MatrixKind.F, obj.F), (MatrixKind.G, obj.G)]
    raise TypeError(f"cannot dump {type(obj).__name__}")


def write_dump(fh: BinaryIO, obj: Union[ChannelRealization, EstimatedChannel]) -> int:
    """Append every matrix of ``obj`` to an open binary file.

    Each record is a 16-byte header (``b"MMRL"``, u32 M, u32 K, u32 kind,
    little endian) followed by the matrix as row-major little-endian f64
    ``(re, im)`` pairs. Returns the number of bytes written.
    """
    n = 0
    for kind, mat in _records(obj):
        if kind.transposed:
            K, M = mat.shape
        else:
            M, K = mat.shape
        n += fh.write(_HEADER.pack(_MAGIC, M, K, int(kind)))
        n += fh.write(np.ascontiguousarray(mat, dtype="<c16").tobytes(order="C"))
    return n


def read_dump(fh: BinaryIO) -> Iterator[Tuple[MatrixKind, np.ndarray]]:
    """Yield ``(kind, matrix)`` records written by :func:`write_dump`."""
    while True:
        head = fh.read(_HEADER.size)
        if not head:
            return
        if len(head) != _HEADER.size:
            raise ValueError("truncated record header")
        magic, M, K, kind = _HEADER.unpack(head)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        kind = MatrixKind(kind)
        shape = (K, M) if kind.transposed else (M, K)
        nbytes = 16 * M * K
        body = fh.read(nbytes)
        if len(body) != nbytes:
            raise ValueError("truncated matrix payload")
        yield kind, np.frombuffer(body, dtype="<c16").reshape(shape).astype(np.complex128)
