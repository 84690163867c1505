"""
Pauli core - phase-free Pauli superoperators over packed symplectic bits

Labels are (x, z) integer pairs. Qubit 1 is the leftmost character of the text form and the most
significant bit of each packed integer. Dense logical tables are ordered by one base-4 digit per
qubit (I=0, X=1, Y=2, Z=3), leftmost qubit most significant.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np
import pandas as pd

from . import config
from .errors import CapacityError, DimensionError, ValidationError

log = logging.getLogger(__name__)

LETTERS = 'IXYZ'
_LETTER_XZ = {'I': (0, 0), 'X': (1, 0), 'Y': (1, 1), 'Z': (0, 1)}
_XZ_DIGIT = {(0, 0): 0, (1, 0): 1, (1, 1): 2, (0, 1): 3}
_DIGIT_XZ = {v: k for k, v in _XZ_DIGIT.items()}


@dataclass(frozen=True, slots=True)
class BitString:
    """Fixed-width bitstring over GF(2); ``+`` and ``^`` are XOR."""

    value: int
    width: int

    def __post_init__(self):
        if self.width < 0 or self.value < 0 or self.value >> self.width:
            raise DimensionError(f'value {self.value} does not fit in {self.width} bits')

    @classmethod
    def parse(cls, text: str, width: int | None = None) -> BitString:
        """Parse text over {0,1}; leftmost character is qubit 1."""
        text = text.strip()
        if any(c not in '01' for c in text):
            raise ValidationError(f'invalid bitstring {text!r}')
        if width is not None and len(text) != width:
            raise DimensionError(f'bitstring {text!r} has width {len(text)}, expected {width}')
        return cls(int(text, 2) if text else 0, len(text))

    @classmethod
    def zeros(cls, width: int) -> BitString:
        return cls(0, width)

    def _check(self, other: BitString):
        if self.width != other.width:
            raise DimensionError(f'width mismatch: {self.width} vs {other.width}')

    def __xor__(self, other: BitString) -> BitString:
        self._check(other)
        return BitString(self.value ^ other.value, self.width)

    __add__ = __xor__

    def __str__(self) -> str:
        return format(self.value, f'0{self.width}b') if self.width else ''


@dataclass(frozen=True, slots=True)
class PauliLabel:
    """Phase-free Pauli superoperator spanning an ordered tuple of registers.

    Attributes:
        x: Packed X-part over all registers, first register most significant.
        z: Packed Z-part, same layout.
        layout: Register widths, e.g. ``(n_L, n_S, n_A, n_O)``.
    """

    x: int
    z: int
    layout: tuple[int, ...]

    def __post_init__(self):
        n = sum(self.layout)
        if self.x < 0 or self.z < 0 or self.x >> n or self.z >> n:
            raise DimensionError(f'label bits exceed layout {self.layout}')

    @property
    def width(self) -> int:
        return sum(self.layout)

    @classmethod
    def identity(cls, layout: Iterable[int]) -> PauliLabel:
        return cls(0, 0, tuple(layout))

    @classmethod
    def parse(cls, text: str, layout: Iterable[int] | None = None) -> PauliLabel:
        """Parse the '|'-grouped text form, e.g. ``"XI|ZZ||Y"``.

        Args:
            text: Pauli letters per register, groups separated by '|'. Case-insensitive.
            layout: Expected register widths. Inferred from the groups when omitted.

        Returns:
            The parsed label.

        Raises:
            ValidationError: On letters outside IXYZ.
            DimensionError: On group count or width mismatch.
        """
        groups = [g.strip().upper() for g in text.split('|')]
        widths = tuple(len(g) for g in groups)
        if layout is not None:
            layout = tuple(layout)
            if widths != layout:
                raise DimensionError(f'pauli {text!r} has register widths {widths}, expected {layout}')
        x = z = 0
        for c in ''.join(groups):
            if c not in _LETTER_XZ:
                raise ValidationError(f'invalid Pauli letter {c!r} in {text!r}')
            bx, bz = _LETTER_XZ[c]
            x = (x << 1) | bx
            z = (z << 1) | bz
        return cls(x, z, widths)

    @classmethod
    def from_parts(cls, parts: Iterable[tuple[int, int, int]]) -> PauliLabel:
        """Join per-register ``(x, z, width)`` triples into one label."""
        x = z = 0
        layout = []
        for px, pz, w in parts:
            x = (x << w) | px
            z = (z << w) | pz
            layout.append(w)
        return cls(x, z, tuple(layout))

    def register(self, index: int) -> tuple[int, int]:
        """Return the packed ``(x, z)`` restricted to one register."""
        shift = sum(self.layout[index + 1:])
        mask = (1 << self.layout[index]) - 1
        return (self.x >> shift) & mask, (self.z >> shift) & mask

    def restrict(self, index: int) -> PauliLabel:
        x, z = self.register(index)
        return PauliLabel(x, z, (self.layout[index],))

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def letters(self) -> str:
        n = self.width
        return ''.join(
            LETTERS[_XZ_DIGIT[((self.x >> (n - 1 - q)) & 1, (self.z >> (n - 1 - q)) & 1)]] for q in range(n)
        )

    def __str__(self) -> str:
        flat = self.letters()
        groups, pos = [], 0
        for w in self.layout:
            groups.append(flat[pos:pos + w])
            pos += w
        return '|'.join(groups)


def _same_layout(p: PauliLabel, q: PauliLabel):
    if p.layout != q.layout:
        raise DimensionError(f'layout mismatch: {p.layout} vs {q.layout}')


def indicator(s: BitString, p: PauliLabel) -> int:
    """Return 1 iff ``s`` is the bitstring selected by ``p``, i.e. its X-part."""
    if s.width != p.width:
        raise DimensionError(f'width mismatch: bitstring {s.width} vs pauli {p.width}')
    return int(p.x == s.value)


def apply_to_basis(p: PauliLabel, s: BitString) -> BitString:
    """Flip basis state ``s`` by the X-part of ``p``."""
    if s.width != p.width:
        raise DimensionError(f'width mismatch: bitstring {s.width} vs pauli {p.width}')
    return BitString(s.value ^ p.x, s.width)


def symplectic_product(px: int, pz: int, qx: int, qz: int) -> int:
    """Symplectic form of two packed labels, mod 2."""
    return ((px & qz) ^ (pz & qx)).bit_count() & 1


def conjugation_sign(p: PauliLabel, q: PauliLabel) -> int:
    """Return +1 if ``p`` and ``q`` commute, -1 otherwise."""
    _same_layout(p, q)
    return -1 if symplectic_product(p.x, p.z, q.x, q.z) else 1


def compose_superops(p: PauliLabel, q: PauliLabel) -> PauliLabel:
    """Compose two Pauli superoperators; phases drop out."""
    _same_layout(p, q)
    return PauliLabel(p.x ^ q.x, p.z ^ q.z, p.layout)


# --- dense logical tables -------------------------------------------------------------------------


@lru_cache(maxsize=16)
def table_xz(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Packed X and Z parts of all 4^n labels, in table order."""
    size = 4 ** n
    if size * size > config.MAX_TABLE_CELLS:
        raise CapacityError(f'{n} logical qubits exceed the dense table cap')
    xs = np.zeros(size, dtype=np.int64)
    zs = np.zeros(size, dtype=np.int64)
    idx = np.arange(size)
    for q in range(n):
        digit = (idx >> (2 * (n - 1 - q))) & 3
        bx = np.isin(digit, (1, 2)).astype(np.int64)
        bz = np.isin(digit, (2, 3)).astype(np.int64)
        xs |= bx << (n - 1 - q)
        zs |= bz << (n - 1 - q)
    xs.flags.writeable = False
    zs.flags.writeable = False
    return xs, zs


def table_index(x: int, z: int, n: int) -> int:
    """Position of the label ``(x, z)`` on ``n`` qubits in table order."""
    idx = 0
    for q in range(n):
        bit = n - 1 - q
        idx = (idx << 2) | _XZ_DIGIT[((x >> bit) & 1, (z >> bit) & 1)]
    return idx


def sign_rows(x: np.ndarray, z: np.ndarray, n: int) -> np.ndarray:
    """Conjugation signs of packed labels against every table label.

    Args:
        x: Packed X-parts, any shape.
        z: Packed Z-parts, same shape.
        n: Number of qubits.

    Returns:
        Array of shape ``x.shape + (4**n,)`` with entries +-1.
    """
    xs, zs = table_xz(n)
    x = np.asarray(x, dtype=np.int64)[..., None]
    z = np.asarray(z, dtype=np.int64)[..., None]
    parity = np.bitwise_count((x & zs) ^ (z & xs)) & 1
    return 1.0 - 2.0 * parity


@lru_cache(maxsize=16)
def sign_matrix(n: int) -> np.ndarray:
    """Symmetric +-1 matrix of pairwise conjugation signs in table order."""
    xs, zs = table_xz(n)
    out = sign_rows(xs, zs, n)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=16)
def compose_index(n: int) -> np.ndarray:
    """Table of label products: entry (a, b) is the table index of label a composed with label b."""
    xs, zs = table_xz(n)
    lookup = np.empty(4 ** n, dtype=np.int64)
    lookup[(xs << n) | zs] = np.arange(4 ** n)
    out = lookup[((xs[:, None] ^ xs[None, :]) << n) | (zs[:, None] ^ zs[None, :])]
    out.flags.writeable = False
    return out


def logical_labels(n: int) -> list[PauliLabel]:
    """All 4^n labels on one register, in table order."""
    xs, zs = table_xz(n)
    return [PauliLabel(int(x), int(z), (n,)) for x, z in zip(xs, zs)]


def walsh_hadamard_probabilities(values: np.ndarray, n: int) -> np.ndarray:
    """Map a dense eigenvalue table to mixture probabilities, p = D^-2 S lambda."""
    return sign_matrix(n) @ np.asarray(values, dtype=float) / 4 ** n


def walsh_hadamard_eigenvalues(probs: np.ndarray, n: int) -> np.ndarray:
    """Map dense mixture probabilities to eigenvalues, lambda = S p."""
    return sign_matrix(n) @ np.asarray(probs, dtype=float)


@dataclass(frozen=True)
class PauliEigenTable:
    """Dense Pauli eigenvalues of a Pauli-diagonal superoperator on ``n`` qubits."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (4 ** self.n,):
            raise DimensionError(f'eigen table needs {4 ** self.n} entries, got {values.shape}')
        values.flags.writeable = False
        object.__setattr__(self, 'values', values)

    @classmethod
    def identity(cls, n: int) -> PauliEigenTable:
        return cls(n, np.ones(4 ** n))

    def __getitem__(self, key: PauliLabel | str | int) -> float:
        if isinstance(key, str):
            key = PauliLabel.parse(key, (self.n,))
        if isinstance(key, PauliLabel):
            if key.width != self.n:
                raise DimensionError(f'pauli width {key.width} vs table width {self.n}')
            key = table_index(key.x, key.z, self.n)
        return float(self.values[key])

    def labels(self) -> list[str]:
        return [p.letters() for p in logical_labels(self.n)]

    def to_series(self, name: str = 'eigenvalue') -> pd.Series:
        return pd.Series(self.values, index=pd.Index(self.labels(), name='pauli'), name=name)


@dataclass(frozen=True)
class PauliChannel:
    """Sparse Pauli channel; probabilities may be unnormalized until used.

    Attributes:
        layout: Register widths shared by every label.
        terms: Mapping label -> probability, with zero terms dropped.
    """

    layout: tuple[int, ...]
    terms: Mapping[PauliLabel, float] = field(default_factory=dict)

    def __post_init__(self):
        layout = tuple(self.layout)
        clean = {}
        for label, prob in self.terms.items():
            if label.layout != layout:
                raise DimensionError(f'term {label} does not match layout {layout}')
            prob = float(prob)
            if not np.isfinite(prob) or prob < 0 or prob > 1:
                raise ValidationError(f'probability {prob} of {label} outside [0, 1]')
            if prob > 0:
                clean[label] = prob
        object.__setattr__(self, 'layout', layout)
        object.__setattr__(self, 'terms', clean)

    @classmethod
    def from_terms(cls, layout: Iterable[int], terms: Iterable[tuple[PauliLabel | str, float]]) -> PauliChannel:
        """Build from ``(label, prob)`` pairs; text labels are parsed against ``layout``.

        Raises:
            ValidationError: On duplicate labels.
        """
        layout = tuple(layout)
        out: dict[PauliLabel, float] = {}
        for label, prob in terms:
            if isinstance(label, str):
                label = PauliLabel.parse(label, layout)
            if label in out:
                raise ValidationError(f'duplicate term {label}')
            out[label] = prob
        return cls(layout, out)

    @classmethod
    def identity(cls, layout: Iterable[int]) -> PauliChannel:
        layout = tuple(layout)
        return cls(layout, {PauliLabel.identity(layout): 1.0})

    @property
    def width(self) -> int:
        return sum(self.layout)

    def total(self) -> float:
        return float(sum(self.terms.values()))

    def is_normalized(self, tol: float = config.NORM_TOL) -> bool:
        return abs(self.total() - 1.0) <= tol

    def require_normalized(self, tol: float = config.NORM_TOL) -> PauliChannel:
        if not self.is_normalized(tol):
            raise ValidationError(f'channel probabilities sum to {self.total():.15g}, not 1')
        return self

    def register_arrays(self) -> tuple[list[np.ndarray], list[np.ndarray], np.ndarray]:
        """Per-register packed X and Z arrays plus the probability vector."""
        labels = list(self.terms)
        xs, zs = [], []
        for r in range(len(self.layout)):
            parts = [lab.register(r) for lab in labels]
            xs.append(np.array([p[0] for p in parts], dtype=np.int64))
            zs.append(np.array([p[1] for p in parts], dtype=np.int64))
        return xs, zs, np.array([self.terms[lab] for lab in labels], dtype=float)

    def __len__(self) -> int:
        return len(self.terms)


def channel_eigenvalue(ch: PauliChannel, q: PauliLabel) -> float:
    """Pauli eigenvalue of ``ch`` at ``q``: sum of probabilities times conjugation signs."""
    ch.require_normalized()
    if q.layout != ch.layout:
        raise DimensionError(f'layout mismatch: {q.layout} vs {ch.layout}')
    return float(sum(prob * conjugation_sign(p, q) for p, prob in ch.terms.items()))


def channel_table(ch: PauliChannel) -> PauliEigenTable:
    """Dense eigen table of a channel over a single register."""
    ch.require_normalized()
    n = ch.width
    probs = np.zeros(4 ** n)
    for p, prob in ch.terms.items():
        probs[table_index(p.x, p.z, n)] += prob
    return PauliEigenTable(n, walsh_hadamard_eigenvalues(probs, n))


_SINGLE = {
    'I': np.eye(2, dtype=complex),
    'X': np.array([[0, 1], [1, 0]], dtype=complex),
    'Y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'Z': np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(p: PauliLabel) -> np.ndarray:
    """Dense 2^n x 2^n matrix of ``p`` with qubit 1 as the leftmost tensor factor."""
    out = np.eye(1, dtype=complex)
    for c in p.letters():
        out = np.kron(out, _SINGLE[c])
    return out


def dense_superoperator(ch: PauliChannel) -> np.ndarray:
    """Pauli-transfer matrix of ``ch`` built from explicit matrices.

    Entry (a, b) is 2^-n tr(Q_a Phi(Q_b)) with Q in table order. Only meant as an
    oracle for small systems.

    Raises:
        CapacityError: For more than three qubits.
    """
    n = ch.width
    if n > config.MAX_DENSE_QUBITS:
        raise CapacityError(f'dense superoperator limited to {config.MAX_DENSE_QUBITS} qubits, got {n}')
    ch.require_normalized()
    basis = [pauli_matrix(PauliLabel(p.x, p.z, ch.layout)) for p in logical_labels(n)]
    kraus = [(np.sqrt(prob), pauli_matrix(p)) for p, prob in ch.terms.items()]
    dim = 2 ** n
    ptm = np.zeros((4 ** n, 4 ** n))
    for b, qb in enumerate(basis):
        out = sum(w * w * k @ qb @ k.conj().T for w, k in kraus)
        for a, qa in enumerate(basis):
            ptm[a, b] = np.real(np.trace(qa @ out)) / dim
    return ptm
