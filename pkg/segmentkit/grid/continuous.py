from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from segmentkit.errors import StructuralError

MAX_DEGREE = 3


@dataclass(frozen=True)
class Piece:
    """ One polynomial piece c0 + c1 x + c2 x^2 + c3 x^3 on [lo, hi) in absolute coordinates. """
    lo: float
    hi: float
    coeffs: tuple[float, float, float, float]

    def to_json(self) -> list[float]:
        return [self.lo, self.hi, *self.coeffs]


class ContinuousSignal:
    """ Piecewise cubic signal on [0, 1].

    Pieces are half-open [lo, hi) except the last one, which is closed at 1, so the
    signal is right-continuous and continuous at s = 1. Everything that integrates the
    signal (cell averages, norms, inner products) uses exact antiderivatives.

    >>> g = ContinuousSignal.polynomial([0.0, 1.0])
    >>> g.integrate(0.0, 0.5)
    0.125
    >>> float(heaviside(0.5).evaluate(0.5))
    1.0
    """

    __slots__ = ('_breaks', '_coeffs', '_antiderivative', '_cumulative')

    def __init__(self, breaks: Sequence[float] | np.ndarray, coeffs: Sequence[Sequence[float]] | np.ndarray):
        breaks = np.array(breaks, dtype=float)
        coeffs = np.array(coeffs, dtype=float)
        if coeffs.ndim == 1:
            coeffs = coeffs[:, None]

        if breaks.ndim != 1 or len(breaks) < 2:
            raise StructuralError("A signal needs at least one piece")
        if coeffs.shape[0] != len(breaks) - 1:
            raise StructuralError(f"{len(breaks) - 1} pieces but {coeffs.shape[0]} coefficient rows")
        if coeffs.shape[1] > MAX_DEGREE + 1:
            raise StructuralError(f"Polynomial degree {coeffs.shape[1] - 1} exceeds {MAX_DEGREE}")
        if breaks[0] != 0.0 or breaks[-1] != 1.0:
            raise StructuralError(f"Pieces must cover [0, 1], got [{breaks[0]}, {breaks[-1]}]")
        if not np.all(np.diff(breaks) > 0):
            raise StructuralError("Piece intervals must be non-empty, ordered and without overlap")
        if not np.all(np.isfinite(coeffs)) or not np.all(np.isfinite(breaks)):
            raise StructuralError("Signal coefficients must be finite")

        padded = np.zeros((coeffs.shape[0], MAX_DEGREE + 1))
        padded[:, :coeffs.shape[1]] = coeffs

        antiderivative = P.polyint(padded, axis=1)
        lows = _polyval_rows(antiderivative, breaks[:-1])
        highs = _polyval_rows(antiderivative, breaks[1:])

        self._breaks = breaks
        self._coeffs = padded
        self._antiderivative = antiderivative
        self._cumulative = np.concatenate(([0.0], np.cumsum(highs - lows)))

        for array in (self._breaks, self._coeffs, self._antiderivative, self._cumulative):
            array.flags.writeable = False

    # -- construction --------------------------------------------------------------------

    @classmethod
    def from_pieces(cls, pieces: Iterable[Piece | Sequence[float]]) -> ContinuousSignal:
        """ Build from pieces given as Piece objects or [lo, hi, c0, c1, c2, c3] rows. """
        try:
            rows = [piece.to_json() if isinstance(piece, Piece) else [float(x) for x in piece] for piece in pieces]
        except (TypeError, ValueError) as e:
            raise StructuralError(f"Pieces must be lists of numbers: {e}") from e
        if not rows:
            raise StructuralError("A signal needs at least one piece")

        for index, row in enumerate(rows):
            if len(row) < 3 or len(row) > 2 + MAX_DEGREE + 1:
                raise StructuralError(f"Piece {index}: expected [lo, hi, c0, ..., c3], got {row}")
        for index in range(1, len(rows)):
            if rows[index][0] != rows[index - 1][1]:
                raise StructuralError(
                    f"Piece {index} starts at {rows[index][0]} but piece {index - 1} ends at {rows[index - 1][1]}")

        breaks = [float(rows[0][0])] + [float(row[1]) for row in rows]
        coeffs = np.zeros((len(rows), MAX_DEGREE + 1))
        for index, row in enumerate(rows):
            coeffs[index, :len(row) - 2] = row[2:]
        return cls(breaks, coeffs)

    @classmethod
    def constant(cls, value: float) -> ContinuousSignal:
        return cls([0.0, 1.0], [[value]])

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]) -> ContinuousSignal:
        return cls([0.0, 1.0], [list(coeffs)])

    @classmethod
    def step(cls, points: Sequence[float], values: Sequence[float]) -> ContinuousSignal:
        """ Piecewise constant signal; points include 0 and 1, one value per interval. """
        if len(values) != len(points) - 1:
            raise StructuralError(f"{len(points)} points need {len(points) - 1} values, got {len(values)}")
        return cls(points, np.asarray(values, dtype=float)[:, None])

    # -- structure -----------------------------------------------------------------------

    @property
    def breaks(self) -> np.ndarray:
        return self._breaks

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def piece_count(self) -> int:
        return len(self._breaks) - 1

    def pieces(self) -> list[Piece]:
        return [Piece(float(self._breaks[i]), float(self._breaks[i + 1]),
                      tuple(float(c) for c in self._coeffs[i]))  # type: ignore[arg-type]
                for i in range(self.piece_count)]

    def to_json(self) -> dict:
        return {'format': 1, 'pieces': [piece.to_json() for piece in self.pieces()]}

    @classmethod
    def from_json(cls, document: dict) -> ContinuousSignal:
        if 'pieces' not in document:
            raise StructuralError("Piecewise signal document has no 'pieces'")
        return cls.from_pieces(document['pieces'])

    def is_piecewise_constant(self) -> bool:
        return bool(np.all(self._coeffs[:, 1:] == 0.0))

    def piece_index(self, x: np.ndarray | float) -> np.ndarray:
        """ Index of the piece containing x; the last piece is closed at 1. """
        index = np.searchsorted(self._breaks, x, side='right') - 1
        return np.clip(index, 0, self.piece_count - 1)

    # -- evaluation ----------------------------------------------------------------------

    def evaluate(self, x: np.ndarray | float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        index = self.piece_index(x)
        return _polyval_rows(self._coeffs[index], x)

    def __call__(self, x: np.ndarray | float) -> np.ndarray:
        return self.evaluate(x)

    def antiderivative(self, x: np.ndarray | float) -> np.ndarray:
        """ G(x) = integral of the signal from 0 to x. """
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        index = self.piece_index(x)
        start = self._breaks[index]
        rows = self._antiderivative[index]
        return self._cumulative[index] + _polyval_rows(rows, x) - _polyval_rows(rows, start)

    def integrate(self, lo: float, hi: float) -> float:
        return float(self.antiderivative(hi) - self.antiderivative(lo))

    def cell_integrals(self, edges: np.ndarray) -> np.ndarray:
        """ Integrals over consecutive [edges[k], edges[k+1]]. """
        return np.diff(self.antiderivative(edges))

    def left_limits(self) -> np.ndarray:
        """ Values approached from the left at each interior break. """
        return _polyval_rows(self._coeffs[:-1], self._breaks[1:-1])

    def right_limits(self) -> np.ndarray:
        return _polyval_rows(self._coeffs[1:], self._breaks[1:-1])

    def discontinuities(self, tolerance: float = 0.0) -> np.ndarray:
        """ Interior breaks where the signal jumps. """
        jumps = np.abs(self.left_limits() - self.right_limits()) > tolerance
        return self._breaks[1:-1][jumps]

    def derivative_energy(self) -> float:
        """ Integral of |f'|^2 over the pieces (jumps excluded). """
        derivative = P.polyder(self._coeffs, axis=1)
        return _piecewise_square_integral(self._breaks, derivative)

    # -- Hilbert space -------------------------------------------------------------------

    def norm2(self) -> float:
        """ Squared L2 norm. """
        return _piecewise_square_integral(self._breaks, self._coeffs)

    def norm(self) -> float:
        return float(np.sqrt(self.norm2()))

    def overlapping(self, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """ Coefficient rows of the pieces meeting [lo, hi] with their clipped bounds. """
        first = int(self.piece_index(lo))
        last = int(np.searchsorted(self._breaks, hi, side='left')) - 1
        last = min(max(last, first), self.piece_count - 1)
        rows = self._coeffs[first:last + 1]
        starts = np.maximum(self._breaks[first:last + 1], lo)
        ends = np.minimum(self._breaks[first + 1:last + 2], hi)
        keep = ends > starts
        return rows[keep], starts[keep], ends[keep]

    def norm2_on(self, lo: float, hi: float) -> float:
        """ Squared L2 norm of the signal restricted to [lo, hi]. """
        rows, starts, ends = self.overlapping(lo, hi)
        if len(rows) == 0:
            return 0.0
        antiderivative = P.polyint(_row_products(rows, rows), axis=1)
        return float(np.sum(_polyval_rows(antiderivative, ends) - _polyval_rows(antiderivative, starts)))

    def constant_on(self, lo: float, hi: float) -> float | None:
        """ The value of the signal on [lo, hi] if it is constant there, else None. """
        rows, _, _ = self.overlapping(lo, hi)
        if len(rows) == 0 or np.any(rows[:, 1:] != 0.0) or np.any(rows[:, 0] != rows[0, 0]):
            return None
        return float(rows[0, 0])

    def _merged(self, other: ContinuousSignal) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        breaks = np.union1d(self._breaks, other._breaks)
        middles = 0.5 * (breaks[:-1] + breaks[1:])
        return breaks, self._coeffs[self.piece_index(middles)], other._coeffs[other.piece_index(middles)]

    def inner(self, other: ContinuousSignal) -> float:
        breaks, mine, theirs = self._merged(other)
        return _piecewise_integral(breaks, _row_products(mine, theirs))

    def __add__(self, other: ContinuousSignal) -> ContinuousSignal:
        breaks, mine, theirs = self._merged(other)
        return ContinuousSignal(breaks, mine + theirs)

    def __sub__(self, other: ContinuousSignal) -> ContinuousSignal:
        breaks, mine, theirs = self._merged(other)
        return ContinuousSignal(breaks, mine - theirs)

    def scaled(self, factor: float) -> ContinuousSignal:
        return ContinuousSignal(self._breaks, self._coeffs * factor)

    def __repr__(self):
        return f"ContinuousSignal(pieces={self.piece_count}, breaks={self._breaks.tolist() if self.piece_count < 8 else '...'})"


def heaviside(a: float) -> ContinuousSignal:
    """ chi_[a,1]: 0 on [0, a), 1 on [a, 1]. """
    if not 0.0 <= a < 1.0:
        raise StructuralError(f"Heaviside jump must lie in [0, 1), got {a}")
    if a == 0.0:
        return ContinuousSignal.constant(1.0)
    return ContinuousSignal.step([0.0, a, 1.0], [0.0, 1.0])


def _polyval_rows(rows: np.ndarray, x: np.ndarray | float) -> np.ndarray:
    """ Horner evaluation of row-wise coefficient vectors (lowest degree first) at matching x. """
    x = np.asarray(x, dtype=float)
    result = np.zeros(np.broadcast(rows[..., 0], x).shape)
    for column in range(rows.shape[-1] - 1, -1, -1):
        result = result * x + rows[..., column]
    return result


def _piecewise_integral(breaks: np.ndarray, rows: np.ndarray) -> float:
    antiderivative = P.polyint(rows, axis=1)
    return float(np.sum(_polyval_rows(antiderivative, breaks[1:]) - _polyval_rows(antiderivative, breaks[:-1])))


def _piecewise_square_integral(breaks: np.ndarray, rows: np.ndarray) -> float:
    return _piecewise_integral(breaks, _row_products(rows, rows))


def _row_products(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """ Row-wise polynomial products, untrimmed so every row keeps the same length. """
    result = np.zeros((left.shape[0], left.shape[1] + right.shape[1] - 1))
    for i in range(left.shape[1]):
        for j in range(right.shape[1]):
            result[:, i + j] += left[:, i] * right[:, j]
    return result
