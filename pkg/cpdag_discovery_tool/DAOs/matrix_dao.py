from io import StringIO
from pathlib import Path
from typing import Union

import numpy as np

from cpdag_discovery_tool.DAOs.dao import DAO
from cpdag_discovery_tool.errors import ValidationError
from cpdag_discovery_tool.models.pdag import PdagMatrix


class RealMatrixDAO(DAO):
    """Headerless CSV of a full square real matrix (`.cor.csv`, `.prob.csv`)"""

    def __init__(self, location: Union[str, Path]) -> None:
        super().__init__(location)

    def _adapt_values(self, matrix: np.ndarray) -> bytes:
        buffer = StringIO()
        np.savetxt(buffer, matrix, fmt="%.17g", delimiter=",")
        return buffer.getvalue().encode()

    def _convert_values(self, payload: bytes) -> np.ndarray:
        try:
            matrix = np.loadtxt(StringIO(payload.decode()), delimiter=",", ndmin=2)
        except ValueError as err:
            raise ValidationError(f"{self.location}: not a numeric CSV matrix ({err})") from err
        if matrix.shape[0] != matrix.shape[1]:
            raise ValidationError(f"{self.location}: matrix is not square, shape {matrix.shape}")
        return matrix

    def add(self, matrix):
        self._write_bytes(self.location, self._adapt_values(np.asarray(matrix, dtype=float)))

    def get(self) -> np.ndarray:
        return self._convert_values(self._read_bytes(self.location))

    def get_correlation(self) -> np.ndarray:
        """Read the matrix and check it is a correlation matrix"""
        c = self.get()
        if not np.all(np.isfinite(c)):
            raise ValidationError(f"{self.location}: non-finite entries")
        if not np.allclose(c, c.T, atol=1e-8):
            raise ValidationError(f"{self.location}: correlation matrix is not symmetric")
        if not np.allclose(np.diag(c), 1.0, atol=1e-8):
            raise ValidationError(f"{self.location}: correlation matrix needs a unit diagonal")
        return c


class AdjacencyDAO(DAO):
    """Headerless CSV of 0/1 marks, row i holding the incoming marks of X{i+1}"""

    def __init__(self, location: Union[str, Path]) -> None:
        super().__init__(location)

    def _adapt_values(self, g: PdagMatrix) -> bytes:
        buffer = StringIO()
        np.savetxt(buffer, g.m, fmt="%d", delimiter=",")
        return buffer.getvalue().encode()

    def _convert_values(self, payload: bytes) -> PdagMatrix:
        try:
            m = np.loadtxt(StringIO(payload.decode()), delimiter=",", ndmin=2, dtype=int)
            return PdagMatrix(m)
        except ValueError as err:
            raise ValidationError(f"{self.location}: not an adjacency matrix ({err})") from err

    def add(self, g: PdagMatrix):
        self._write_bytes(self.location, self._adapt_values(g))

    def get(self) -> PdagMatrix:
        return self._convert_values(self._read_bytes(self.location))


class SepsetDAO(DAO):
    """Plain-text dump of a separating-set table, one pair per line

    Lines read `X1 X3 | X2 X5`, nodes 1-based, an empty right-hand side for
    marginal independence.
    """

    def __init__(self, location: Union[str, Path]) -> None:
        super().__init__(location)

    def _adapt_values(self, sepsets) -> bytes:
        lines = []
        for (i, j), s in sepsets.items():
            rhs = " ".join(f"X{k + 1}" for k in s)
            lines.append(f"X{i + 1} X{j + 1} | {rhs}".rstrip())
        return "".join(f"{line}\n" for line in lines).encode()

    def _convert_values(self, payload: bytes):
        table = {}
        for number, line in enumerate(payload.decode().splitlines(), start=1):
            if not line.strip():
                continue
            try:
                lhs, _, rhs = line.partition("|")
                i, j = (int(token[1:]) - 1 for token in lhs.split())
                table[(i, j)] = tuple(int(token[1:]) - 1 for token in rhs.split())
            except ValueError as err:
                raise ValidationError(f"{self.location}:{number}: malformed sepset line") from err
        return table

    def add(self, sepsets):
        self._write_bytes(self.location, self._adapt_values(sepsets))

    def get(self):
        return self._convert_values(self._read_bytes(self.location))
