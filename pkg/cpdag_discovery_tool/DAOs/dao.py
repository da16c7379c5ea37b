from abc import ABC, abstractmethod
from pathlib import Path
from typing import Union


class DAO(ABC):
    """File-backed data access object

    A DAO owns one location on disk. `_adapt_values` turns Python objects
    into what gets stored, `_convert_values` rebuilds them from what was read.
    """

    @abstractmethod
    def __init__(self, location: Union[str, Path]) -> None:
        self.__location = Path(location)

    @property
    def location(self) -> Path:
        return self.__location

    def exists(self) -> bool:
        return self.__location.exists()

    def _write_bytes(self, path: Path, payload: bytes):
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(payload)
        except OSError as err:
            raise OSError(f"cannot write {path}: {err.strerror or err}") from err

    def _read_bytes(self, path: Path) -> bytes:
        try:
            return path.read_bytes()
        except OSError as err:
            raise OSError(f"cannot read {path}: {err.strerror or err}") from err

    @abstractmethod
    def _adapt_values(self):
        """Adapt Python objects to their stored form"""
        pass

    @abstractmethod
    def _convert_values(self):
        """Recreate Python objects from their stored form"""
        pass

    @abstractmethod
    def add(self):
        pass

    @abstractmethod
    def get(self):
        pass
