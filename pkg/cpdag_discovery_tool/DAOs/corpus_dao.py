import hashlib
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from cpdag_discovery_tool.config import SHARD_SIZE
from cpdag_discovery_tool.DAOs.dao import DAO
from cpdag_discovery_tool.errors import ValidationError
from cpdag_discovery_tool.models.pdag import PdagMatrix
from cpdag_discovery_tool.models.sem import TrainingPair
from cpdag_discovery_tool.utils.filepaths import get_filepaths_from_dir
from cpdag_discovery_tool.utils.keyvalue import format_key_value, parse_key_value


FORMAT = "cpdag-corpus-1"
MANIFEST = "manifest.txt"
SHARD_SUFFIX = ".corpus"


def record_dtype(p: int) -> np.dtype:
    """One stored pair: little-endian float32 feature, uint8 label and permutation"""
    return np.dtype([
        ("feature", "<f4", (p, p)),
        ("label", "u1", (p, p)),
        ("permutation", "<u2", (p,)),
    ])


class CorpusDAO(DAO):
    """A directory holding `.corpus` shards and a flat key=value manifest

    Manifest keys: format, p, n, count, seed, shard_size, shards (comma
    separated shard file names in order).
    """

    def __init__(self, location: Union[str, Path]) -> None:
        super().__init__(location)

    @property
    def manifest_path(self) -> Path:
        return self.location / MANIFEST

    def _adapt_values(self, pairs: Sequence[TrainingPair]) -> np.ndarray:
        p = pairs[0].p
        records = np.zeros(len(pairs), dtype=record_dtype(p))
        for k, pair in enumerate(pairs):
            if pair.p != p:
                raise ValidationError(f"pair {k} has p={pair.p}, corpus has p={p}")
            records[k] = (pair.feature, pair.label.m, pair.permutation)
        return records

    def _convert_values(self, records: np.ndarray) -> List[TrainingPair]:
        return [TrainingPair(r["feature"].astype(float), PdagMatrix(r["label"]), r["permutation"])
                for r in records]

    def add(self, pairs: Sequence[TrainingPair], n: int, seed: int,
            shard_size: Optional[int] = None):
        """Write the pairs, replacing any corpus already in the directory"""
        if not pairs:
            raise ValidationError("cannot write an empty corpus")
        shard_size = shard_size or SHARD_SIZE
        records = self._adapt_values(pairs)
        self.location.mkdir(parents=True, exist_ok=True)
        for stale in get_filepaths_from_dir(self.location, suffix=SHARD_SUFFIX):
            Path(stale).unlink()

        shards = []
        for index, start in enumerate(range(0, len(records), shard_size)):
            name = f"shard-{index:05d}{SHARD_SUFFIX}"
            self._write_bytes(self.location / name, records[start:start + shard_size].tobytes())
            shards.append(name)

        manifest = {
            "format": FORMAT,
            "p": pairs[0].p,
            "n": n,
            "count": len(pairs),
            "seed": seed,
            "shard_size": shard_size,
            "shards": ",".join(shards),
        }
        self._write_bytes(self.manifest_path, format_key_value(manifest).encode())

    def manifest(self) -> Dict[str, object]:
        """The manifest with integer fields parsed and `shards` as a list"""
        raw = parse_key_value(self._read_bytes(self.manifest_path).decode(),
                              source=str(self.manifest_path))
        if raw.get("format") != FORMAT:
            raise ValidationError(f"{self.manifest_path}: not a {FORMAT} manifest")
        try:
            manifest = {key: int(raw[key]) for key in ("p", "n", "count", "seed", "shard_size")}
        except (KeyError, ValueError) as err:
            raise ValidationError(f"{self.manifest_path}: missing or bad field {err}") from err
        manifest["shards"] = [name for name in raw.get("shards", "").split(",") if name]
        return manifest

    def records(self) -> np.ndarray:
        """All stored records as one structured array"""
        manifest = self.manifest()
        dtype = record_dtype(manifest["p"])
        parts = []
        for name in manifest["shards"]:
            payload = self._read_bytes(self.location / name)
            if len(payload) % dtype.itemsize:
                raise ValidationError(f"{self.location / name}: truncated shard")
            parts.append(np.frombuffer(payload, dtype=dtype))
        records = np.concatenate(parts) if parts else np.zeros(0, dtype=dtype)
        if len(records) != manifest["count"]:
            raise ValidationError(
                f"{self.location}: manifest lists {manifest['count']} pairs, shards hold {len(records)}")
        return records

    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        """Features (float32) and labels (uint8), both count x p x p"""
        records = self.records()
        return records["feature"].copy(), records["label"].copy()

    def get(self, index: int) -> TrainingPair:
        return self._convert_values(self.records()[index:index + 1])[0]

    def get_all(self) -> List[TrainingPair]:
        return self._convert_values(self.records())

    def corpus_hash(self) -> str:
        """SHA-256 over the manifest and every shard, in manifest order"""
        digest = hashlib.sha256(self._read_bytes(self.manifest_path))
        for name in self.manifest()["shards"]:
            digest.update(self._read_bytes(self.location / name))
        return digest.hexdigest()
