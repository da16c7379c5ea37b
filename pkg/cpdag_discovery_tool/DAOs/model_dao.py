from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np
import torch

from cpdag_discovery_tool.DAOs.dao import DAO
from cpdag_discovery_tool.errors import ValidationError
from cpdag_discovery_tool.models.network import CpdagNet, Hyperparameters
from cpdag_discovery_tool.utils.keyvalue import format_key_value, parse_key_value


FORMAT = "cpdag-model-1"
HEADER_END = b"---\n"

_HYPER_TYPES = {
    "p": int,
    "filters": int,
    "pool": int,
    "dense_units": int,
    "dropout_rate": float,
    "epochs": int,
    "batch_size": int,
    "learning_rate": float,
}


class ModelDAO(DAO):
    """A `.sld` model file

    A text header of `key=value` lines (format, hyperparameters, seed,
    training sample size n, corpus hash and the tensor list) ends with a
    `---` line, followed by every tensor of the state dict as little-endian
    float32 in declaration order.
    """

    def __init__(self, location: Union[str, Path]) -> None:
        super().__init__(location)

    def _adapt_values(self, net: CpdagNet, seed: int, n: Optional[int],
                      corpus_hash: str) -> bytes:
        state = net.state_dict()
        header = {"format": FORMAT, **net.hyper.to_dict(), "seed": seed,
                  "n": "" if n is None else n, "corpus_hash": corpus_hash,
                  "tensors": ";".join(f"{name}:{'x'.join(map(str, t.shape))}"
                                      for name, t in state.items())}
        body = b"".join(t.detach().cpu().numpy().astype("<f4").tobytes() for t in state.values())
        return format_key_value(header).encode() + HEADER_END + body

    def _convert_values(self, payload: bytes) -> Tuple[CpdagNet, Dict[str, object]]:
        head, sep, body = payload.partition(HEADER_END)
        if not sep:
            raise ValidationError(f"{self.location}: missing model header")
        raw = parse_key_value(head.decode(), source=str(self.location))
        if raw.get("format") != FORMAT:
            raise ValidationError(f"{self.location}: not a {FORMAT} file")
        try:
            hyper = Hyperparameters(**{key: cast(raw[key]) for key, cast in _HYPER_TYPES.items()})
        except (KeyError, ValueError) as err:
            raise ValidationError(f"{self.location}: bad hyperparameters ({err})") from err

        net = CpdagNet(hyper)
        state = net.state_dict()
        offset = 0
        loaded = {}
        for name, tensor in state.items():
            size = tensor.numel() * 4
            chunk = body[offset:offset + size]
            if len(chunk) != size:
                raise ValidationError(f"{self.location}: truncated tensor {name}")
            values = np.frombuffer(chunk, dtype="<f4").reshape(tuple(tensor.shape))
            loaded[name] = torch.from_numpy(values.astype(np.float32))
            offset += size
        if offset != len(body):
            raise ValidationError(f"{self.location}: {len(body) - offset} trailing bytes")
        net.load_state_dict(loaded)
        net.eval()
        header = {"seed": int(raw.get("seed", 0)),
                  "n": int(raw["n"]) if raw.get("n") else None,
                  "corpus_hash": raw.get("corpus_hash", "")}
        return net, header

    def add(self, net: CpdagNet, seed: int, n: Optional[int] = None, corpus_hash: str = ""):
        self._write_bytes(self.location, self._adapt_values(net, seed, n, corpus_hash))

    def get(self) -> Tuple[CpdagNet, Dict[str, object]]:
        """The network (in inference mode) and the header's seed, n and corpus_hash"""
        return self._convert_values(self._read_bytes(self.location))
