"""Client for external scoring backends speaking the line protocol.

The server command comes from the EFL_BRIDGE_CMD environment variable
(or the backend config). The client keeps a single request in flight:
write one canonical JSON line, read one reply line.
"""

from __future__ import annotations

import json
import os
import shlex
import subprocess
from typing import Sequence

from ..errors import BackendError
from ..reformulate import EntailmentInstance, instance_to_obj
from .base import Backend, BackendConfig, Hyperparams
from .wire import canonical_line

ENV_VAR = "EFL_BRIDGE_CMD"


class BridgeBackend(Backend):
    def __init__(self, config: BackendConfig | None = None) -> None:
        self.config = config or BackendConfig(kind="bridge")
        cmd = self.config.bridge_cmd or os.environ.get(ENV_VAR)
        if not cmd:
            raise BackendError(
                f"no bridge command: set {ENV_VAR} or BackendConfig.bridge_cmd"
            )
        self._cmd = cmd
        try:
            self._proc = subprocess.Popen(
                shlex.split(cmd),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise BackendError(f"cannot launch bridge {cmd!r}: {exc}") from None
        self._hyperparams: dict[str, Hyperparams] = {}

    def _request(self, obj: dict) -> dict:
        proc = self._proc
        if proc.poll() is not None:
            raise BackendError(
                f"bridge {self._cmd!r} exited with code {proc.returncode}"
            )
        assert proc.stdin is not None and proc.stdout is not None
        try:
            proc.stdin.write(canonical_line(obj))
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise BackendError(f"bridge {self._cmd!r} is not accepting requests: {exc}") from None
        line = proc.stdout.readline()
        if not line:
            raise BackendError(
                f"bridge {self._cmd!r} closed its output (exit code {proc.poll()})"
            )
        try:
            reply = json.loads(line)
        except json.JSONDecodeError:
            raise BackendError(f"bridge sent a non-JSON reply: {line!r}") from None
        if not isinstance(reply, dict) or "ok" not in reply:
            raise BackendError(f"bridge reply missing 'ok': {line!r}")
        if not reply["ok"]:
            raise BackendError(f"bridge error: {reply.get('error', 'unspecified')}")
        payload = reply.get("payload")
        if not isinstance(payload, dict):
            raise BackendError(f"bridge reply missing payload: {line!r}")
        return payload

    def _train_request(
        self,
        op: str,
        instances: Sequence[EntailmentInstance],
        head_size: int,
        seed: int,
        hyperparams: Hyperparams | None,
        model_id: str | None = None,
    ) -> str:
        obj: dict = {
            "op": op,
            "instances": [instance_to_obj(inst) for inst in instances],
            "head_size": head_size,
            "seed": seed,
            "hyperparams": hyperparams.to_obj() if hyperparams else None,
        }
        if model_id is not None:
            obj["model_id"] = model_id
        payload = self._request(obj)
        new_id = payload.get("model_id")
        if not isinstance(new_id, str):
            raise BackendError(f"bridge train reply missing model_id: {payload!r}")
        self._hyperparams[new_id] = Hyperparams.from_obj(
            payload.get("effective_hyperparams")
        )
        return new_id

    def train(
        self,
        instances: Sequence[EntailmentInstance],
        head_size: int,
        seed: int,
        hyperparams: Hyperparams | None = None,
    ) -> str:
        return self._train_request("train", instances, head_size, seed, hyperparams)

    def continue_train(
        self,
        model_id: str,
        instances: Sequence[EntailmentInstance],
        head_size: int,
        seed: int,
        hyperparams: Hyperparams | None = None,
    ) -> str:
        return self._train_request(
            "continue_train", instances, head_size, seed, hyperparams, model_id
        )

    def score(self, model_id: str, pairs: Sequence[tuple[str, str]]) -> list[list[float]]:
        payload = self._request(
            {"op": "score", "model_id": model_id, "pairs": [[p, h] for p, h in pairs]}
        )
        probs = payload.get("probs")
        if not isinstance(probs, list):
            raise BackendError(f"bridge score reply missing probs: {payload!r}")
        return [[float(v) for v in row] for row in probs]

    def save(self, model_id: str, path: str) -> None:
        self._request({"op": "save", "model_id": model_id, "path": path})

    def load(self, path: str) -> str:
        payload = self._request({"op": "load", "path": path})
        model_id = payload.get("model_id")
        if not isinstance(model_id, str):
            raise BackendError(f"bridge load reply missing model_id: {payload!r}")
        self._hyperparams.setdefault(model_id, Hyperparams())
        return model_id

    def effective_hyperparams(self, model_id: str) -> Hyperparams:
        try:
            return self._hyperparams[model_id]
        except KeyError:
            raise BackendError(f"no hyperparameters recorded for {model_id!r}") from None

    def close(self) -> None:
        proc = self._proc
        if proc.poll() is None:
            try:
                assert proc.stdin is not None
                proc.stdin.write(canonical_line({"op": "shutdown"}))
                proc.stdin.flush()
                proc.stdin.close()
            except (BrokenPipeError, OSError, ValueError):
                pass
            try:
                proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()
