"""Reference scoring server speaking the line protocol over stdio.

Run as ``python -m entailkit.backend.serve``. Backed by the builtin
linear model. A bad request gets an error reply; the process only
exits on a shutdown op or end of input.
"""

from __future__ import annotations

import argparse
import sys
from typing import IO, Sequence

from ..errors import EntailkitError
from ..reformulate import instance_from_obj
from .base import Backend, BackendConfig, Hyperparams
from .builtin import BuiltinBackend
from .wire import canonical_line, error_reply, ok_reply, parse_request, require


def _parse_instances(obj: dict) -> list:
    raw = require(obj, "instances", list)
    return [instance_from_obj(item, f"instances[{i}]") for i, item in enumerate(raw)]


def _parse_pairs(obj: dict) -> list[tuple[str, str]]:
    raw = require(obj, "pairs", list)
    pairs: list[tuple[str, str]] = []
    for i, item in enumerate(raw):
        if (
            not isinstance(item, list)
            or len(item) != 2
            or not all(isinstance(t, str) for t in item)
        ):
            raise EntailkitError(f"pairs[{i}] must be a [premise, hypothesis] string pair")
        pairs.append((item[0], item[1]))
    return pairs


class WireServer:
    def __init__(self, backend: Backend) -> None:
        self.backend = backend

    def handle(self, obj: dict) -> dict:
        op = obj["op"]
        if op == "shutdown":
            return ok_reply({})
        if op == "train" or op == "continue_train":
            instances = _parse_instances(obj)
            head_size = require(obj, "head_size", int)
            seed = require(obj, "seed", int)
            hp = Hyperparams.from_obj(obj.get("hyperparams"))
            if op == "train":
                model_id = self.backend.train(instances, head_size, seed, hp)
            else:
                source = require(obj, "model_id", str)
                model_id = self.backend.continue_train(source, instances, head_size, seed, hp)
            return ok_reply(
                {
                    "model_id": model_id,
                    "effective_hyperparams": self.backend.effective_hyperparams(model_id).to_obj(),
                    "n_instances": len(instances),
                }
            )
        if op == "score":
            model_id = require(obj, "model_id", str)
            probs = self.backend.score(model_id, _parse_pairs(obj))
            return ok_reply({"probs": probs})
        if op == "save":
            model_id = require(obj, "model_id", str)
            path = require(obj, "path", str)
            self.backend.save(model_id, path)
            return ok_reply({"path": path})
        if op == "load":
            path = require(obj, "path", str)
            return ok_reply({"model_id": self.backend.load(path)})
        raise EntailkitError(f"unhandled op {op!r}")

    def handle_line(self, line: str) -> tuple[str, bool]:
        """Reply line for one request line, plus whether to keep serving."""
        try:
            obj = parse_request(line)
            reply = self.handle(obj)
            return canonical_line(reply), obj["op"] != "shutdown"
        except EntailkitError as exc:
            return canonical_line(error_reply(str(exc))), True
        except Exception as exc:  # a request must never kill the server
            return canonical_line(error_reply(f"{type(exc).__name__}: {exc}")), True

    def serve(self, stdin: IO[str], stdout: IO[str]) -> None:
        for line in stdin:
            if not line.strip():
                continue
            reply, keep_going = self.handle_line(line)
            stdout.write(reply)
            stdout.flush()
            if not keep_going:
                break


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="entailkit-serve",
        description="Serve the builtin scoring backend over stdio, one JSON object per line.",
    )
    parser.add_argument("--buckets", type=int, default=1 << 18, help="feature hash buckets")
    parser.add_argument(
        "--lr-scale",
        type=float,
        default=1e4,
        help="factor mapping protocol learning rates onto the linear model",
    )
    parser.add_argument(
        "--epoch-scale",
        type=int,
        default=5,
        help="factor mapping protocol epoch counts onto the linear model",
    )
    parser.add_argument(
        "--cross-weight",
        type=float,
        default=8.0,
        help="weight on premise-word x hypothesis-word features",
    )
    args = parser.parse_args(argv)
    backend = BuiltinBackend(
        BackendConfig(
            n_buckets=args.buckets,
            lr_scale=args.lr_scale,
            epoch_scale=args.epoch_scale,
            cross_weight=args.cross_weight,
        )
    )
    WireServer(backend).serve(sys.stdin, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
