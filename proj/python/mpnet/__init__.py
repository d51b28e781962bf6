"""Python access to the mpnet simulator core."""

import json

from . import _mpnet
from ._mpnet import MpnetError

__all__ = ["MpnetError", "Simulator", "build_mpi", "eval_expr", "net_dot"]


def build_mpi(program: str, ranks: int) -> dict:
    return json.loads(_mpnet.build_mpi(program, ranks))


def eval_expr(text: str, binding: dict | None = None):
    return json.loads(_mpnet.eval_expr(text, json.dumps(binding or {})))


def net_dot(net: dict) -> str:
    return _mpnet.net_dot(json.dumps(net))


class Simulator:
    def __init__(self, net: dict):
        self._sim = _mpnet.Simulator(json.dumps(net))

    @property
    def state_hash(self) -> str:
        return self._sim.state_hash()

    def state(self) -> dict:
        return json.loads(self._sim.state())

    def enabled(self) -> list:
        return json.loads(self._sim.enabled())

    def fire(self, index: int) -> list:
        return json.loads(self._sim.fire(index))

    def terminal(self) -> bool:
        return self._sim.terminal()

    def reset(self) -> None:
        self._sim.reset()

    def run(self, seed: int = 0, max_steps: int = 1000) -> list:
        return [json.loads(line) for line in self._sim.run(seed, max_steps).splitlines()]

    def explore(self, max_states: int = 1_000_000) -> dict:
        return self._sim.explore(max_states)

    def dot(self, with_marking: bool = False) -> str:
        return self._sim.dot(with_marking)
