import logging
import os
from dataclasses import dataclass
from fractions import Fraction
from itertools import cycle
from typing import Any, Callable, Dict, List, Optional, Sequence

import ray
from more_itertools import divide
from ray.actor import ActorHandle

from qforms.policies.coefficient_policy import Policy, first_violation
from qforms.series import format_fraction

logger = logging.getLogger(__name__)

DEFAULT_NUM_WORKERS: int = 1
THREADS_ENV_VAR = "QFORMS_THREADS"


def num_workers_from_env() -> int:
    raw = os.environ.get(THREADS_ENV_VAR, "").strip()
    if not raw:
        return DEFAULT_NUM_WORKERS
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV_VAR} must be a positive integer, got {raw!r}")
    if value < 1:
        raise ValueError(f"{THREADS_ENV_VAR} must be a positive integer, got {raw!r}")
    return value


def _resolve_workers(num_workers: Optional[int]) -> int:
    if num_workers is None:
        return num_workers_from_env()
    assert num_workers > 0
    return num_workers


@dataclass(frozen=True)
class Witness:
    """The first coefficient that breaks one of the scan policies."""

    index: int
    value: Fraction
    reason: str

    def to_json(self) -> Dict[str, Any]:
        return {"index": self.index, "value": format_fraction(self.value), "reason": self.reason}


def scan_range(
    evaluate: Callable[[int], Fraction], indices: Sequence[int], policies: Sequence[Policy]
) -> Optional[Witness]:
    for n in indices:
        value = Fraction(evaluate(n))
        reason = first_violation(n, value, policies)
        if reason is not None:
            return Witness(n, value, reason)
    return None


@ray.remote
class ScanWorker:
    def __init__(self):
        self._shard_idx = 0

    def set_shard_idx(self, shard_idx: int):
        self._shard_idx = shard_idx

    def scan(self, indices, evaluate, policies) -> Optional[Witness]:
        try:
            return scan_range(evaluate, indices, policies)
        except Exception:
            logger.exception("coefficient scan failed on shard %d", self._shard_idx)
            raise

    def call(self, argument_list, fn) -> List[Any]:
        try:
            return [fn(*args) for args in argument_list]
        except Exception:
            logger.exception("table assembly failed on shard %d", self._shard_idx)
            raise


class ActorPool:
    """A fixed set of ray actors that receive contiguous shards of work."""

    def __init__(self, handles: List[ActorHandle]):
        self.handles = handles

    @classmethod
    def make_replicas(cls, num_replicas: int, actor_class, *init_args, **init_kwargs):
        assert num_replicas > 0
        if not ray.is_initialized():
            ray.init(num_cpus=num_replicas, log_to_driver=False, include_dashboard=False)
        handles = [actor_class.remote(*init_args, **init_kwargs) for _ in range(num_replicas)]
        for i, handle in enumerate(handles):
            handle.set_shard_idx.remote(i)
        logger.info("started %d %s actors", num_replicas, actor_class.__ray_metadata__.class_name)
        return cls(handles)

    def scatter(self, attr: str, shards: Sequence[Any], *args) -> List[Any]:
        """Calls `attr(shard, *args)` on the actors; results keep shard order."""
        refs = [
            getattr(handle, attr).remote(shard, *args)
            for handle, shard in zip(cycle(self.handles), shards)
        ]
        return ray.get(refs)

    def shutdown(self):
        for handle in self.handles:
            ray.kill(handle)
        self.handles = []


def scan_coefficients(
    evaluate: Callable[[int], Fraction],
    start: int,
    stop: int,
    policies: Sequence[Policy],
    num_workers: Optional[int] = None,
) -> Optional[Witness]:
    """Smallest n in [start, stop] violating a policy, or None.

    With more than one worker the range is split into contiguous shards;
    the smallest witnessing index wins, so the answer matches a sequential scan.
    """
    workers = _resolve_workers(num_workers)
    indices = range(start, stop + 1)
    if workers <= 1 or len(indices) < 2 * workers:
        return scan_range(evaluate, indices, policies)
    shards = [list(shard) for shard in divide(workers, indices)]
    pool = ActorPool.make_replicas(workers, ScanWorker)
    try:
        found = [w for w in pool.scatter("scan", shards, evaluate, list(policies)) if w]
    finally:
        pool.shutdown()
    return min(found, key=lambda w: w.index) if found else None


def parallel_map(
    fn: Callable[..., Any], argument_list: Sequence[tuple], num_workers: Optional[int] = None
) -> List[Any]:
    """[fn(*args) for args in argument_list], sharded across actors when allowed."""
    workers = _resolve_workers(num_workers)
    if workers <= 1 or len(argument_list) < 2:
        return [fn(*args) for args in argument_list]
    workers = min(workers, len(argument_list))
    shards = [list(shard) for shard in divide(workers, argument_list)]
    pool = ActorPool.make_replicas(workers, ScanWorker)
    try:
        results = pool.scatter("call", shards, fn)
    finally:
        pool.shutdown()
    return [value for shard in results for value in shard]
