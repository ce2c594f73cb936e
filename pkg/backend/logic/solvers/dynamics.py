"""
Competition dynamics.

``integrate_ode`` discretizes da/dt = a*(A) - a with explicit Euler steps
(every attribute moves simultaneously); ``round_robin`` visits the
attributes one after another and moves each a fraction eta towards its best
response. Both clamp to the model bounds after every update.
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path as FilePath
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config.config import config
from core.errors import DivergenceError, ModelValidationError
from logic.model.network import AttributeMatrix, NetworkModel, check_attribute_matrix
from logic.solvers.best_response import respond

logger = logging.getLogger(__name__)


class DynamicsMode(str, Enum):
    ODE_EULER = "ode-euler"
    ROUND_ROBIN = "round-robin"


class VisitOrder(str, Enum):
    INDEX = "index"
    SEEDED_SHUFFLE = "seeded-shuffle"


@dataclass(frozen=True)
class DynamicsConfig:
    """Settings of one trajectory.

    ``step`` is the Euler step h in ODE mode and the damping eta in
    round-robin mode. With ``relative`` set, per-round changes are measured
    relative to max(1, |a|).
    """

    mode: DynamicsMode = DynamicsMode.ROUND_ROBIN
    step: float = 0.5
    tol: float = 1e-6
    max_rounds: int = 10000
    order: VisitOrder = VisitOrder.INDEX
    seed: int = 0
    relative: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mode", DynamicsMode(self.mode))
        object.__setattr__(self, "order", VisitOrder(self.order))
        if not self.step > 0:
            raise ModelValidationError("dynamics step must be positive")
        if self.mode == DynamicsMode.ROUND_ROBIN and self.step > 1:
            raise ModelValidationError("better-response damping must lie in (0, 1]")
        if not self.tol > 0:
            raise ModelValidationError("dynamics tolerance must be positive")
        if int(self.max_rounds) < 1:
            raise ModelValidationError("max_rounds must be at least 1")

    @classmethod
    def for_mode(cls, mode: DynamicsMode, **overrides) -> "DynamicsConfig":
        """Configuration with the environment defaults for ``mode``."""
        mode = DynamicsMode(mode)
        settings = {
            "mode": mode,
            "step": config.eta if mode == DynamicsMode.ROUND_ROBIN else config.euler_step,
            "tol": config.tolerance,
            "max_rounds": config.max_rounds,
        }
        settings.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**settings)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode.value,
            "step": self.step,
            "tol": self.tol,
            "max_rounds": self.max_rounds,
            "order": self.order.value,
            "seed": self.seed,
            "relative": self.relative,
        }


@dataclass
class DynamicsTrace:
    states: List[np.ndarray]
    converged: bool
    rounds: int
    final_residual: float
    mode: DynamicsMode
    residuals: List[float] = field(default_factory=list)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def summary(self) -> Dict[str, Any]:
        return {
            "mode": self.mode.value,
            "converged": self.converged,
            "rounds": self.rounds,
            "final_residual": self.final_residual,
            "final_state": self.final.tolist(),
        }

    def to_frame(self) -> pd.DataFrame:
        """Long table with one row per (round, n, k)."""
        records = [
            (t, n, k, float(value))
            for t, state in enumerate(self.states)
            for (n, k), value in np.ndenumerate(state)
        ]
        return pd.DataFrame.from_records(records, columns=["round", "n", "k", "value"])

    def write_csv(self, file_path: str) -> None:
        path = FilePath(file_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.12g", lineterminator="\n")


def _change(old: float, new: float, relative: bool) -> float:
    delta = abs(new - old)
    return delta / max(1.0, abs(old)) if relative else delta


def _entries(model: NetworkModel) -> List[Tuple[int, int]]:
    return [(n, k) for n in range(model.num_isps) for k in range(model.num_attributes)]


def _diverged(A: np.ndarray) -> bool:
    return not np.isfinite(A).all()


def round_robin(model: NetworkModel, A0: AttributeMatrix, dynamics: DynamicsConfig) -> DynamicsTrace:
    """Damped round-robin better responses until a full round changes nothing beyond tol."""
    A = model.clamp(check_attribute_matrix(model, A0)).astype(float)
    eta = dynamics.step
    entries = _entries(model)
    rng = np.random.default_rng(dynamics.seed)
    states, residuals = [A.copy()], []
    converged, rounds = False, dynamics.max_rounds

    for t in range(dynamics.max_rounds):
        if dynamics.order == VisitOrder.SEEDED_SHUFFLE:
            entries = [entries[i] for i in rng.permutation(len(entries))]
        change = 0.0
        for n, k in entries:
            old = float(A[n, k])
            target = respond(model, A, n, k)
            new = model.clamp_entry(old + eta * (target - old), n, k)
            if not math.isfinite(new):
                raise DivergenceError(f"non-finite attribute ({n}, {k}) in round {t}", trace=states)
            A[n, k] = new
            change = max(change, _change(old, new, dynamics.relative))
        states.append(A.copy())
        residuals.append(change)
        logger.debug("round %d: max change %.3g", t, change)
        if change <= dynamics.tol:
            converged, rounds = True, t
            break

    final = residuals[-1] if residuals else 0.0
    if not converged:
        logger.warning("round-robin dynamics did not converge within %d rounds (change %.3g)",
                       dynamics.max_rounds, final)
    return DynamicsTrace(states=states, converged=converged, rounds=rounds, final_residual=final,
                         mode=DynamicsMode.ROUND_ROBIN, residuals=residuals)


def integrate_ode(model: NetworkModel, A0: AttributeMatrix, dynamics: DynamicsConfig) -> DynamicsTrace:
    """Explicit Euler on da/dt = a*(A) - a; the step halves whenever the residual grows."""
    A = model.clamp(check_attribute_matrix(model, A0)).astype(float)
    h = dynamics.step
    entries = _entries(model)
    states, residuals = [A.copy()], []
    converged, rounds = False, dynamics.max_rounds

    for t in range(dynamics.max_rounds):
        velocity = np.zeros_like(A)
        for n, k in entries:
            velocity[n, k] = respond(model, A, n, k) - A[n, k]
        if _diverged(velocity):
            raise DivergenceError(f"non-finite velocity in step {t}", trace=states)
        scale = np.maximum(1.0, np.abs(A)) if dynamics.relative else 1.0
        residual = float(h * np.max(np.abs(velocity) / scale)) if velocity.size else 0.0
        if residuals and residual > residuals[-1]:
            h /= 2.0
            logger.debug("residual grew in step %d, halving the Euler step to %g", t, h)
        residuals.append(residual)
        if residual <= dynamics.tol:
            converged, rounds = True, t
            break
        A = model.clamp(A + h * velocity)
        if _diverged(A):
            raise DivergenceError(f"non-finite state after step {t}", trace=states)
        states.append(A.copy())

    final = residuals[-1] if residuals else 0.0
    if not converged:
        logger.warning("Euler integration did not converge within %d steps (residual %.3g)",
                       dynamics.max_rounds, final)
    return DynamicsTrace(states=states, converged=converged, rounds=rounds, final_residual=final,
                         mode=DynamicsMode.ODE_EULER, residuals=residuals)


def simulate(model: NetworkModel, A0: AttributeMatrix, dynamics: DynamicsConfig) -> DynamicsTrace:
    if dynamics.mode == DynamicsMode.ODE_EULER:
        return integrate_ode(model, A0, dynamics)
    return round_robin(model, A0, dynamics)


def multi_start(model: NetworkModel, starts: Sequence[AttributeMatrix], dynamics: DynamicsConfig,
                max_workers: Optional[int] = None) -> List[DynamicsTrace]:
    """Independent trajectories from several starts, in start order.

    Runs on a thread pool: starts overlap only inside numpy and scipy calls,
    the pure-Python parts of each round are serialized by the GIL.
    """
    workers = max(1, min(max_workers or config.sim_threads, len(starts) or 1))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda start: simulate(model, start, dynamics), starts))


def random_starts(model: NetworkModel, count: int, seed: int, scale: float = 10.0) -> List[np.ndarray]:
    rng = np.random.default_rng(seed)
    return [model.clamp(rng.uniform(0.0, scale, size=model.shape)) for _ in range(count)]


def initial_state(model: NetworkModel, start: str) -> np.ndarray:
    """Parse ``zeros``, ``random:<seed>`` or a JSON file holding a matrix."""
    if start == "zeros":
        return model.clamp(model.zeros())
    if start.startswith("random:"):
        try:
            seed = int(start.split(":", 1)[1])
        except ValueError:
            raise ModelValidationError(f"invalid random start '{start}'")
        return random_starts(model, 1, seed)[0]
    path = FilePath(start)
    if not path.exists():
        raise ModelValidationError(f"start state file '{start}' not found")
    try:
        matrix = np.asarray(json.loads(path.read_text(encoding="utf-8")), dtype=float)
    except (ValueError, TypeError) as e:
        raise ModelValidationError(f"start state file '{start}' is not a JSON matrix: {e}")
    return model.clamp(check_attribute_matrix(model, matrix))


def endpoint_valuations(model: NetworkModel, traces: Iterable[DynamicsTrace]) -> List[np.ndarray]:
    return [model.arrays.valuations(trace.final) for trace in traces]
