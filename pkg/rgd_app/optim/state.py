# rgd_app/optim/state.py
"""
Estado de la descenso, restricciones, reglas de parada y trayectorias.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from rgd_app.errors import InvalidConfigError, InvalidInputError

CONSTRAINT_KINDS = ('unconstrained', 'l2_ball')

STATUS_COMPLETED = 'completed'
STATUS_CONVERGED = 'converged'
STATUS_BUDGET = 'budget'
STATUS_DIVERGED = 'diverged'


@dataclass(frozen=True)
class OptimState:
    """Iterado ŵ_(t), paso α, iteración t y evaluaciones de gradiente por fila consumidas."""

    w: np.ndarray
    alpha: float
    t: int = 0
    grad_evals: int = 0

    def __post_init__(self):
        w = np.array(self.w, dtype=float).ravel()
        object.__setattr__(self, 'w', w)
        if not float(self.alpha) > 0:
            raise InvalidConfigError(f"El paso alpha debe ser positivo, recibido {self.alpha}", field='alpha')
        if int(self.t) < 0 or int(self.grad_evals) < 0:
            raise InvalidInputError("t y grad_evals deben ser ≥ 0")

    def advance(self, w, cost) -> 'OptimState':
        return OptimState(w=w, alpha=self.alpha, t=self.t + 1, grad_evals=self.grad_evals + int(cost))


@dataclass(frozen=True)
class Constraint:
    """Conjunto factible W: sin restricción o bola ℓ2 (center, radius)."""

    kind: str = 'unconstrained'
    center: Optional[np.ndarray] = None
    radius: Optional[float] = None

    def __post_init__(self):
        if self.kind not in CONSTRAINT_KINDS:
            raise InvalidConfigError(f"Restricción desconocida: '{self.kind}'", field='constraint')
        if self.kind == 'l2_ball':
            if self.radius is None or not float(self.radius) > 0:
                raise InvalidConfigError("La bola ℓ2 requiere radius > 0", field='radius')
            if self.center is None:
                raise InvalidConfigError("La bola ℓ2 requiere center", field='center')
            object.__setattr__(self, 'center', np.asarray(self.center, dtype=float).ravel())

    @classmethod
    def unconstrained(cls) -> 'Constraint':
        return cls()

    @classmethod
    def l2_ball(cls, center, radius) -> 'Constraint':
        return cls('l2_ball', center, radius)

    def project(self, w) -> np.ndarray:
        """Proyección euclídea π_W(w)."""
        w = np.asarray(w, dtype=float)
        if self.kind == 'unconstrained':
            return w
        offset = w - self.center
        norm = float(np.linalg.norm(offset))
        if norm <= self.radius:
            return w
        return self.center + offset * (self.radius / norm)

    def contains(self, w, tol=1e-12) -> bool:
        if self.kind == 'unconstrained':
            return True
        return float(np.linalg.norm(np.asarray(w) - self.center)) <= self.radius * (1.0 + tol)


@dataclass(frozen=True)
class StoppingRule:
    """
    Regla de parada de una ejecución.

    Args:
        max_iters: Número máximo de actualizaciones T (≥ 1)
        grad_norm_tol: Se detiene cuando max_j |ĝ_j| < tol (0 lo desactiva)
        budget: Tope de evaluaciones de gradiente por fila (None = sin tope)
    """

    max_iters: int
    grad_norm_tol: float = 0.0
    budget: Optional[int] = None

    def __post_init__(self):
        if int(self.max_iters) < 1:
            raise InvalidConfigError("max_iters debe ser ≥ 1", field='max_iters')
        if float(self.grad_norm_tol) < 0:
            raise InvalidConfigError("grad_norm_tol debe ser ≥ 0", field='grad_tol')
        if self.budget is not None and int(self.budget) < 1:
            raise InvalidConfigError("budget debe ser ≥ 1", field='budget')

    def gradient_small(self, gradient) -> bool:
        return float(self.grad_norm_tol) > 0 and float(np.max(np.abs(gradient))) < float(self.grad_norm_tol)

    def affordable(self, spent, cost) -> bool:
        return self.budget is None or spent + cost <= int(self.budget)


@dataclass
class Trajectory:
    """
    Registro de una ejecución.

    Los estados se guardan cada `record_every` actualizaciones, o cada vez que
    grad_evals cruza un múltiplo de `checkpoint_evals` si se indica; el estado
    inicial y el final se guardan siempre.
    """

    record_every: int = 1
    checkpoint_evals: Optional[int] = None
    states: List[OptimState] = field(default_factory=list)
    status: str = STATUS_COMPLETED
    message: str = ''
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(self.record_every) < 1:
            raise InvalidConfigError("record_every debe ser ≥ 1", field='record_every')
        if self.checkpoint_evals is not None and int(self.checkpoint_evals) < 1:
            raise InvalidConfigError("checkpoint_evals debe ser ≥ 1", field='checkpoint_evals')
        self._last = None

    def record(self, state: OptimState, force=False):
        self._last = state
        if not self.states or force:
            self._append(state)
            return
        if self.checkpoint_evals is not None:
            previous = self.states[-1].grad_evals // int(self.checkpoint_evals)
            if state.grad_evals // int(self.checkpoint_evals) > previous:
                self._append(state)
        elif state.t % int(self.record_every) == 0:
            self._append(state)

    def _append(self, state):
        if not self.states or self.states[-1] is not state:
            self.states.append(state)

    def finish(self, status, message=''):
        if self._last is not None:
            self._append(self._last)
        self.status = status
        self.message = message
        return self

    @property
    def final(self) -> OptimState:
        return self.states[-1]

    @property
    def ok(self) -> bool:
        return self.status != STATUS_DIVERGED

    @property
    def iterates(self) -> np.ndarray:
        return np.vstack([s.w for s in self.states])

    @property
    def iterations(self) -> np.ndarray:
        return np.array([s.t for s in self.states], dtype=int)

    @property
    def evals(self) -> np.ndarray:
        return np.array([s.grad_evals for s in self.states], dtype=int)

    def to_result(self) -> dict:
        """Resumen en el formato {'status', 'message'} usado por la aplicación."""
        return {
            'status': self.status,
            'message': self.message,
            'iterations': int(self.final.t) if self.states else 0,
            'grad_evals': int(self.final.grad_evals) if self.states else 0,
            **self.diagnostics,
        }
