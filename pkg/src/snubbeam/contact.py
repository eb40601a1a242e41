"""One-sided spring force law and the nonlinear right-hand side.

The snubber acts as a linear spring that only pushes back while the beam
deflects into it (u <= 0); it detaches for u > 0. This makes the
semi-discrete system piecewise linear with a continuous kink at u = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

__all__ = [
    "UnilateralSpring",
    "SystemState",
    "negative_part",
    "contact_force",
    "rhs",
]


@dataclass(frozen=True)
class UnilateralSpring:
    """One-sided spring: stiffness in N/m, mesh node it touches."""

    stiffness: float
    node: int

    def __post_init__(self):
        if not (np.isfinite(self.stiffness) and self.stiffness >= 0.0):
            raise ValueError(f"spring stiffness must be >= 0, got {self.stiffness!r}")
        if self.node < 0:
            raise ValueError(f"node index must be >= 0, got {self.node}")


@dataclass(eq=False)
class SystemState:
    """Time, displacements and velocities on the reduced DOFs."""

    t: float
    q: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.q.shape != self.v.shape:
            raise ValueError(
                f"displacement and velocity dimensions differ: "
                f"{self.q.shape} vs {self.v.shape}"
            )


def negative_part(u):
    """u for u <= 0, else 0. Vectorizes over arrays."""
    return np.minimum(u, 0.0)


def contact_force(spring: UnilateralSpring, q: np.ndarray, dof: int) -> np.ndarray:
    """Force vector the spring exerts, given the displacement vector.

    ``dof`` is the index of the attachment translation DOF within ``q``
    (resolve a mesh node with ``model.reduced_translation_dof``). The only
    nonzero entry is -k * negative_part(q[dof]): zero when detached,
    a restoring push when the beam penetrates.
    """
    f = np.zeros_like(q, dtype=float)
    f[dof] = -spring.stiffness * negative_part(q[dof])
    return f


def rhs(model, spring: UnilateralSpring, forcing, force_node: int, state: SystemState):
    """First-order right-hand side (dq, dv) of the reduced system.

    dv = M^-1 (-K q + contact + F(t) e). The mass factorization is
    computed once per model and reused across calls.
    """
    _, K_red = model.reduced_matrices()
    ic = model.reduced_translation_dof(spring.node)
    ie = model.reduced_translation_dof(force_node)
    f = -(K_red @ state.q)
    f[ic] -= spring.stiffness * negative_part(state.q[ic])
    f[ie] += forcing.value_at(state.t)
    dv = cho_solve(model.mass_factorization(), f)
    return state.v.copy(), dv
