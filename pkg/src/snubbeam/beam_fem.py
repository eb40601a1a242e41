"""Finite-element model of a clamped-free (cantilever) bending beam.

Two-node Hermite cubic elements with a translation and a rotation DOF per
node, assembled on a uniform mesh. The consistent mass matrix is used
throughout; lumping would wreck the modal accuracy this mesh size relies
on. The clamped end is handled by recording the constrained DOFs and
exposing reduced views of the full matrices, which keeps the reduced mass
matrix positive definite for time integration.

All quantities are SI: meters, kilograms, newtons, hertz.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, eigh

__all__ = [
    "BeamProperties",
    "FEModel",
    "CalibrationReport",
    "element_matrices",
    "assemble",
    "add_point_mass",
    "eigenfrequencies",
    "calibrate_point_mass",
]

# relative tolerance for the symmetry guard on assembled matrices
SYMMETRY_RTOL = 1e-10


@dataclass(frozen=True)
class BeamProperties:
    """Geometry and material of a rectangular-section beam."""

    length: float
    width: float
    thickness: float
    young_modulus: float
    density: float

    def __post_init__(self):
        for name in ("length", "width", "thickness", "young_modulus", "density"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0.0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")

    @property
    def section_area(self) -> float:
        """Cross-section area b*h in m^2."""
        return self.width * self.thickness

    @property
    def second_moment(self) -> float:
        """Second moment of area b*h^3/12 in m^4."""
        return self.width * self.thickness**3 / 12.0

    @property
    def bending_stiffness(self) -> float:
        """E*I in N*m^2."""
        return self.young_modulus * self.second_moment

    @property
    def mass_per_length(self) -> float:
        """rho*S in kg/m."""
        return self.density * self.section_area


def element_matrices(EI: float, rhoS: float, le: float):
    """Stiffness and consistent mass matrices of one Hermite cubic element.

    DOF order is (u_left, u'_left, u_right, u'_right). A zero mass density
    is accepted (gives a zero mass matrix); everything else must be
    strictly positive.
    """
    if not (np.isfinite(EI) and EI > 0.0):
        raise ValueError(f"bending stiffness EI must be positive, got {EI!r}")
    if not (np.isfinite(le) and le > 0.0):
        raise ValueError(f"element length must be positive, got {le!r}")
    if not (np.isfinite(rhoS) and rhoS >= 0.0):
        raise ValueError(f"mass per unit length must be >= 0, got {rhoS!r}")

    l, l2 = le, le * le
    Ke = (EI / le**3) * np.array(
        [
            [12.0, 6.0 * l, -12.0, 6.0 * l],
            [6.0 * l, 4.0 * l2, -6.0 * l, 2.0 * l2],
            [-12.0, -6.0 * l, 12.0, -6.0 * l],
            [6.0 * l, 2.0 * l2, -6.0 * l, 4.0 * l2],
        ]
    )
    Me = (rhoS * le / 420.0) * np.array(
        [
            [156.0, 22.0 * l, 54.0, -13.0 * l],
            [22.0 * l, 4.0 * l2, 13.0 * l, -3.0 * l2],
            [54.0, 13.0 * l, 156.0, -22.0 * l],
            [-13.0 * l, -3.0 * l2, -22.0 * l, 4.0 * l2],
        ]
    )
    return Ke, Me


@dataclass(eq=False)
class FEModel:
    """Assembled beam model with clamped-end bookkeeping.

    Matrices are stored full-size; reduced views drop the constrained
    DOFs. Treat instances as immutable once built: the reduced matrices
    and the mass factorization are cached lazily, so sharing a model
    across concurrent simulations is safe as long as nobody mutates
    ``M``/``K`` in place (use :func:`add_point_mass`, which copies).
    """

    n_elements: int
    M: np.ndarray
    K: np.ndarray
    constrained_dofs: tuple[int, ...]
    point_masses: tuple[tuple[int, float], ...] = ()
    _reduced: tuple | None = field(default=None, repr=False)
    _mass_cho: tuple | None = field(default=None, repr=False)

    @property
    def n_nodes(self) -> int:
        return self.n_elements + 1

    @property
    def n_dof(self) -> int:
        return 2 * self.n_nodes

    @property
    def tip_node(self) -> int:
        """Free-end node index."""
        return self.n_elements

    def dof_pair(self, node: int) -> tuple[int, int]:
        """(translation, rotation) global DOF indices of a node."""
        if not 0 <= node < self.n_nodes:
            raise IndexError(f"node {node} out of range for {self.n_nodes} nodes")
        return 2 * node, 2 * node + 1

    @property
    def dof_map(self) -> dict[int, tuple[int, int]]:
        return {node: self.dof_pair(node) for node in range(self.n_nodes)}

    @property
    def free_dofs(self) -> np.ndarray:
        constrained = set(self.constrained_dofs)
        return np.array([i for i in range(self.n_dof) if i not in constrained])

    def reduced_matrices(self) -> tuple[np.ndarray, np.ndarray]:
        """(M_red, K_red) with the constrained rows/columns eliminated."""
        if self._reduced is None:
            free = self.free_dofs
            sel = np.ix_(free, free)
            self._reduced = (self.M[sel].copy(), self.K[sel].copy())
        return self._reduced

    def reduced_translation_dof(self, node: int) -> int:
        """Index of a node's translation DOF within the reduced vectors."""
        t_dof, _ = self.dof_pair(node)
        free = self.free_dofs
        pos = np.searchsorted(free, t_dof)
        if pos >= len(free) or free[pos] != t_dof:
            raise ValueError(f"translation DOF of node {node} is constrained")
        return int(pos)

    def reduced_dof_pair(self, node: int) -> tuple[int, int]:
        """(translation, rotation) indices of a node within the reduced vectors."""
        t = self.reduced_translation_dof(node)
        return t, t + 1

    def mass_factorization(self):
        """Cholesky factorization of the reduced mass matrix, cached."""
        if self._mass_cho is None:
            M_red, _ = self.reduced_matrices()
            try:
                self._mass_cho = cho_factor(M_red)
            except LinAlgError as exc:
                raise LinAlgError(
                    "reduced mass matrix is not positive definite; "
                    "check element properties and constraints"
                ) from exc
        return self._mass_cho


def assemble(props: BeamProperties, n_elements: int) -> FEModel:
    """Assemble the global cantilever model from uniform elements.

    Node 0 is the clamped end; its translation and rotation DOFs are
    recorded as constrained but the matrices are stored full-size.
    """
    if n_elements < 1:
        raise ValueError(f"need at least one element, got {n_elements}")
    le = props.length / n_elements
    Ke, Me = element_matrices(props.bending_stiffness, props.mass_per_length, le)

    n_dof = 2 * (n_elements + 1)
    M = np.zeros((n_dof, n_dof))
    K = np.zeros((n_dof, n_dof))
    for e in range(n_elements):
        i = 2 * e
        K[i : i + 4, i : i + 4] += Ke
        M[i : i + 4, i : i + 4] += Me

    return FEModel(n_elements=n_elements, M=M, K=K, constrained_dofs=(0, 1))


def add_point_mass(model: FEModel, node: int, mass: float) -> FEModel:
    """New model with ``mass`` added at a node's translation DOF.

    Used for the force transducer sitting between shaker and beam. The
    stiffness matrix is unchanged.
    """
    if not (np.isfinite(mass) and mass >= 0.0):
        raise ValueError(f"point mass must be >= 0, got {mass!r}")
    t_dof, _ = model.dof_pair(node)  # raises IndexError on bad node
    M = model.M.copy()
    M[t_dof, t_dof] += mass
    return FEModel(
        n_elements=model.n_elements,
        M=M,
        K=model.K,
        constrained_dofs=model.constrained_dofs,
        point_masses=model.point_masses + ((node, mass),),
    )


def _check_symmetric(A: np.ndarray, name: str) -> None:
    scale = np.abs(A).max()
    if scale > 0 and np.abs(A - A.T).max() > SYMMETRY_RTOL * scale:
        raise ValueError(f"{name} is not symmetric within {SYMMETRY_RTOL} relative")


def eigenfrequencies(model: FEModel, count: int) -> np.ndarray:
    """First ``count`` natural frequencies of the clamped model, in Hz.

    Solves the generalized symmetric eigenproblem K v = w^2 M v on the
    reduced system (LAPACK reduces it through a Cholesky factorization of
    M) and returns f = w / 2 pi in ascending order.
    """
    M_red, K_red = model.reduced_matrices()
    n = M_red.shape[0]
    if not 1 <= count <= n:
        raise ValueError(f"count must be in [1, {n}], got {count}")
    _check_symmetric(M_red, "reduced mass matrix")
    _check_symmetric(K_red, "reduced stiffness matrix")
    try:
        w2 = eigh(K_red, M_red, eigvals_only=True, subset_by_index=(0, count - 1))
    except LinAlgError as exc:
        raise LinAlgError(
            "generalized eigensolve failed; the reduced mass matrix is "
            "likely singular or indefinite"
        ) from exc
    return np.sqrt(np.maximum(w2, 0.0)) / (2.0 * np.pi)


@dataclass(frozen=True)
class CalibrationReport:
    """Outcome of the single-point-mass modal calibration."""

    node: int
    mass: float
    frequencies: tuple[float, float, float]
    targets: tuple[float, float]
    relative_errors: tuple[float, float]
    within_tolerance: bool
    tolerance: float

    def summary(self) -> str:
        f1, f2, f3 = self.frequencies
        e2, e3 = self.relative_errors
        verdict = "matched" if self.within_tolerance else "no match in range"
        return (
            f"point mass {self.mass * 1e3:.3f} g at node {self.node}: "
            f"f1={f1:.2f} f2={f2:.2f} f3={f3:.2f} Hz, "
            f"errors vs targets {e2 * 100:+.2f}% / {e3 * 100:+.2f}% ({verdict})"
        )


def calibrate_point_mass(
    props: BeamProperties,
    n_elements: int,
    node: int,
    target_f2: float,
    target_f3: float,
    tolerance: float = 0.03,
    mass_max: float = 0.1,
    iterations: int = 60,
) -> CalibrationReport:
    """Bisect a single point mass so f2, f3 land on the given targets.

    Natural frequencies decrease monotonically with an added mass, so the
    third frequency (the one farthest off for the bare beam) is bisected
    onto its target; the report then states whether both f2 and f3 fall
    within ``tolerance`` relative. If the target is outside what masses in
    [0, mass_max] can reach, the closest endpoint is reported instead.
    """
    base = assemble(props, n_elements)

    def freqs(mass):
        model = add_point_mass(base, node, mass) if mass > 0 else base
        return eigenfrequencies(model, 3)

    f3_lo_mass = freqs(0.0)[2]
    f3_hi_mass = freqs(mass_max)[2]
    if target_f3 >= f3_lo_mass:
        mass = 0.0
    elif target_f3 <= f3_hi_mass:
        mass = mass_max
    else:
        lo, hi = 0.0, mass_max
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            if freqs(mid)[2] > target_f3:
                lo = mid
            else:
                hi = mid
        mass = 0.5 * (lo + hi)

    f1, f2, f3 = freqs(mass)
    err2 = (f2 - target_f2) / target_f2
    err3 = (f3 - target_f3) / target_f3
    ok = abs(err2) <= tolerance and abs(err3) <= tolerance
    return CalibrationReport(
        node=node,
        mass=mass,
        frequencies=(float(f1), float(f2), float(f3)),
        targets=(target_f2, target_f3),
        relative_errors=(float(err2), float(err3)),
        within_tolerance=ok,
        tolerance=tolerance,
    )
