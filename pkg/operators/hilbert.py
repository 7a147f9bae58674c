"""
Dense operator algebra over composite atom-cavity Hilbert spaces.

Basis conventions used everywhere in the project:
    atom factors:   |e> = index 0, |l> = index 1
    cavity factors: Fock states ascending from |0>
    canonical order of the double JC layout: (atom_a, cav_a, atom_b, cav_b)
"""

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from config import HERMITICITY_TOL
from operators.validators import hermiticity_deviation, max_abs, validate_density_matrix

ATOM_A = "atom_a"
CAV_A = "cav_a"
ATOM_B = "atom_b"
CAV_B = "cav_b"

CANONICAL_LABELS = (ATOM_A, CAV_A, ATOM_B, CAV_B)
ATOM_LABELS = (ATOM_A, ATOM_B)
CAVITY_LABELS = (CAV_A, CAV_B)

# Labels of single-factor spaces that elementary operators live on
QUBIT = "qubit"
MODE = "mode"

ATOM_DIM = 2
EXCITED = 0
GROUND = 1


class LayoutError(ValueError):
    """Raised when operators and Hilbert-space layouts do not fit together."""
    pass


class Factor(NamedTuple):
    """One tensor factor of a Hilbert space."""
    label: str
    dim: int


def _is_atom(label: str) -> bool:
    return label in ATOM_LABELS or label == QUBIT


def _is_cavity(label: str) -> bool:
    return label in CAVITY_LABELS


@dataclass(frozen=True)
class HilbertSpace:
    """
    Ordered list of labelled tensor factors.

    Atom factors have dimension 2 and cavity factors a Fock cutoff of at least 2.
    Instances are immutable and safe to share between workers.
    """

    factors: Tuple[Factor, ...]

    def __post_init__(self):
        factors = tuple(Factor(str(label), int(dim)) for label, dim in self.factors)
        object.__setattr__(self, "factors", factors)

        if not factors:
            raise LayoutError("A Hilbert space needs at least one factor")

        labels = [f.label for f in factors]
        if len(set(labels)) != len(labels):
            raise LayoutError(f"Duplicate factor labels: {labels}")

        for label, dim in factors:
            if dim < 1:
                raise LayoutError(f"Factor {label} has non-positive dimension {dim}")
            if _is_atom(label) and dim != ATOM_DIM:
                raise LayoutError(f"Atom factor {label} must have dimension 2, got {dim}")
            if _is_cavity(label) and dim < 2:
                raise LayoutError(f"Cavity factor {label} needs a Fock cutoff >= 2, got {dim}")

    @classmethod
    def double_jc(cls, cutoff_a: int, cutoff_b: Optional[int] = None) -> "HilbertSpace":
        """Canonical (atom_a, cav_a, atom_b, cav_b) layout."""
        cutoff_b = cutoff_a if cutoff_b is None else cutoff_b
        return cls((
            Factor(ATOM_A, ATOM_DIM), Factor(CAV_A, cutoff_a),
            Factor(ATOM_B, ATOM_DIM), Factor(CAV_B, cutoff_b),
        ))

    @classmethod
    def pair(cls, side: str, cutoff: int) -> "HilbertSpace":
        """Single atom-cavity pair (``side`` is "a" or "b")."""
        side = side.lower()
        if side not in ("a", "b"):
            raise LayoutError(f"Unknown pair side: {side}")
        atom, cavity = (ATOM_A, CAV_A) if side == "a" else (ATOM_B, CAV_B)
        return cls((Factor(atom, ATOM_DIM), Factor(cavity, cutoff)))

    @classmethod
    def local(cls, label: str, dim: int) -> "HilbertSpace":
        """One-factor space for elementary operators."""
        return cls((Factor(label, dim),))

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(f.label for f in self.factors)

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(f.dim for f in self.factors)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def is_canonical(self) -> bool:
        return self.labels == CANONICAL_LABELS

    def index(self, label: str) -> int:
        """Position of a factor in the layout."""
        try:
            return self.labels.index(label)
        except ValueError:
            raise LayoutError(f"Unknown factor label {label!r} for layout {self.labels}")

    def dim_of(self, label: str) -> int:
        return self.factors[self.index(label)].dim

    def cavity_labels(self) -> List[str]:
        return [label for label in self.labels if _is_cavity(label)]

    def atom_labels(self) -> List[str]:
        return [label for label in self.labels if label in ATOM_LABELS]

    def require_canonical(self):
        if not self.is_canonical:
            raise LayoutError(
                f"Expected canonical layout {CANONICAL_LABELS}, got {self.labels}"
            )

    def basis_index(self, *levels: int) -> int:
        """Flat index of the product basis state |levels[0], levels[1], ...>."""
        if len(levels) != len(self.factors):
            raise LayoutError(f"Expected {len(self.factors)} levels, got {len(levels)}")
        for level, (label, dim) in zip(levels, self.factors):
            if not 0 <= level < dim:
                raise LayoutError(f"Level {level} out of range for factor {label} (dim {dim})")
        return int(np.ravel_multi_index(levels, self.dims))

    def basis_ket(self, *levels: int) -> np.ndarray:
        ket = np.zeros(self.total_dim, dtype=complex)
        ket[self.basis_index(*levels)] = 1.0
        return ket


@dataclass(frozen=True, eq=False)
class Operator:
    """
    Dense complex square matrix tagged with its Hilbert-space layout.

    The matrix is stored read-only; arithmetic returns new operators.
    """

    space: HilbertSpace
    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        n = self.space.total_dim
        if data.shape != (n, n):
            raise LayoutError(
                f"Matrix shape {data.shape} does not match layout {self.space.labels} (dim {n})"
            )
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def dag(self) -> "Operator":
        return Operator(self.space, self.data.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        return hermiticity_deviation(self.data) <= tol * max(max_abs(self.data), 1.0)

    def power(self, n: int) -> "Operator":
        return Operator(self.space, np.linalg.matrix_power(self.data, n))

    def _check_space(self, other: "Operator"):
        if other.space != self.space:
            raise LayoutError(f"Layouts differ: {self.space.labels} vs {other.space.labels}")

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check_space(other)
        return Operator(self.space, self.data @ other.data)

    def __add__(self, other: "Operator") -> "Operator":
        self._check_space(other)
        return Operator(self.space, self.data + other.data)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check_space(other)
        return Operator(self.space, self.data - other.data)

    def __mul__(self, scalar: Union[int, float, complex]) -> "Operator":
        return Operator(self.space, self.data * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator(self.space, -self.data)

    def __repr__(self) -> str:
        return f"Operator(labels={self.space.labels}, dims={self.space.dims})"


@dataclass(frozen=True, eq=False)
class DensityMatrix(Operator):
    """Operator in the role of a quantum state rho."""

    @classmethod
    def from_ket(cls, ket: np.ndarray, space: HilbertSpace) -> "DensityMatrix":
        ket = np.asarray(ket, dtype=complex).ravel()
        return cls(space, np.outer(ket, ket.conj()))

    @classmethod
    def maximally_mixed(cls, space: HilbertSpace) -> "DensityMatrix":
        n = space.total_dim
        return cls(space, np.eye(n) / n)

    def validate(self, **tolerances) -> bool:
        return validate_density_matrix(self.data, **tolerances)

    def purity(self) -> float:
        return float(np.real(np.trace(self.data @ self.data)))


def fock_destroy(dim: int) -> Operator:
    """
    Truncated annihilation operator with a[n-1, n] = sqrt(n).

    Raises:
        LayoutError: If dim < 2
    """
    if dim < 2:
        raise LayoutError(f"Fock cutoff must be >= 2, got {dim}")
    return Operator(HilbertSpace.local(MODE, dim), np.diag(np.sqrt(np.arange(1, dim)), 1))


def qubit_ops() -> Tuple[Operator, Operator, Operator]:
    """
    Atomic ladder and inversion operators in the (|e>, |l>) basis.

    Returns:
        Tuple (sigma_plus, sigma_minus, sigma_3)
    """
    space = HilbertSpace.local(QUBIT, ATOM_DIM)
    sigma_plus = np.zeros((2, 2))
    sigma_plus[EXCITED, GROUND] = 1.0
    return (
        Operator(space, sigma_plus),
        Operator(space, sigma_plus.T),
        Operator(space, np.diag([1.0, -1.0])),
    )


def identity(dim: int, label: str = MODE) -> Operator:
    return Operator(HilbertSpace.local(label, dim), np.eye(dim))


def tensor(factors: Sequence[Operator], space: Optional[HilbertSpace] = None) -> Operator:
    """
    Kronecker product of single-factor operators in layout order.

    Args:
        factors: One operator per factor of the target layout
        space: Target layout; when omitted the factor layouts are concatenated

    Raises:
        LayoutError: On factor-count or dimension mismatch
    """
    factors = list(factors)
    if not factors:
        raise LayoutError("tensor() needs at least one factor")

    if space is None:
        merged = [f for op in factors for f in op.space.factors]
        space = HilbertSpace(tuple(merged))
    else:
        if len(factors) != len(space.factors):
            raise LayoutError(
                f"Expected {len(space.factors)} factors for {space.labels}, got {len(factors)}"
            )
        for op, (label, dim) in zip(factors, space.factors):
            if op.dim != dim:
                raise LayoutError(f"Factor {label} has dim {dim}, operator has dim {op.dim}")

    data = reduce(np.kron, (op.data for op in factors))
    return Operator(space, data)


def embed(op: Operator, site: str, space: HilbertSpace) -> Operator:
    """
    Place a single-factor operator on ``site`` with identities elsewhere.

    Raises:
        LayoutError: For unknown labels or a dimension mismatch
    """
    position = space.index(site)
    if op.dim != space.factors[position].dim:
        raise LayoutError(
            f"Operator dim {op.dim} does not match factor {site} (dim {space.factors[position].dim})"
        )

    before = int(np.prod(space.dims[:position]))
    after = int(np.prod(space.dims[position + 1:]))
    data = np.kron(np.kron(np.eye(before), op.data), np.eye(after))
    return Operator(space, data)


def commutator(x: Operator, y: Operator) -> Operator:
    return x @ y - y @ x


def partial_trace(matrix: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """
    Trace out every factor whose position is not in ``keep``.

    Args:
        matrix: Square matrix on the product space with factor dimensions ``dims``
        dims: Factor dimensions in layout order
        keep: Positions of the factors to keep

    Returns:
        Reduced matrix on the kept factors (in layout order)
    """
    dims = [int(d) for d in dims]
    keep = sorted(set(keep))
    n = len(dims)
    tensor_form = np.asarray(matrix).reshape(dims + dims)

    row_axes = list(range(n))
    col_axes = [n + k if k in keep else k for k in range(n)]
    out_axes = keep + [n + k for k in keep]

    reduced = np.einsum(tensor_form, row_axes + col_axes, out_axes)
    kept_dim = int(np.prod([dims[k] for k in keep])) if keep else 1
    return reduced.reshape(kept_dim, kept_dim)
