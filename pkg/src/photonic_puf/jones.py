"""Jones-calculus primitives: polarization states, lossless 2x2 transfer
matrices, Haar-random component sampling, and observable extraction.

A state of light is kept in the amplitude/phase form (ex, ey, phix, phiy),
equivalent to the complex 2-vector (ex * e^{i phix}, ey * e^{i phiy}).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi

UNITARITY_TOL = 1e-10
NORM_TOL = 1e-12


def wrap_phase(x: float) -> float:
    """Reduce a phase into [0, 2*pi)."""
    out = float(np.mod(x, TWO_PI))
    # np.mod can round up to exactly 2*pi for tiny negative inputs
    if out >= TWO_PI:
        out = 0.0
    return out


@dataclass(frozen=True)
class JonesVector:
    """Polarization state with non-negative amplitudes and phases in radians."""

    ex: float
    ey: float
    phix: float
    phiy: float

    def __post_init__(self):
        if self.ex < 0 or self.ey < 0:
            raise ValueError("amplitudes must be non-negative")
        if self.ex == 0.0 and self.ey == 0.0:
            raise ValueError("null Jones vector")

    def as_array(self) -> np.ndarray:
        """Complex 2-component representation."""
        return np.array(
            [self.ex * np.exp(1j * self.phix), self.ey * np.exp(1j * self.phiy)],
            dtype=np.complex128,
        )

    def norm(self) -> float:
        return float(np.hypot(self.ex, self.ey))

    @classmethod
    def from_array(cls, arr) -> "JonesVector":
        a = np.asarray(arr, dtype=np.complex128)
        return cls(
            ex=float(np.abs(a[0])),
            ey=float(np.abs(a[1])),
            phix=wrap_phase(float(np.angle(a[0]))),
            phiy=wrap_phase(float(np.angle(a[1]))),
        )


@dataclass(frozen=True)
class JonesMatrix:
    """2x2 complex transfer matrix of one optical component (or a product of
    components)."""

    m: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.m, dtype=np.complex128)
        if a.shape != (2, 2):
            raise ValueError("Jones matrix must be 2x2")
        a = a.copy()
        a.flags.writeable = False
        object.__setattr__(self, "m", a)

    @property
    def m00(self) -> complex:
        return complex(self.m[0, 0])

    @property
    def m01(self) -> complex:
        return complex(self.m[0, 1])

    @property
    def m10(self) -> complex:
        return complex(self.m[1, 0])

    @property
    def m11(self) -> complex:
        return complex(self.m[1, 1])

    def __matmul__(self, other: "JonesMatrix") -> "JonesMatrix":
        return JonesMatrix(self.m @ other.m)


IDENTITY = JonesMatrix(np.eye(2, dtype=np.complex128))


def make_jones_vector(ex2: float, dphi: float) -> JonesVector:
    """Build a normalized challenge state from its observables.

    ex = sqrt(ex2), ey = sqrt(1 - ex2), phix = 0 and phiy = dphi, so the
    phase difference of the result equals dphi.
    """
    if not 0.0 < ex2 < 1.0:
        raise ValueError(f"ex2 must lie in (0, 1), got {ex2}")
    if not 0.0 <= dphi < TWO_PI:
        raise ValueError(f"dphi must lie in [0, 2*pi), got {dphi}")
    return JonesVector(
        ex=float(np.sqrt(ex2)),
        ey=float(np.sqrt(1.0 - ex2)),
        phix=0.0,
        phiy=float(dphi),
    )


def haar_random_unitary(rng: np.random.Generator) -> JonesMatrix:
    """Draw a Haar-uniform 2x2 unitary.

    Parameterization: U = e^{i a} [[e^{i p} cos t, e^{i c} sin t],
    [-e^{-i c} sin t, e^{-i p} cos t]] with a, p, c uniform on [0, 2*pi)
    and t = arcsin(sqrt(u)), u uniform on [0, 1). Unitary by construction,
    so no rejection loop is needed.
    """
    alpha, psi, chi = rng.uniform(0.0, TWO_PI, size=3)
    theta = np.arcsin(np.sqrt(rng.uniform(0.0, 1.0)))
    ct, st = np.cos(theta), np.sin(theta)
    u = np.exp(1j * alpha) * np.array(
        [
            [np.exp(1j * psi) * ct, np.exp(1j * chi) * st],
            [-np.exp(-1j * chi) * st, np.exp(-1j * psi) * ct],
        ],
        dtype=np.complex128,
    )
    out = JonesMatrix(u)
    assert validate_lossless(out)
    return out


def validate_lossless(matrix: JonesMatrix) -> bool:
    """True iff the matrix is unitary with |det| <= 1 and |trace| <= 2,
    all within 1e-10."""
    m = matrix.m
    gram = m.conj().T @ m
    if np.max(np.abs(gram - np.eye(2))) > UNITARITY_TOL:
        return False
    if abs(np.linalg.det(m)) > 1.0 + UNITARITY_TOL:
        return False
    if abs(np.trace(m)) > 2.0 + UNITARITY_TOL:
        return False
    return True


def apply(matrix: JonesMatrix, v: JonesVector) -> JonesVector:
    """Propagate a state through one component (matrix-vector product)."""
    return JonesVector.from_array(matrix.m @ v.as_array())


def extract_observables(v: JonesVector) -> tuple[float, float]:
    """Return (ex2, dphi) of a state.

    ex2 is renormalized to ex^2 / (ex^2 + ey^2). dphi = phiy - phix wrapped
    into [0, 2*pi); when either amplitude vanishes the phase difference is
    undefined and reported as 0.
    """
    total = v.ex * v.ex + v.ey * v.ey
    if total <= 0.0:
        raise ValueError("null Jones vector has no observables")
    ex2 = v.ex * v.ex / total
    if v.ex == 0.0 or v.ey == 0.0:
        dphi = 0.0
    else:
        dphi = wrap_phase(v.phiy - v.phix)
    return ex2, dphi
