"""Dense Hermitian-operator algebra.

Validation, spectra, entropies, distances, tensor products and partial
traces for small dense operators.  Validated arrays are returned as
read-only copies so they can be shared across threads; every operation
here is a pure function of its inputs.

Logarithms are base 2 throughout.
"""

import numpy as np

from .config import DEFAULT_TOL
from .errors import (
    BadSubsystemIndex,
    DimensionMismatch,
    InvalidJoint,
    NotHermitian,
    NotPositive,
    TraceNotOne,
)

LOG2E = 1.0 / np.log(2.0)


def _as_complex_square(m):
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def _frozen(a):
    out = np.array(a, copy=True)
    out.flags.writeable = False
    return out


def require_hermitian(m, tol=DEFAULT_TOL.hermitian):
    """Return m as a read-only complex array, or raise NotHermitian."""
    a = _as_complex_square(m)
    dev = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if dev > tol:
        raise NotHermitian(f"max |m - m†| entry is {dev:.3e}, exceeds tolerance {tol:.1e}")
    return _frozen((a + a.conj().T) / 2.0)


def validate_density(m, tol=DEFAULT_TOL):
    """Validate a density operator: Hermitian, PSD, unit trace.

    Eigenvalues in [-psd_floor, 0) are tolerated (they are clamped later by
    the entropy routines); anything more negative raises NotPositive.
    """
    a = require_hermitian(m, tol.hermitian)
    eigs = np.linalg.eigvalsh(a)
    if eigs[0] < -tol.psd_floor:
        raise NotPositive(
            f"minimum eigenvalue {eigs[0]:.3e} is below the floor -{tol.psd_floor:.1e}"
        )
    tr = float(np.real(np.trace(a)))
    if abs(tr - 1.0) > tol.trace_one:
        raise TraceNotOne(f"trace is {tr!r}, |trace - 1| = {abs(tr - 1.0):.3e} exceeds {tol.trace_one:.1e}")
    return a


def validate_probability_vector(p, tol=DEFAULT_TOL):
    """Validate a finite distribution: nonnegative entries summing to 1."""
    a = np.asarray(p, dtype=float)
    if a.ndim != 1:
        raise InvalidJoint(f"expected a 1-d weight vector, got shape {a.shape}")
    if a.size and a.min() < -tol.prob_sum:
        raise InvalidJoint(f"negative weight {a.min():.3e} below -{tol.prob_sum:.1e}")
    s = float(a.sum())
    if abs(s - 1.0) > tol.prob_sum:
        raise InvalidJoint(f"weights sum to {s!r}, off by {abs(s - 1.0):.3e} > {tol.prob_sum:.1e}")
    return _frozen(np.clip(a, 0.0, None))


def entropy_from_eigenvalues(eigs, floor=DEFAULT_TOL.psd_floor):
    """-sum(lam * log2 lam) with 0 log 0 := 0.

    Eigenvalues in [-floor, 0) are clamped to 0; more negative raises
    NotPositive.  Works on stacked inputs (entropy taken over the last axis).
    """
    lam = np.asarray(eigs, dtype=float)
    if lam.size and lam.min() < -floor:
        raise NotPositive(
            f"eigenvalue {lam.min():.3e} below the clamp floor -{floor:.1e}"
        )
    lam = np.clip(lam, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(lam > 0.0, lam * np.log2(np.where(lam > 0.0, lam, 1.0)), 0.0)
    return -terms.sum(axis=-1)


def eigvalsh_stack(mats):
    """Eigenvalues of a stack (..., d, d) of Hermitian matrices, ascending.

    2x2 inputs use the closed form, which is much faster than LAPACK for
    the solver's inner loops and exactly reproducible.
    """
    a = np.asarray(mats, dtype=complex)
    d = a.shape[-1]
    if d == 2:
        m = np.real(a[..., 0, 0] + a[..., 1, 1]) / 2.0
        r = np.sqrt(
            (np.real(a[..., 0, 0] - a[..., 1, 1]) / 2.0) ** 2
            + np.abs(a[..., 0, 1]) ** 2
        )
        return np.stack([m - r, m + r], axis=-1)
    return np.linalg.eigvalsh(a)


def von_neumann_entropy(rho, tol=DEFAULT_TOL):
    """Von Neumann entropy S(rho) in bits."""
    a = require_hermitian(rho, tol.hermitian)
    return float(entropy_from_eigenvalues(eigvalsh_stack(a), tol.psd_floor))


def shannon_entropy(p, tol=DEFAULT_TOL):
    """Shannon entropy H(p) in bits."""
    a = validate_probability_vector(p, tol)
    return float(entropy_from_eigenvalues(a, tol.prob_sum))


def validate_joint(joint, tol=DEFAULT_TOL):
    """Validate a joint distribution given as a 2-d nonnegative array."""
    a = np.asarray(joint, dtype=float)
    if a.ndim != 2:
        raise InvalidJoint(f"expected a 2-d joint matrix, got shape {a.shape}")
    if a.min() < -tol.prob_sum:
        raise InvalidJoint(f"negative entry {a.min():.3e} below -{tol.prob_sum:.1e}")
    s = float(a.sum())
    if abs(s - 1.0) > tol.prob_sum:
        raise InvalidJoint(f"entries sum to {s!r}, off by {abs(s - 1.0):.3e} > {tol.prob_sum:.1e}")
    return _frozen(np.clip(a, 0.0, None))


def mutual_information(joint, tol=DEFAULT_TOL):
    """I(X;Y) in bits for a joint distribution over a finite product alphabet."""
    a = validate_joint(joint, tol)
    px = a.sum(axis=1)
    py = a.sum(axis=0)
    h = entropy_from_eigenvalues
    val = float(h(px, tol.prob_sum) + h(py, tol.prob_sum) - h(a.ravel(), tol.prob_sum))
    return max(val, 0.0)


def trace_norm(m):
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    return float(np.abs(eigvalsh_stack(np.asarray(m, dtype=complex))).sum())


def trace_distance(rho, sigma, tol=DEFAULT_TOL):
    """(1/2) ||rho - sigma||_1 for Hermitian operators of equal dimension."""
    a = np.asarray(rho, dtype=complex)
    b = np.asarray(sigma, dtype=complex)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    return 0.5 * trace_norm(a - b)


def tensor(a, b):
    """Kronecker product of two operators."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(op, dims, axis):
    """Trace out one tensor factor of an operator.

    dims lists the factor dimensions in tensor order; axis selects the
    factor to remove.
    """
    a = _as_complex_square(op)
    dims = tuple(int(d) for d in dims)
    total = int(np.prod(dims))
    if a.shape[0] != total:
        raise DimensionMismatch(
            f"operator dimension {a.shape[0]} != product of factors {total}"
        )
    if not (0 <= axis < len(dims)):
        raise BadSubsystemIndex(f"axis {axis} out of range for {len(dims)} factors")
    t = a.reshape(dims + dims)
    t = np.trace(t, axis1=axis, axis2=axis + len(dims))
    keep = int(np.prod([d for i, d in enumerate(dims) if i != axis]))
    return t.reshape(keep, keep)


def random_density(rng, dim, rank=None):
    """Random density operator (normalized Wishart); test/oracle helper."""
    r = dim if rank is None else rank
    g = rng.standard_normal((dim, r)) + 1j * rng.standard_normal((dim, r))
    m = g @ g.conj().T
    return m / np.real(np.trace(m))
