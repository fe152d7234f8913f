"""Channel and source data model.

Classical-quantum channels, arbitrarily varying cq channels (a state for
every input/jammer-letter pair), memoryless jamming kernels, correlated
sources and explicit jammer strategies, plus channel averaging, product
extensions, the channel/source distances and the convex-hull
zero-capacity condition.

All values are immutable after construction.
"""

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .config import DEFAULT_CAPS, DEFAULT_TOL
from .errors import (
    AlphabetMismatch,
    DimensionMismatch,
    DimOverflow,
    EnumerationOverflow,
    LengthMismatch,
)
from .geometry import affine_set_distance, embed_stack
from .operators import (
    mutual_information,
    trace_norm,
    validate_density,
    validate_joint,
    validate_probability_vector,
)


def _frozen(a):
    out = np.array(a, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class CqChannel:
    """Map from a finite input alphabet to density operators."""

    x_alphabet: tuple
    states: np.ndarray  # (|X|, d, d)

    def __post_init__(self):
        states = np.asarray(self.states, dtype=complex)
        if states.shape[0] != len(self.x_alphabet):
            raise AlphabetMismatch(
                f"{states.shape[0]} states for {len(self.x_alphabet)} input letters"
            )
        for i in range(states.shape[0]):
            validate_density(states[i])
        object.__setattr__(self, "x_alphabet", tuple(self.x_alphabet))
        object.__setattr__(self, "states", _frozen(states))

    @property
    def dim(self):
        return self.states.shape[-1]

    def state(self, x):
        return self.states[self.x_alphabet.index(x)]


@dataclass(frozen=True, eq=False)
class Avcqc:
    """Arbitrarily varying cq channel: one output state per (input, jammer state)."""

    x_alphabet: tuple
    s_alphabet: tuple
    states: np.ndarray  # (|X|, |S|, d, d)

    def __post_init__(self):
        states = np.asarray(self.states, dtype=complex)
        if states.shape[:2] != (len(self.x_alphabet), len(self.s_alphabet)):
            raise AlphabetMismatch(
                f"state table {states.shape[:2]} does not match alphabets "
                f"({len(self.x_alphabet)}, {len(self.s_alphabet)})"
            )
        for i in range(states.shape[0]):
            for j in range(states.shape[1]):
                validate_density(states[i, j])
        object.__setattr__(self, "x_alphabet", tuple(self.x_alphabet))
        object.__setattr__(self, "s_alphabet", tuple(self.s_alphabet))
        object.__setattr__(self, "states", _frozen(states))

    @property
    def dim(self):
        return self.states.shape[-1]

    def state(self, x, s):
        return self.states[self.x_alphabet.index(x), self.s_alphabet.index(s)]

    @classmethod
    def from_table(cls, x_alphabet, s_alphabet, table):
        """Build from a {(x, s): matrix} mapping; the table must be complete."""
        x_alphabet, s_alphabet = tuple(x_alphabet), tuple(s_alphabet)
        first = np.asarray(table[(x_alphabet[0], s_alphabet[0])], dtype=complex)
        d = first.shape[0]
        states = np.zeros((len(x_alphabet), len(s_alphabet), d, d), dtype=complex)
        for i, x in enumerate(x_alphabet):
            for j, s in enumerate(s_alphabet):
                if (x, s) not in table:
                    raise AlphabetMismatch(f"state table misses entry for ({x!r}, {s!r})")
                states[i, j] = np.asarray(table[(x, s)], dtype=complex)
        return cls(x_alphabet, s_alphabet, states)


@dataclass(frozen=True, eq=False)
class JammerKernel:
    """Memoryless jamming kernel: one distribution over S per input letter."""

    x_alphabet: tuple
    s_alphabet: tuple
    rows: np.ndarray  # (|X|, |S|)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.shape != (len(self.x_alphabet), len(self.s_alphabet)):
            raise AlphabetMismatch(
                f"kernel shape {rows.shape} does not match alphabets "
                f"({len(self.x_alphabet)}, {len(self.s_alphabet)})"
            )
        for i in range(rows.shape[0]):
            validate_probability_vector(rows[i])
        object.__setattr__(self, "x_alphabet", tuple(self.x_alphabet))
        object.__setattr__(self, "s_alphabet", tuple(self.s_alphabet))
        object.__setattr__(self, "rows", _frozen(rows))

    @classmethod
    def uniform(cls, x_alphabet, s_alphabet):
        rows = np.full((len(x_alphabet), len(s_alphabet)), 1.0 / len(s_alphabet))
        return cls(tuple(x_alphabet), tuple(s_alphabet), rows)


@dataclass(frozen=True, eq=False)
class CorrelatedSource:
    """Joint distribution of the shared (sender, receiver) resource."""

    v_prime_alphabet: tuple
    v_alphabet: tuple
    joint: np.ndarray  # (|V'|, |V|), rows indexed by the sender symbol

    def __post_init__(self):
        joint = validate_joint(np.asarray(self.joint, dtype=float), DEFAULT_TOL)
        if joint.shape != (len(self.v_prime_alphabet), len(self.v_alphabet)):
            raise AlphabetMismatch(
                f"joint shape {joint.shape} does not match alphabets "
                f"({len(self.v_prime_alphabet)}, {len(self.v_alphabet)})"
            )
        object.__setattr__(self, "v_prime_alphabet", tuple(self.v_prime_alphabet))
        object.__setattr__(self, "v_alphabet", tuple(self.v_alphabet))
        object.__setattr__(self, "joint", joint)

    @property
    def sender_marginal(self):
        return self.joint.sum(axis=1)

    @property
    def receiver_marginal(self):
        return self.joint.sum(axis=0)

    @property
    def sender_given_receiver(self):
        """Transition matrix with entries P(V'=u | V=v); zero columns where P(v)=0."""
        pv = self.receiver_marginal
        cols = np.where(pv > 0.0, pv, 1.0)
        return self.joint / cols[None, :]

    def mutual_information(self):
        return mutual_information(self.joint)


@dataclass(frozen=True)
class JammerStrategy:
    """Explicit table mapping input words to jammer state words.

    The informed-jammer error functional only reads the table on the
    codebook image, so tables restricted to that image are accepted.
    """

    table: dict = field(default_factory=dict)

    def __call__(self, xs):
        return self.table[tuple(xs)]

    @classmethod
    def full(cls, x_alphabet, n, fn):
        """Tabulate fn on all of X^n (total function, small n only)."""
        return cls({xs: tuple(fn(xs)) for xs in product(tuple(x_alphabet), repeat=n)})


def averaged_channel(w, q):
    """Channel seen through a memoryless jamming kernel: mix states per input."""
    if q.x_alphabet != w.x_alphabet or q.s_alphabet != w.s_alphabet:
        raise AlphabetMismatch("kernel alphabets do not match the channel")
    mixed = np.einsum("xs,xsij->xij", q.rows, w.states)
    return CqChannel(w.x_alphabet, mixed)


def product_output(w, xs, ss, caps=DEFAULT_CAPS):
    """n-fold product output state for an input word and a state word."""
    xs, ss = tuple(xs), tuple(ss)
    if len(xs) != len(ss):
        raise LengthMismatch(f"input word length {len(xs)} != state word length {len(ss)}")
    dim = w.dim ** len(xs)
    if dim > caps.product_dim:
        raise DimOverflow(f"product dimension {dim} exceeds cap {caps.product_dim}")
    out = np.ones((1, 1), dtype=complex)
    for x, s in zip(xs, ss):
        out = np.kron(out, w.state(x, s))
    return out


def cq_diamond_distance(w1, w2):
    """Stabilized channel distance for classical inputs.

    For cq channels the supremum over block lengths is attained on
    single-letter classical inputs, so this is the maximum over input
    letters of the unnormalized trace-norm difference of the outputs.
    """
    if w1.x_alphabet != w2.x_alphabet:
        raise AlphabetMismatch("channels have different input alphabets")
    if w1.dim != w2.dim:
        raise DimensionMismatch(f"output dimensions differ: {w1.dim} vs {w2.dim}")
    return max(trace_norm(w1.states[i] - w2.states[i]) for i in range(len(w1.x_alphabet)))


def source_distance(s1, s2):
    """Entrywise l1 distance between the joint distributions of two sources."""
    if (
        s1.v_prime_alphabet != s2.v_prime_alphabet
        or s1.v_alphabet != s2.v_alphabet
    ):
        raise AlphabetMismatch("sources have different alphabets")
    return float(np.abs(s1.joint - s2.joint).sum())


def zero_capacity_condition(
    w, n=1, gap=1e-7, caps=DEFAULT_CAPS, seed=0, restarts=16
):
    """Evidence check for zero deterministic capacity with an informed jammer.

    True iff for every pair of input words of length n the convex hulls of
    their jammer-reachable product outputs intersect (hull distance within
    the gap tolerance).  A True answer is necessary evidence at the tested
    n only; the underlying condition quantifies over all block lengths.
    """
    nx = len(w.x_alphabet) ** n
    ns = len(w.s_alphabet) ** n
    if nx > caps.enumeration or ns > caps.jammer_states:
        raise EnumerationOverflow(
            f"|X|^n = {nx} or |S|^n = {ns} exceeds caps "
            f"({caps.enumeration}, {caps.jammer_states})"
        )
    if w.dim ** n > caps.product_dim:
        raise DimOverflow(f"product dimension {w.dim ** n} exceeds cap {caps.product_dim}")
    words_x = list(product(w.x_alphabet, repeat=n))
    words_s = list(product(w.s_alphabet, repeat=n))
    gens = {}
    for xs in words_x:
        pts = np.stack([product_output(w, xs, ss, caps) for ss in words_s])
        gens[xs] = embed_stack(pts).T  # (D, |S|^n)
    rng = np.random.default_rng(seed)
    for i, x1 in enumerate(words_x):
        for x2 in words_x[i + 1 :]:
            dist, _, _ = affine_set_distance(
                gens[x1], gens[x2], len(words_s), len(words_s), rng, restarts=restarts
            )
            if dist > gap:
                return False
    return True
