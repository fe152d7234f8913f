"""Code structures and exact worst-case informed-jammer evaluation.

The informed jammer picks a state word as a function of the transmitted
codeword.  Because that function is only ever evaluated on the codebook
image, the worst case decomposes exactly: group the message weights by
distinct codeword value, minimize the grouped success trace over state
words per codeword, and sum.  All evaluators here are exact enumerations
under the configured caps, not bounds.
"""

from dataclasses import dataclass
from itertools import product as iproduct

import numpy as np

from .channels import CorrelatedSource, JammerStrategy, product_output
from .config import DEFAULT_CAPS, DEFAULT_TOL
from .errors import (
    DimensionMismatch,
    EnumerationOverflow,
    KeySetMismatch,
    LengthMismatch,
    NotPositive,
)
from .operators import eigvalsh_stack, entropy_from_eigenvalues


def _frozen(a):
    out = np.array(a, copy=True)
    out.flags.writeable = False
    return out


def _validate_povm(ops, tol_eig=1e-9):
    ops = np.asarray(ops, dtype=complex)
    for k in range(ops.shape[0]):
        lo = float(eigvalsh_stack(ops[k])[..., 0].min())
        if lo < -tol_eig:
            raise NotPositive(
                f"decoding operator {k} has eigenvalue {lo:.3e} < -{tol_eig:.1e}"
            )
    total = ops.sum(axis=0)
    excess = float(eigvalsh_stack(total - np.eye(total.shape[0]))[..., -1].max())
    if excess > tol_eig:
        raise NotPositive(
            f"decoder sum exceeds the identity by {excess:.3e} > {tol_eig:.1e}"
        )
    return _frozen(ops)


@dataclass(frozen=True, eq=False)
class DeterministicCode:
    """Encoder table plus decoding POVM; the completion to the identity is
    the implicit failure outcome."""

    n: int
    codebook: tuple              # message j -> input word (tuple of letters)
    decoders: np.ndarray         # (J, D, D)

    def __post_init__(self):
        codebook = tuple(tuple(xs) for xs in self.codebook)
        if any(len(xs) != self.n for xs in codebook):
            raise LengthMismatch(f"codeword lengths differ from n = {self.n}")
        dec = _validate_povm(self.decoders)
        if dec.shape[0] != len(codebook):
            raise DimensionMismatch(
                f"{dec.shape[0]} decoding operators for {len(codebook)} messages"
            )
        object.__setattr__(self, "codebook", codebook)
        object.__setattr__(self, "decoders", dec)

    @property
    def num_messages(self):
        return len(self.codebook)


@dataclass(frozen=True, eq=False)
class RandomCode:
    """Uniform key over a family of deterministic codes with one message set."""

    codes: tuple   # one DeterministicCode per key

    def __post_init__(self):
        codes = tuple(self.codes)
        if not codes:
            raise KeySetMismatch("random code needs at least one key")
        j0, n0 = codes[0].num_messages, codes[0].n
        if any(c.num_messages != j0 or c.n != n0 for c in codes):
            raise KeySetMismatch("per-key codes must share message set and length")
        object.__setattr__(self, "codes", codes)

    @property
    def num_keys(self):
        return len(self.codes)

    @property
    def num_messages(self):
        return self.codes[0].num_messages

    @property
    def n(self):
        return self.codes[0].n


@dataclass(frozen=True, eq=False)
class CorrelationCode:
    """Encoders indexed by sender words, decoding POVMs indexed by receiver words."""

    l: int                       # correlation block length
    n: int                       # channel block length
    v_prime_words: tuple         # sender words, fixed order
    v_words: tuple               # receiver words, fixed order
    encoders: tuple              # (|V'|^l rows) x (J messages) of input words
    decoders: np.ndarray         # (|V|^l, J, D, D)

    def __post_init__(self):
        enc = tuple(tuple(tuple(xs) for xs in row) for row in self.encoders)
        if any(len(xs) != self.n for row in enc for xs in row):
            raise LengthMismatch("encoder words must have length n")
        dec = np.asarray(self.decoders, dtype=complex)
        for vi in range(dec.shape[0]):
            _validate_povm(dec[vi])
        object.__setattr__(self, "encoders", enc)
        object.__setattr__(self, "decoders", _frozen(dec))
        object.__setattr__(self, "v_prime_words", tuple(tuple(u) for u in self.v_prime_words))
        object.__setattr__(self, "v_words", tuple(tuple(v) for v in self.v_words))

    @property
    def num_messages(self):
        return len(self.encoders[0])


# ---------------------------------------------------------------------------
# exact error evaluation
# ---------------------------------------------------------------------------

def _state_words(w, n, caps):
    count = len(w.s_alphabet) ** n
    if count > caps.jammer_states:
        raise EnumerationOverflow(
            f"|S|^n = {count} exceeds jammer enumeration cap {caps.jammer_states}"
        )
    return list(iproduct(w.s_alphabet, repeat=n))


def _grouped_worst_success(w, weighted_ops, n, caps):
    """For each codeword x: minimize tr(product_state(x, s) G_x) over state words.

    weighted_ops maps codeword -> accumulated (weight * success operator).
    Returns (sum of minima, {codeword: minimizing state word}).
    """
    s_words = _state_words(w, n, caps)
    total = 0.0
    strategy = {}
    for xs, g in weighted_ops.items():
        best, best_s = None, None
        for ss in s_words:
            val = float(np.real(np.trace(product_output(w, xs, ss, caps) @ g)))
            if best is None or val < best:
                best, best_s = val, ss
        total += best
        strategy[xs] = best_s
    return total, strategy


def worst_case_error_informed(code, w, caps=DEFAULT_CAPS, return_strategy=False):
    """Exact worst-case average error against a codeword-informed jammer.

    The maximum over jamming functions equals the sum over distinct
    codewords of the per-codeword worst case (messages sharing a codeword
    are tied together and handled as one group).
    """
    j_n = code.num_messages
    grouped = {}
    for j, xs in enumerate(code.codebook):
        if xs not in grouped:
            grouped[xs] = np.zeros_like(code.decoders[0])
        grouped[xs] = grouped[xs] + code.decoders[j] / j_n
    success, strategy = _grouped_worst_success(w, grouped, code.n, caps)
    err = float(min(max(1.0 - success, 0.0), 1.0))
    if return_strategy:
        return err, JammerStrategy(strategy)
    return err


def worst_case_error_brute_force(code, w, caps=DEFAULT_CAPS):
    """Reference oracle: enumerate jamming functions on the codebook image."""
    s_words = _state_words(w, code.n, caps)
    distinct = sorted(set(code.codebook))
    if len(s_words) ** len(distinct) > caps.jammer_states:
        raise EnumerationOverflow(
            f"{len(s_words)}^{len(distinct)} jamming functions exceed the cap"
        )
    j_n = code.num_messages
    succ = {
        (xs, ss): float(
            np.real(np.trace(product_output(w, xs, ss, caps) @ dsum))
        )
        for xs, dsum in (
            (xs, sum(code.decoders[j] for j, c in enumerate(code.codebook) if c == xs))
            for xs in distinct
        )
        for ss in s_words
    }
    worst = 0.0
    for assignment in iproduct(s_words, repeat=len(distinct)):
        tot = sum(succ[(xs, ss)] for xs, ss in zip(distinct, assignment))
        worst = max(worst, 1.0 - tot / j_n)
    return worst


def random_code_error_informed(code, w, caps=DEFAULT_CAPS, return_strategy=False):
    """Exact informed-jammer error of a key-randomized code.

    The jammer sees the transmitted word but not the key: for each distinct
    codeword value it attacks the key-conditional expected decoder.
    """
    j_n, k_n = code.num_messages, code.num_keys
    grouped = {}
    for k, det in enumerate(code.codes):
        for j, xs in enumerate(det.codebook):
            if xs not in grouped:
                grouped[xs] = np.zeros_like(det.decoders[0])
            grouped[xs] = grouped[xs] + det.decoders[j] / (j_n * k_n)
    success, strategy = _grouped_worst_success(w, grouped, code.n, caps)
    err = float(min(max(1.0 - success, 0.0), 1.0))
    if return_strategy:
        return err, JammerStrategy(strategy)
    return err


def _product_joint(src, l):
    joint = np.ones((1, 1))
    for _ in range(l):
        joint = np.kron(joint, src.joint)
    return joint  # (|V'|^l, |V|^l), lexicographic word order


def correlation_code_error_informed(code, w, src, caps=DEFAULT_CAPS, return_strategy=False):
    """Exact informed-jammer error of a correlation-assisted code.

    The jamming function is applied outside the source average: the jammer
    observes the channel input word (which may reveal an equivalence class
    of sender words) but neither source realization directly.
    """
    n_vp = len(code.v_prime_words)
    n_v = len(code.v_words)
    if n_vp * n_v > caps.enumeration:
        raise EnumerationOverflow(
            f"|V'|^l * |V|^l = {n_vp * n_v} exceeds enumeration cap {caps.enumeration}"
        )
    joint_l = _product_joint(src, code.l)
    if joint_l.shape != (n_vp, n_v):
        raise DimensionMismatch("code word tables do not match the product source")
    j_n = code.num_messages
    # accumulate source-weighted decoders per distinct codeword value
    qvec = {}
    for ui, row in enumerate(code.encoders):
        for j, xs in enumerate(row):
            key = (xs, j)
            if key not in qvec:
                qvec[key] = np.zeros(n_v)
            qvec[key] += joint_l[ui]
    grouped = {}
    dec = code.decoders
    for (xs, j), weights in qvec.items():
        g = np.einsum("v,vab->ab", weights, dec[:, j]) / j_n
        if xs not in grouped:
            grouped[xs] = g
        else:
            grouped[xs] = grouped[xs] + g
    success, strategy = _grouped_worst_success(w, grouped, code.n, caps)
    err = float(min(max(1.0 - success, 0.0), 1.0))
    if return_strategy:
        return err, JammerStrategy(strategy)
    return err


# ---------------------------------------------------------------------------
# two-part codes
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TwoPartCode:
    """Key-establishing pre-code concatenated with a keyed message code.

    The first part depends only on the shared correlation (it carries the
    key), the second only on (message, key).  The assembled decoder sums
    the pre-decoder for each key against that key's inner decoder.
    """

    pre: CorrelationCode         # messages of the pre-code are the keys
    inner: RandomCode
    pre_error: float
    inner_error: float
    assembled_error: float
    jammer: JammerStrategy

    @property
    def n_total(self):
        return self.pre.n + self.inner.n

    @property
    def num_messages(self):
        return self.inner.num_messages

    def assembled_decoder(self, v_index, j):
        """D_j^{(v)} = sum_k pre_decoder(v, k) (x) inner_decoder(k, j)."""
        blocks = [
            np.kron(self.pre.decoders[v_index, k], self.inner.codes[k].decoders[j])
            for k in range(self.inner.num_keys)
        ]
        return sum(blocks)

    def encode(self, v_prime_word, j, k):
        pre_word = self.pre.encoders[self.pre.v_prime_words.index(tuple(v_prime_word))][k]
        return tuple(pre_word) + tuple(self.inner.codes[k].codebook[j])


def two_part_error_informed(pre, inner, w, src, caps=DEFAULT_CAPS):
    """Exact informed-jammer error of the assembled two-part code.

    The key is the sender's private uniform randomness; the jammer sees the
    full transmitted word (both parts).
    """
    n_vp = len(pre.v_prime_words)
    n_v = len(pre.v_words)
    joint_l = _product_joint(src, pre.l)
    j_n, k_n = inner.num_messages, inner.num_keys
    # source-weight vectors per (full codeword, message)
    qvec = {}
    for ui in range(n_vp):
        for k in range(k_n):
            pre_word = pre.encoders[ui][k]
            for j in range(j_n):
                xs = tuple(pre_word) + tuple(inner.codes[k].codebook[j])
                key = (xs, j)
                if key not in qvec:
                    qvec[key] = np.zeros(n_v)
                qvec[key] += joint_l[ui]
    grouped = {}
    for (xs, j), weights in qvec.items():
        g = None
        for kp in range(k_n):
            pre_part = np.einsum("v,vab->ab", weights, pre.decoders[:, kp])
            term = np.kron(pre_part, inner.codes[kp].decoders[j])
            g = term if g is None else g + term
        g = g / (j_n * k_n)
        if xs not in grouped:
            grouped[xs] = g
        else:
            grouped[xs] = grouped[xs] + g
    success, strategy = _grouped_worst_success(w, grouped, pre.n + inner.n, caps)
    err = float(min(max(1.0 - success, 0.0), 1.0))
    return err, JammerStrategy(strategy)


def assemble_two_part(pre, inner, w, src, caps=DEFAULT_CAPS):
    """Concatenate a key-carrying pre-code with a keyed inner code.

    Verifies the assembled POVMs and checks the exact error chain
    (assembled <= pre + inner) on the constructed instance.
    """
    if pre.num_messages != inner.num_keys:
        raise KeySetMismatch(
            f"pre-code carries {pre.num_messages} keys, inner code expects {inner.num_keys}"
        )
    pre_error, _ = correlation_code_error_informed(pre, w, src, caps, return_strategy=True)
    inner_error = random_code_error_informed(inner, w, caps)
    assembled_error, jammer = two_part_error_informed(pre, inner, w, src, caps)
    # POVM validity of the assembled decoders, spot-checked on every receiver word
    d_total = pre.decoders.shape[-1] * inner.codes[0].decoders.shape[-1]
    for vi in range(len(pre.v_words)):
        total = np.zeros((d_total, d_total), dtype=complex)
        for j in range(inner.num_messages):
            blocks = [
                np.kron(pre.decoders[vi, k], inner.codes[k].decoders[j])
                for k in range(inner.num_keys)
            ]
            total = total + sum(blocks)
        excess = float(eigvalsh_stack(total - np.eye(d_total))[..., -1].max())
        if excess > 1e-9:
            raise NotPositive(
                f"assembled decoder sum exceeds the identity by {excess:.3e}"
            )
    if assembled_error > pre_error + inner_error + 1e-9:
        raise NotPositive(
            f"error chain violated: {assembled_error:.6g} > "
            f"{pre_error:.6g} + {inner_error:.6g}"
        )
    return TwoPartCode(
        pre=pre,
        inner=inner,
        pre_error=pre_error,
        inner_error=inner_error,
        assembled_error=assembled_error,
        jammer=jammer,
    )


# ---------------------------------------------------------------------------
# pre-code construction from a separation certificate
# ---------------------------------------------------------------------------

def repetition_precode(cert, gp, src, w, num_keys=2, nu=3, caps=DEFAULT_CAPS):
    """Key-carrying pre-code from a separating measurement.

    Each of nu channel uses encodes one bit through the encoder pair (the
    sender applies g0 or g1 to a fresh block of iota source symbols); the
    receiver measures each use with his block of the separating measurement
    and decodes the key by minimum Hamming distance to the key words.
    """
    if not 2 <= num_keys <= 2 ** nu:
        raise KeySetMismatch(f"cannot place {num_keys} keys in {nu} bits")
    iota = gp.iota
    l = nu * iota
    n_vp_letters = len(src.v_prime_alphabet)
    n_v_letters = len(src.v_alphabet)
    if (n_vp_letters ** l) * (n_v_letters ** l) > caps.enumeration:
        raise EnumerationOverflow(
            f"source word tables at l = {l} exceed the enumeration cap"
        )
    if num_keys == 2:
        key_words = [(0,) * nu, (1,) * nu]
    else:
        key_words = sorted(iproduct((0, 1), repeat=nu))[:num_keys]

    def decode_word(bits):
        dists = [sum(a != b for a, b in zip(bits, kw)) for kw in key_words]
        return int(np.argmin(dists))

    v_prime_words = list(iproduct(src.v_prime_alphabet, repeat=l))
    v_words = list(iproduct(src.v_alphabet, repeat=l))
    block_index = {
        blk: i for i, blk in enumerate(iproduct(range(n_v_letters), repeat=iota))
    }
    v_sym_index = {sym: i for i, sym in enumerate(src.v_alphabet)}

    encoders = []
    for u in v_prime_words:
        row = []
        for kw in key_words:
            word = tuple(
                (gp.g0 if kw[t] == 0 else gp.g1)[u[t * iota : (t + 1) * iota]]
                for t in range(nu)
            )
            row.append(word)
        encoders.append(row)

    d = w.dim
    dim_total = d ** nu
    decoders = np.zeros((len(v_words), num_keys, dim_total, dim_total), dtype=complex)
    site_ops = {}
    for vi, v in enumerate(v_words):
        blocks = [
            block_index[tuple(v_sym_index[c] for c in v[t * iota : (t + 1) * iota])]
            for t in range(nu)
        ]
        key = tuple(blocks)
        if key not in site_ops:
            ops = np.zeros((num_keys, dim_total, dim_total), dtype=complex)
            for bits in iproduct((0, 1), repeat=nu):
                povm = np.ones((1, 1), dtype=complex)
                for t, bit in enumerate(bits):
                    povm = np.kron(povm, cert.measurement_block(bit, blocks[t]))
                ops[decode_word(bits)] += povm
            site_ops[key] = ops
        decoders[vi] = site_ops[key]
    return CorrelationCode(
        l=l,
        n=nu,
        v_prime_words=tuple(v_prime_words),
        v_words=tuple(v_words),
        encoders=encoders,
        decoders=decoders,
    )


def two_part_design(rate_r, n, c_k=1.0):
    """Desk-scale block design for a two-part code at channel length n.

    The pre-code spends nu = ceil((3 / rate) * log2 n) uses establishing a
    key drawn from ceil(c_k * n**2) values; rate_r is the induced binary
    channel's max-min rate.
    """
    if rate_r <= 0.0:
        raise ValueError(f"binary channel rate {rate_r} must be positive")
    if n < 2:
        raise ValueError(f"channel length {n} must be at least 2")
    nu = int(np.ceil((3.0 / rate_r) * np.log2(n)))
    num_keys = int(np.ceil(c_k * n * n))
    return {"nu": nu, "num_keys": num_keys}


# ---------------------------------------------------------------------------
# common-randomness generation protocol
# ---------------------------------------------------------------------------

def cr_generation_run(w, src, code, trials, seed, caps=DEFAULT_CAPS):
    """Monte-Carlo key agreement over a correlation code under the exact
    worst-case-per-codeword jammer.

    Accepts a CorrelationCode or an assembled TwoPartCode (whose sender
    additionally draws the private key each trial).  Returns a dict with
    the agreement rate, the empirical entropy (bits) of the agreed value,
    and per-trial records.  Measurement outcomes are sampled from the
    exact outcome probabilities; a failed (completion) outcome decodes to
    a uniformly random guess.
    """
    if trials < 1:
        raise EnumerationOverflow("trials must be >= 1")
    two_part = isinstance(code, TwoPartCode)
    if two_part:
        jammer = code.jammer
        words_src = code.pre
        decoder_cache = {}

        def encode(u_index, j, rng):
            k = int(rng.integers(code.inner.num_keys))
            return tuple(words_src.encoders[u_index][k]) + tuple(
                code.inner.codes[k].codebook[j]
            )

        def decoders_for(v_i):
            if v_i not in decoder_cache:
                decoder_cache[v_i] = np.stack(
                    [code.assembled_decoder(v_i, j) for j in range(code.num_messages)]
                )
            return decoder_cache[v_i]

    else:
        _, jammer = correlation_code_error_informed(code, w, src, caps, return_strategy=True)
        words_src = code

        def encode(u_index, j, rng):
            return code.encoders[u_index][j]

        def decoders_for(v_i):
            return code.decoders[v_i]

    j_n = code.num_messages
    vp_index = {u: i for i, u in enumerate(words_src.v_prime_words)}
    v_index = {v: i for i, v in enumerate(words_src.v_words)}
    pairs = [
        (up, v)
        for up in src.v_prime_alphabet
        for v in src.v_alphabet
    ]
    pair_probs = np.array(
        [src.joint[src.v_prime_alphabet.index(up), src.v_alphabet.index(v)] for up, v in pairs]
    )
    pair_probs = pair_probs / pair_probs.sum()
    rows = []
    agreed = []
    hits = 0
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(t,)))
        drawn = rng.choice(len(pairs), size=words_src.l, p=pair_probs)
        u_word = tuple(pairs[i][0] for i in drawn)
        v_word = tuple(pairs[i][1] for i in drawn)
        j = int(rng.integers(j_n))
        xs = encode(vp_index[u_word], j, rng)
        ss = jammer(xs)
        rho = product_output(w, xs, ss, caps)
        dec = decoders_for(v_index[v_word])
        probs = np.real(np.einsum("jab,ba->j", dec, rho))
        probs = np.clip(probs, 0.0, None)
        fail = max(1.0 - probs.sum(), 0.0)
        full = np.append(probs, fail)
        full = full / full.sum()
        outcome = int(rng.choice(j_n + 1, p=full))
        if outcome == j_n:   # completion outcome: guess uniformly
            outcome = int(rng.integers(j_n))
        ok = outcome == j
        hits += ok
        if ok:
            agreed.append(j)
        rows.append(
            {
                "trial": t,
                "v_prime": "".join(str(c) for c in u_word),
                "v": "".join(str(c) for c in v_word),
                "j": j,
                "decoded": outcome,
                "jammer_choice": "".join(str(c) for c in ss),
            }
        )
    rate = hits / trials
    if agreed:
        counts = np.bincount(np.array(agreed), minlength=j_n).astype(float)
        emp = counts / counts.sum()
        entropy = float(entropy_from_eigenvalues(emp, floor=1e-12))
    else:
        entropy = 0.0
    return {"agreement_rate": rate, "empirical_entropy": entropy, "rows": rows}
