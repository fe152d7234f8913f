"""JSON/CSV interchange for channels, sources, codes and results.

Complex matrices travel as row-major nested arrays of [re, im] pairs.
Dumps are canonical (sorted keys, fixed separators, repr floats) so that
identical inputs produce byte-identical output files.
"""

import json

import numpy as np

from .channels import Avcqc, CorrelatedSource, CqChannel
from .coding import CorrelationCode, DeterministicCode, RandomCode
from .errors import SpecParseError


def matrix_to_json(m):
    a = np.asarray(m, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in a]


def matrix_from_json(obj):
    try:
        return np.array(
            [[complex(pair[0], pair[1]) for pair in row] for row in obj], dtype=complex
        )
    except (TypeError, IndexError) as exc:
        raise SpecParseError(f"matrix entries must be [re, im] pairs: {exc}") from exc


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SpecParseError(
            f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    except OSError as exc:
        raise SpecParseError(f"{path}: {exc}") from exc


def dump_json(obj, path):
    text = json.dumps(obj, sort_keys=True, indent=2)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


def write_csv(rows, path):
    lines = [",".join(str(c) for c in row) for row in rows]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_channel(path):
    """AVCQC spec: {x_alphabet, s_alphabet, dim, states: {"x,s": matrix}}."""
    obj = _load_json(path)
    try:
        xa = [str(x) for x in obj["x_alphabet"]]
        sa = [str(s) for s in obj["s_alphabet"]]
        dim = int(obj["dim"])
        states = obj["states"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecParseError(f"{path}: channel spec missing field: {exc}") from exc
    table = {}
    for x in xa:
        for s in sa:
            key = f"{x},{s}"
            if key not in states:
                raise SpecParseError(f"{path}: missing state for key {key!r}")
            m = matrix_from_json(states[key])
            if m.shape != (dim, dim):
                raise SpecParseError(
                    f"{path}: state {key!r} has shape {m.shape}, expected ({dim}, {dim})"
                )
            table[(x, s)] = m
    return Avcqc.from_table(tuple(xa), tuple(sa), table)


def channel_to_json(w):
    return {
        "x_alphabet": list(w.x_alphabet),
        "s_alphabet": list(w.s_alphabet),
        "dim": w.dim,
        "states": {
            f"{x},{s}": matrix_to_json(w.states[i, j])
            for i, x in enumerate(w.x_alphabet)
            for j, s in enumerate(w.s_alphabet)
        },
    }


def load_source(path):
    """Source spec: {v_prime: [...], v: [...], joint: [[...]]}."""
    obj = _load_json(path)
    try:
        vp = [str(v) for v in obj["v_prime"]]
        vv = [str(v) for v in obj["v"]]
        joint = np.array(obj["joint"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecParseError(f"{path}: source spec missing field: {exc}") from exc
    return CorrelatedSource(tuple(vp), tuple(vv), joint)


def source_to_json(src):
    return {
        "v_prime": list(src.v_prime_alphabet),
        "v": list(src.v_alphabet),
        "joint": [[float(v) for v in row] for row in src.joint],
    }


def capacity_result_to_json(res):
    return {
        "value": res.value,
        "argmax_p": [float(v) for v in res.argmax_p],
        "argmin_q": [[float(v) for v in row] for row in res.argmin_q.rows],
        "certified_gap": res.certified_gap,
        "iterations": len(res.solver_trace),
    }


def cr_result_to_json(res):
    return {
        "value": res.value,
        "case_tag": res.case_tag,
        "aux_channel": None
        if res.aux_channel is None
        else [[float(v) for v in row] for row in res.aux_channel],
        "maxmin_value": res.maxmin_value,
        "source_mi": res.source_mi,
    }


def certificate_to_json(cert):
    return {
        "separable": True,
        "operator_a": matrix_to_json(cert.operator_a),
        "threshold_b": cert.threshold_b,
        "m0": matrix_to_json(cert.m0),
        "m1": matrix_to_json(cert.m1),
        "margin": cert.margin,
        "distance": cert.distance,
    }


def not_separable_to_json(res):
    return {
        "separable": False,
        "witness_distance": res.witness_distance,
        "witness_q0": [[float(v) for v in row] for row in res.witness_q0.rows],
        "witness_q1": [[float(v) for v in row] for row in res.witness_q1.rows],
    }


def gpair_to_json(gp):
    def table(g):
        return {"".join(str(c) for c in u): str(x) for u, x in sorted(g.items())}

    return {
        "iota": gp.iota,
        "g0": table(gp.g0),
        "g1": table(gp.g1),
        "groups": {"".join(str(c) for c in u): grp for u, grp in sorted(gp.groups.items())},
    }


def correlation_code_to_json(code):
    return {
        "kind": "correlation",
        "l": code.l,
        "n": code.n,
        "v_prime_words": [list(u) for u in code.v_prime_words],
        "v_words": [list(v) for v in code.v_words],
        "encoders": [[list(xs) for xs in row] for row in code.encoders],
        "decoders": [
            [matrix_to_json(code.decoders[vi, j]) for j in range(code.decoders.shape[1])]
            for vi in range(code.decoders.shape[0])
        ],
    }


def load_correlation_code(path):
    obj = _load_json(path)
    try:
        if obj.get("kind") != "correlation":
            raise SpecParseError(f"{path}: expected a correlation code spec")
        decoders = np.stack(
            [np.stack([matrix_from_json(m) for m in row]) for row in obj["decoders"]]
        )
        return CorrelationCode(
            l=int(obj["l"]),
            n=int(obj["n"]),
            v_prime_words=tuple(tuple(str(c) for c in u) for u in obj["v_prime_words"]),
            v_words=tuple(tuple(str(c) for c in v) for v in obj["v_words"]),
            encoders=[
                [tuple(str(c) for c in xs) for xs in row] for row in obj["encoders"]
            ],
            decoders=decoders,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecParseError(f"{path}: code spec missing field: {exc}") from exc


def deterministic_code_to_json(code):
    return {
        "kind": "deterministic",
        "n": code.n,
        "codebook": [list(xs) for xs in code.codebook],
        "decoders": [matrix_to_json(d) for d in code.decoders],
    }


def load_deterministic_code(obj_or_path):
    obj = _load_json(obj_or_path) if isinstance(obj_or_path, str) else obj_or_path
    try:
        if obj.get("kind") != "deterministic":
            raise SpecParseError("expected a deterministic code spec")
        return DeterministicCode(
            n=int(obj["n"]),
            codebook=tuple(tuple(str(c) for c in xs) for xs in obj["codebook"]),
            decoders=np.stack([matrix_from_json(m) for m in obj["decoders"]]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecParseError(f"code spec missing field: {exc}") from exc


def random_code_to_json(code):
    return {
        "kind": "random",
        "codes": [deterministic_code_to_json(c) for c in code.codes],
    }


def load_random_code(path):
    obj = _load_json(path)
    try:
        if obj.get("kind") != "random":
            raise SpecParseError(f"{path}: expected a random code spec")
        return RandomCode(tuple(load_deterministic_code(c) for c in obj["codes"]))
    except (KeyError, TypeError) as exc:
        raise SpecParseError(f"{path}: code spec missing field: {exc}") from exc
