"""``spectra`` command line: classical spectra, skew Markov values, interval certificates, profiles.

Output goes to ``--out`` (CSV or JSON by extension) or to stdout.  Exit
codes: 0 success, 2 invalid input or model, 3 construction failure; errors
are reported as a JSON object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict

import numpy as np

from .classical import markov_numbers, periodic_markov_values, periodic_words
from .dimension import profile_L
from .intervals import construct_interval_nonperiodic_case, construct_interval_periodic_case
from .model import GOLDEN, load_model, sequence_from_dict
from .observables import FiberPoly, LinearSurface
from .skew import SkewSystem, lagrange_value_skew, markov_value_skew, validate_membership_R
from .symbolic import ConstructionError, DomainError, EmbeddingSpec, TransitionMatrix
from .witnesses import classify_fg_sublevel, spectra_difference_witness

EXIT_OK, EXIT_INVALID, EXIT_CONSTRUCTION = 0, 2, 3


def thread_count(arg: int | None) -> int:
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("SPECTRA_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise DomainError(f"SPECTRA_THREADS must be an integer, got {env!r}")


def ordered_map(fn, items, threads: int) -> list:
    """``[fn(x) for x in items]``, optionally on a pool; result order never depends on scheduling."""
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _int_list(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x.strip() != ""]
    except ValueError:
        raise DomainError(f"expected a comma-separated integer list, got {s!r}")


# ---------------------------------------------------------------------------
# emission


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        r = [v.item() if isinstance(v, np.generic) else v for v in r]
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def emit(out: str | None, table=None, record=None) -> None:
    """Write a table ``(header, rows)`` or a record; the extension of ``out`` picks the format."""
    as_json = record is not None if out is None else out.lower().endswith(".json")
    if as_json:
        text = _json(record if record is not None else
                     [dict(zip(table[0], r)) for r in table[1]])
    else:
        if table is None:
            flat = {k: v for k, v in record.items() if not isinstance(v, (dict, list))}
            table = (list(flat), [list(flat.values())])
        text = _rows_csv(*table)
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_classical(a) -> int:
    digits = _int_list(a.digits)
    if not digits or min(digits) < 1:
        raise DomainError("digits must be positive integers")
    words = list(periodic_words(digits, a.max_period))
    chunks = [words[i:i + 4096] for i in range(0, len(words), 4096)]
    vals = np.concatenate(ordered_map(periodic_markov_values, chunks, a.threads)) if words else []
    zs = markov_numbers(a.z_max)
    points = np.sqrt(9.0 - 4.0 / np.asarray(zs, dtype=float) ** 2)
    rows = []
    for w, v in zip(words, vals):
        z = ""
        if v < 3.0:
            k = int(np.argmin(np.abs(points - v)))
            z = zs[k] if abs(points[k] - v) <= 1e-8 else ""
        rows.append(["".join(map(str, w)) if max(w) < 10 else ",".join(map(str, w)), float(v), z])
    emit(a.out, table=(["word", "markov_value", "markov_number"], rows))
    return EXIT_OK


def _system(a) -> tuple[SkewSystem, dict]:
    sys_, d = load_model(a.model)
    if a.depth is not None:
        sys_ = SkewSystem(sys_.sft, sys_.spec, sys_.cocycle, sys_.F, a.depth)
    return sys_, d


def cmd_skew_markov(a) -> int:
    sys_, d = _system(a)
    if a.sequence:
        try:
            seq = sequence_from_dict(json.loads(a.sequence))
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise DomainError(f"malformed sequence: {e}") from e
    elif "sequence" in d:
        seq = sequence_from_dict(d["sequence"])
    else:
        raise DomainError("no sequence given (use --sequence or a 'sequence' entry in the model)")
    m = markov_value_skew(sys_, seq, a.t, horizon=a.horizon)
    ell = lagrange_value_skew(sys_, seq, a.t, horizon=min(a.horizon, 64))
    rec = {"sequence": seq.notation(), "t": a.t, "horizon": a.horizon,
           "markov_value": m.value, "markov_error": m.error_bound, "markov_approximate": m.approximate,
           "lagrange_value": ell.value, "lagrange_error": ell.error_bound,
           "lagrange_approximate": ell.approximate}
    emit(a.out, record=rec)
    return EXIT_OK


def cmd_interval(a) -> int:
    sys_, d = _system(a)
    p = dict(d.get("interval") or {})
    for key in ("Q", "H", "X1", "X2"):
        if getattr(a, key) is not None:
            p[key] = _int_list(getattr(a, key))
    if a.j is not None:
        p["j"] = a.j
    common = {"tol": a.tol, "n_targets": a.targets, "visits": a.visits}
    report = validate_membership_R(sys_, depth=a.validate_depth)
    try:
        if a.case == "periodic":
            cert = construct_interval_periodic_case(sys_, p["Q"], p["H"], int(p["j"]), grid_n=a.grid,
                                                    report=report, **common)
        else:
            cert = construct_interval_nonperiodic_case(sys_, p["X1"], p["X2"], p.get("Q", []), p["H"],
                                                       int(p["j"]), report=report, **common)
    except KeyError as e:
        raise DomainError(f"missing construction parameter {e}") from e
    rec = cert.to_dict()
    rec["length"] = cert.length
    rec["fraction_validated"] = cert.fraction_validated
    emit(a.out, record=rec)
    return EXIT_OK


def cmd_witness_separation(a) -> int:
    f = LinearSurface(a.a_s, a.a_u)
    w = spectra_difference_witness(TransitionMatrix.full(2), EmbeddingSpec.default(2, a.base), f,
                                   FiberPoly.cos(1.0), GOLDEN if a.alpha is None else a.alpha,
                                   horizon=a.horizon, max_period=a.max_period)
    emit(a.out, record=w.to_dict())
    return EXIT_OK


def cmd_profile_l(a) -> int:
    sys_, d = _system(a)
    if a.points < 2:
        raise DomainError("--points must be >= 2")
    ts = list(np.linspace(a.t_min, a.t_max, a.points))
    classifier = None
    obs = d["observable"]
    if obs.get("family") == "product_fg":
        f = LinearSurface(**obs["f"])
        g = FiberPoly(tuple(obs["g"].get("a", ())), tuple(obs["g"].get("b", ())))

        def classifier(s):
            try:
                return classify_fg_sublevel(sys_, f, g, obs["c"], s, tol=a.tol).label
            except ConstructionError:
                return "unresolved"

    def row(t):
        return profile_L(sys_, [t], window=a.window, classifier=classifier).rows[0]

    rows = ordered_map(row, ts, a.threads)
    zero = [r.t for r in rows if r.dim_upper < 0.01]
    table = (["t", "dim_lower", "dim_upper", "classification"],
             [[float(r.t), float(r.dim_lower), float(r.dim_upper), r.classification] for r in rows])
    if a.out and a.out.lower().endswith(".json"):
        emit(a.out, record={"rows": [asdict(r) for r in rows], "window": a.window,
                            "c_estimate": max(zero) if zero else None})
    else:
        emit(a.out, table=table)
    return EXIT_OK


# ---------------------------------------------------------------------------


def _common(horizon: int = 200) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--horizon", type=int, default=horizon)
    common.add_argument("--depth", type=int, default=None)
    common.add_argument("--grid", type=int, default=2000)
    common.add_argument("--tol", type=float, default=1e-4)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--out", default=None, help="output path; .json or .csv")
    return common


def build_parser() -> argparse.ArgumentParser:

    p = argparse.ArgumentParser(prog="spectra", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classical", parents=[_common()], help="periodic Markov values over a digit set")
    c.add_argument("--digits", default="1,2")
    c.add_argument("--max-period", type=int, default=8)
    c.add_argument("--z-max", type=int, default=10 ** 6)
    c.set_defaults(fn=cmd_classical)

    s = sub.add_parser("skew-markov", parents=[_common()], help="Markov and Lagrange value of a skew orbit")
    s.add_argument("--model", required=True)
    s.add_argument("--sequence", default=None, help="sequence as JSON")
    s.add_argument("--t", type=float, default=0.0)
    s.set_defaults(fn=cmd_skew_markov)

    i = sub.add_parser("interval", parents=[_common()], help="interval certificate")
    i.add_argument("--model", required=True)
    i.add_argument("--case", choices=("periodic", "nonperiodic"), required=True)
    for key in ("Q", "H", "X1", "X2"):
        i.add_argument(f"--{key}", default=None)
    i.add_argument("--j", type=int, default=None)
    i.add_argument("--targets", type=int, default=200)
    i.add_argument("--visits", type=int, default=12)
    i.add_argument("--validate-depth", type=int, default=6)
    i.set_defaults(fn=cmd_interval)

    w = sub.add_parser("witness-separation", parents=[_common(1000)],
                       help="skew Markov value outside the shifted base spectrum")
    w.add_argument("--base", type=int, default=17)
    w.add_argument("--a-s", type=float, default=1.0)
    w.add_argument("--a-u", type=float, default=math.pi)
    w.add_argument("--alpha", type=float, default=None)
    w.add_argument("--max-period", type=int, default=10)
    w.set_defaults(fn=cmd_witness_separation)

    pr = sub.add_parser("profile-L", parents=[_common()], help="dimension profile of threshold sets")
    pr.add_argument("--model", required=True)
    pr.add_argument("--t-min", type=float, required=True)
    pr.add_argument("--t-max", type=float, required=True)
    pr.add_argument("--points", type=int, default=20)
    pr.add_argument("--window", type=int, default=4)
    pr.set_defaults(fn=cmd_profile_l)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.threads = thread_count(args.threads)
        return args.fn(args)
    except (DomainError, OSError) as e:
        code, kind, err = EXIT_INVALID, "invalid_input", e
    except ConstructionError as e:
        code, kind, err = EXIT_CONSTRUCTION, "construction_failed", e
    sys.stderr.write(json.dumps({"error": kind, "type": type(err).__name__, "message": str(err)}) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
