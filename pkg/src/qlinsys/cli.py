"""Command-line front end: ``python -m qlinsys <command> ...``.

Commands
--------
solve    HHL and/or direct solve of an ``hcoo v1`` matrix against a vector b.
reduce   Compile a ``qcirc v1`` circuit to a clock linear system and sample it.
encode   Build a least-squares, ODE or Poisson system and solve it.
probe    Condition number of the Poisson stencil as the grid is refined.

Reports are JSON (schema ``qls-report-1``) or CSV. Exit codes: 0 success,
2 input error, 3 capacity error, 4 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .classical import direct_solve, fidelity
from .encoders import encode_least_squares, encode_ode, encode_poisson, kappa_scaling_probe
from .errors import CapacityError, InputError, KappaMismatchError, NormalizationError, QLSError
from .formats import parse_vector, read_coo, read_hcoo, read_qcirc, read_vector
from .hhl import HHLParams, choose_params, estimate_norm_sampled, hhl_solve
from .linalg import KAPPA_RTOL, condition_number, n_qubits_for
from .reduction import ClockSystemMeta, run_reduction
from .statevector import MAX_QUBITS

__all__ = ["RunConfig", "dispatch", "validate_inputs", "main", "SCHEMA"]

SCHEMA = "qls-report-1"
BACKENDS = ("classical", "quantum-hhl", "both")


@dataclass
class RunConfig:
    command: str
    matrix: str | None = None
    b: str | None = None
    b_file: str | None = None
    circuit: str | None = None
    kind: str | None = None
    epsilon: float = 0.1
    kappa: float | None = None
    clock_bits: int | None = None
    t0: float | None = None
    rotation_c: float | None = None
    backend: str = "both"
    shots: int = 0
    seed: int | None = None
    trials: int = 1
    fmt: str = "json"
    output: str | None = None
    poisson_d: int = 1
    L: list[int] = field(default_factory=list)
    q: str | None = None
    q_file: str | None = None
    x0: str | None = None
    grid: str | None = None

    def __post_init__(self):
        if self.shots > 0 and self.seed is None:
            raise InputError("a seed is required whenever shots > 0")
        if self.backend not in BACKENDS:
            raise InputError(f"backend must be one of {BACKENDS}")
        if self.trials < 1:
            raise InputError("trials must be >= 1")


def _cplx(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex).reshape(-1)]


def _rhs(config: RunConfig) -> np.ndarray:
    if config.b is not None:
        return parse_vector(config.b)
    if config.b_file is not None:
        return read_vector(config.b_file)
    raise InputError("give --b or --b-file")


def _resolve_params(kappa: float, config: RunConfig, n_system: int) -> HHLParams:
    base = choose_params(kappa, config.epsilon, n_system)
    n_clock = config.clock_bits if config.clock_bits is not None else base.n_clock
    if n_system + n_clock + 1 > MAX_QUBITS:
        raise CapacityError(f"{n_system + n_clock + 1} qubits exceed the cap of {MAX_QUBITS}")
    return HHLParams(
        n_clock=n_clock,
        t0=config.t0 if config.t0 is not None else base.t0,
        C=config.rotation_c if config.rotation_c is not None else base.C,
        kappa=base.kappa, epsilon=base.epsilon)


def _sampled_norms(A, b, params, config: RunConfig) -> dict:
    seeds = [config.seed + i for i in range(config.trials)]

    def one(seed):
        est = estimate_norm_sampled(A, b, params, config.shots, seed)
        return {"seed": seed, "estimate": est.estimate, "standard_error": est.standard_error,
                "successes": est.successes, "reliable": est.reliable}

    if config.trials == 1:
        trials = [one(seeds[0])]
    else:
        with ThreadPoolExecutor() as pool:
            trials = list(pool.map(one, seeds))
    good = [t["estimate"] for t in trials if t["reliable"]]
    return {"shots": config.shots, "trials": trials,
            "mean_estimate": float(np.mean(good)) if good else 0.0}


def _run_solve(config: RunConfig) -> dict:
    if config.matrix is None:
        raise InputError("solve needs --matrix")
    A = read_hcoo(config.matrix, declared_kappa=config.kappa)
    b = _rhs(config)
    if b.size != A.dim:
        raise InputError(f"b has {b.size} entries, matrix has dimension {A.dim}")
    if abs(np.linalg.norm(b) - 1.0) > 1e-10:
        raise NormalizationError(f"b has norm {np.linalg.norm(b)!r}, expected 1")
    kappa = config.kappa if config.kappa is not None else condition_number(A)
    out: dict = {"dim": A.dim, "sparsity": A.sparsity_s, "kappa": kappa}
    x = direct_solve(A, b)
    if config.backend in ("classical", "both"):
        out["classical"] = {"solution": _cplx(x / np.linalg.norm(x)),
                            "norm": float(np.linalg.norm(x))}
    if config.backend in ("quantum-hhl", "both"):
        params = _resolve_params(kappa, config, n_qubits_for(A.dim))
        report = hhl_solve(A, b, params)
        x_unit = x / np.linalg.norm(x)
        report.fidelity_vs_oracle = fidelity(report.solution / np.linalg.norm(report.solution),
                                             x_unit)
        q = report.as_dict()
        q["relative_norm_error"] = abs(report.norm_estimate - np.linalg.norm(x)) / np.linalg.norm(x)
        out["quantum"] = q
        if config.shots > 0:
            out["sampled_norm"] = _sampled_norms(A, b, params, config)
    return out


def _run_reduce(config: RunConfig) -> dict:
    if config.circuit is None:
        raise InputError("reduce needs --circuit")
    circ = read_qcirc(config.circuit)
    shots = config.shots if config.shots > 0 else 10_000
    seed = config.seed if config.seed is not None else 0
    backends = ["classical", "quantum-hhl"] if config.backend == "both" else [config.backend]
    out = {}
    for name in backends:
        runs = []
        seeds = [seed + i for i in range(config.trials)]
        if config.trials == 1:
            runs = [run_reduction(circ, config.epsilon, name, shots, seeds[0])]
        else:
            with ThreadPoolExecutor() as pool:
                runs = list(pool.map(lambda s: run_reduction(circ, config.epsilon, name, shots, s),
                                     seeds))
        out[name] = runs[0].as_dict() if len(runs) == 1 else {
            "trials": [r.as_dict() for r in runs],
            "mean_tv_distance": float(np.mean([r.tv_distance for r in runs]))}
    return out


def _source_vector(inline, path, what) -> np.ndarray:
    if inline is not None:
        return parse_vector(inline)
    if path is not None:
        return read_vector(path)
    raise InputError(f"missing {what}")


def _encoded(config: RunConfig):
    kind = config.kind
    if kind == "least-squares":
        if config.matrix is None:
            raise InputError("least-squares needs --matrix (coo v1)")
        return encode_least_squares(read_coo(config.matrix), _rhs(config))
    if kind == "poisson":
        if len(config.L) != 1:
            raise InputError("poisson encoding needs exactly one --L value")
        L = config.L[0]
        if config.q is None and config.q_file is None:
            q = np.ones(L ** config.poisson_d)
        else:
            q = _source_vector(config.q, config.q_file, "--q").real
        return encode_poisson(config.poisson_d, L, q)
    if kind == "ode":
        if config.matrix is None or config.x0 is None or config.grid is None:
            raise InputError("ode needs --matrix (coo v1, constant A), --x0 and --grid")
        A = read_coo(config.matrix)
        x0 = parse_vector(config.x0)
        bvec = _rhs(config) if (config.b or config.b_file) else np.zeros(x0.size)
        grid = parse_vector(config.grid).real
        if A.shape != (x0.size, x0.size) or bvec.size != x0.size:
            raise InputError("A, b and x0 sizes do not agree")
        return encode_ode(x0.size, lambda t: A, lambda t: bvec, x0, grid)
    raise InputError(f"unknown encoder kind {kind!r}")


def _run_encode(config: RunConfig) -> dict:
    enc = _encoded(config)
    x = enc.solve_classical()
    out = {"kind": config.kind, "dim": enc.matrix.dim, "kappa": enc.kappa_report,
           "solution_slice": [enc.solution_slice.start, enc.solution_slice.stop],
           "unscale": enc.unscale,
           "provenance": {k: v for k, v in sorted(enc.provenance.items())}}
    if config.backend in ("classical", "both"):
        out["classical"] = {"solution": _cplx(x), "norm": float(np.linalg.norm(x))}
    if config.backend in ("quantum-hhl", "both"):
        params = _resolve_params(enc.kappa_report, config, n_qubits_for(enc.matrix.dim))
        report = hhl_solve(enc.matrix, enc.rhs, params)
        part = report.solution[enc.solution_slice]
        q = report.as_dict()
        q["fidelity_vs_classical"] = fidelity(part / np.linalg.norm(part),
                                              x / np.linalg.norm(x))
        q["physical_norm_estimate"] = report.norm_estimate * enc.unscale
        out["quantum"] = q
    return out


def _run_probe(config: RunConfig) -> dict:
    if not config.L:
        raise InputError("probe needs --L")
    table = kappa_scaling_probe(config.poisson_d, config.L)
    return {"d": config.poisson_d, "rows": [{"L": L, "kappa": k} for L, k in table.rows],
            "fitted_exponent": table.exponent, "_table": table}


_RUNNERS = {"solve": _run_solve, "reduce": _run_reduce, "encode": _run_encode, "probe": _run_probe}


def validate_inputs(config: RunConfig) -> list[dict]:
    """Check inputs without running anything; problems come back as diagnostics."""
    diags: list[dict] = []

    def add(code, message, line=None):
        d = {"code": code, "message": message}
        if line is not None:
            d["line"] = line
        diags.append(d)

    def guard(fn):
        try:
            return fn()
        except QLSError as exc:
            add(exc.code, str(exc), getattr(exc, "line", None))
            return None

    if config.command == "solve":
        A = guard(lambda: read_hcoo(config.matrix)) if config.matrix else None
        if config.matrix is None:
            add("input_error", "solve needs --matrix")
        b = guard(lambda: _rhs(config))
        if b is not None:
            if abs(np.linalg.norm(b) - 1.0) > 1e-10:
                add(NormalizationError.code, f"b has norm {np.linalg.norm(b)!r}, expected 1")
            if A is not None and b.size != A.dim:
                add("input_error", f"b has {b.size} entries, matrix has dimension {A.dim}")
        if A is not None:
            kappa = guard(lambda: condition_number(A))
            if kappa is not None and config.kappa is not None:
                if abs(kappa - config.kappa) > KAPPA_RTOL * kappa:
                    add(KappaMismatchError.code,
                        f"declared kappa {config.kappa:g} but computed {kappa:g}")
            if kappa is not None and config.backend != "classical":
                guard(lambda: _resolve_params(config.kappa or kappa, config, n_qubits_for(A.dim)))
    elif config.command == "reduce":
        circ = guard(lambda: read_qcirc(config.circuit)) if config.circuit else None
        if config.circuit is None:
            add("input_error", "reduce needs --circuit")
        if circ is not None:
            meta = ClockSystemMeta(circ.T, circ.n_qubits)
            if meta.dim > 4096:
                add("capacity_error", f"clock system dimension {meta.dim} exceeds 4096")
            elif config.backend != "classical" and n_qubits_for(2 * meta.dim) + 3 > MAX_QUBITS:
                add("capacity_error", "dilated clock system does not fit the simulator")
    elif config.command == "encode":
        guard(lambda: _encoded(config))
    elif config.command == "probe":
        if not config.L:
            add("input_error", "probe needs --L")
    return diags


def dispatch(config: RunConfig) -> dict:
    """Run ``config`` and return the report dictionary (raises :class:`QLSError`)."""
    start = time.perf_counter()
    result = _RUNNERS[config.command](config)
    report = {
        "schema": SCHEMA,
        "version": __version__,
        "command": config.command,
        "config": {k: v for k, v in sorted(asdict(config).items())},
        "result": result,
    }
    report["wall_clock_ms"] = (time.perf_counter() - start) * 1e3
    return report


def _flatten(prefix, value, rows):
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(f"{prefix}.{k}" if prefix else str(k), value[k], rows)
    elif isinstance(value, list):
        for i, v in enumerate(value):
            _flatten(f"{prefix}.{i}", v, rows)
    else:
        rows.append((prefix, value))


def render(report: dict, fmt: str) -> str:
    result = report["result"]
    table = result.pop("_table", None) if isinstance(result, dict) else None
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2, default=_json_default) + "\n"
    if table is not None:
        return table.to_csv()
    rows: list = []
    _flatten("", {k: v for k, v in report.items() if k != "wall_clock_ms"}, rows)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    writer.writerows(rows)
    return buf.getvalue()


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qlinsys", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--epsilon", type=float, default=0.1)
        p.add_argument("--backend", choices=BACKENDS, default="both")
        p.add_argument("--shots", type=int, default=0)
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int, default=1)
        p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
        p.add_argument("--output")
        p.add_argument("--validate-only", action="store_true",
                       help="report input diagnostics without running")

    def hhl_overrides(p):
        p.add_argument("--kappa", type=float, help="declared condition number")
        p.add_argument("--clock-bits", type=int)
        p.add_argument("--t0", type=float)
        p.add_argument("--rotation-c", type=float)

    p = sub.add_parser("solve", help="solve A x = b")
    p.add_argument("--matrix", required=True, help="hcoo v1 file")
    p.add_argument("--b", help="inline vector, e.g. '1 0'")
    p.add_argument("--b-file")
    hhl_overrides(p)
    common(p)

    p = sub.add_parser("reduce", help="circuit to linear system round trip")
    p.add_argument("--circuit", required=True, help="qcirc v1 file")
    common(p)

    p = sub.add_parser("encode", help="application encoders")
    p.add_argument("--kind", choices=("least-squares", "ode", "poisson"), required=True)
    p.add_argument("--matrix", help="coo v1 file (M for least squares, constant A for ode)")
    p.add_argument("--b")
    p.add_argument("--b-file")
    p.add_argument("--x0")
    p.add_argument("--grid", help="time grid, e.g. '0 0.1 0.2'")
    p.add_argument("--poisson-d", type=int, default=1)
    p.add_argument("--L", type=_int_list, default=[])
    p.add_argument("--q")
    p.add_argument("--q-file")
    hhl_overrides(p)
    common(p)

    p = sub.add_parser("probe", help="Poisson condition-number scaling")
    p.add_argument("--poisson-d", type=int, default=1)
    p.add_argument("--L", type=_int_list, required=True)
    common(p)
    return parser


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    validate_only = args.pop("validate_only")
    fields = RunConfig.__dataclass_fields__
    try:
        config = RunConfig(**{k: v for k, v in args.items() if k in fields})
        if validate_only:
            diags = validate_inputs(config)
            _emit(json.dumps({"schema": SCHEMA, "diagnostics": diags}, sort_keys=True,
                             indent=2) + "\n", config.output)
            return 2 if diags else 0
        report = dispatch(config)
    except QLSError as exc:
        err = {"schema": SCHEMA, "version": __version__,
               "error": {"code": exc.code, "exit_code": exc.exit_code, "type": type(exc).__name__,
                         "message": str(exc)}}
        if getattr(exc, "line", None) is not None:
            err["error"]["line"] = exc.line
        _emit(json.dumps(err, sort_keys=True, indent=2) + "\n", args.get("output"))
        return exc.exit_code
    _emit(render(report, config.fmt), config.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
