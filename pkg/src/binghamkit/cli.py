"""Command-line surface for the library.

One subcommand per invocation: normconst, pdf, loss, gradcheck, sample,
fit, classify, report, oracle-cache.  Exit codes: 0 success, 1 validation
error, 2 numerical failure.  All numeric output uses 12 significant
digits, and JSON outputs round-trip through the library's own parsers.
The env var BINGHAM_KIT_THREADS caps BLAS-level parallelism.
"""

import argparse
import csv
import json
import os
import sys
from contextlib import nullcontext

import numpy as np

from . import oracle, report as report_mod
from .distribution import BinghamParams, classify_symmetry, log_pdf, trace_indicator
from .errors import BinghamKitError, InvalidParameter, NumericalFailure
from .loss import OptimizerSettings, batch_nll_from_params, fit_mle, nll_from_params, nll_grad
from .normalizer import QuadratureConfig, convergence_check, normalizing_constant
from .parametrization import TAG_DIMS, TAGS, ParamVector, param_jacobian, realize
from .sampler import delta_q_stats, sample


def _fmt(x):
    return f"{float(x):.12g}"


def _fmt_vec(v):
    return ",".join(_fmt(x) for x in np.asarray(v).ravel())


def _apply_thread_cap():
    raw = os.environ.get("BINGHAM_KIT_THREADS")
    if not raw:
        return
    try:
        n = int(raw)
        if n < 1:
            raise ValueError
    except ValueError:
        raise InvalidParameter(f"BINGHAM_KIT_THREADS must be a positive integer, got {raw!r}")
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(n)
    except ImportError:  # pragma: no cover - threadpoolctl is a soft dependency
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(n)


def _parse_floats(text, n=None, what="value list"):
    try:
        vals = np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise InvalidParameter(f"{what}: expected comma-separated numbers, got {text!r}")
    if n is not None and vals.size != n:
        raise InvalidParameter(f"{what}: expected {n} numbers, got {vals.size}")
    return vals


def _load_config(path):
    if path is None:
        return QuadratureConfig()
    with open(path) as fh:
        return QuadratureConfig.from_dict(json.load(fh))


def _read_quaternion_csv(path):
    """CSV with header w,x,y,z, one quaternion per row."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["w", "x", "y", "z"]:
            raise InvalidParameter(f"{path}: expected header 'w,x,y,z', got {header}")
        for i, row in enumerate(reader):
            if len(row) != 4:
                raise InvalidParameter(f"{path} row {i + 1}: expected 4 fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise InvalidParameter(f"{path} row {i + 1}: non-numeric field in {row}")
    if not rows:
        raise InvalidParameter(f"{path}: no data rows")
    return np.array(rows)


def _write_quaternion_csv(fh, quats):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["w", "x", "y", "z"])
    for q in quats:
        writer.writerow([_fmt(v) for v in q])


def _distribution_from_args(args):
    """Build BinghamParams from --params/--input JSON, --repr/--theta, or --lambda."""
    if getattr(args, "params", None):
        with open(args.params) as fh:
            return BinghamParams.from_dict(json.load(fh))
    if getattr(args, "input", None) and args.input.endswith(".json"):
        with open(args.input) as fh:
            return BinghamParams.from_dict(json.load(fh))
    if getattr(args, "repr", None):
        if args.theta is None:
            raise InvalidParameter("--repr requires --theta")
        theta = _parse_floats(args.theta, TAG_DIMS[args.repr], "--theta")
        return realize(ParamVector(args.repr, theta))
    if getattr(args, "lam", None):
        lam = _parse_floats(args.lam, 4, "--lambda")
        from .distribution import sort_and_shift

        return sort_and_shift(np.eye(4), lam)
    raise InvalidParameter("need a distribution: --lambda, --repr/--theta, or --input JSON")


def _out_stream(args):
    """Context manager yielding --output or stdout (left open)."""
    if getattr(args, "output", None):
        return open(args.output, "w")
    return nullcontext(sys.stdout)


def _cmd_normconst(args):
    cfg = _load_config(args.config)
    if args.input:
        with open(args.input) as fh:
            lam = np.asarray(json.load(fh)["lambda"], dtype=float)
    elif args.lam:
        lam = _parse_floats(args.lam, 4, "--lambda")
    else:
        raise InvalidParameter("normconst needs --lambda or --input")
    out = normalizing_constant(lam, cfg)
    conv = convergence_check(lam, cfg)
    if args.output:
        payload = {
            "C": out.C,
            "dC_dlambda": list(out.dC_dlambda),
            "imag_residual": out.imag_residual,
            "convergence_check": conv,
        }
        with open(args.output, "w") as fh:
            json.dump(payload, fh, indent=2)
    else:
        print("C =", _fmt(out.C))
        print("dC/dlambda =", _fmt_vec(out.dC_dlambda))
        print("imag_residual =", _fmt(out.imag_residual))
        print("convergence_check =", _fmt(conv))
    return 0


def _cmd_pdf(args):
    cfg = _load_config(args.config)
    p = _distribution_from_args(args)
    C = normalizing_constant(p.lam, cfg).C
    if args.qgt:
        quats = _parse_floats(args.qgt, 4, "--qgt")[None, :]
    elif args.input and not args.input.endswith(".json"):
        quats = _read_quaternion_csv(args.input)
    else:
        raise InvalidParameter("pdf needs quaternions via --qgt or --input CSV")
    with _out_stream(args) as out:
        for i, q in enumerate(quats):
            try:
                out.write(_fmt(log_pdf(p, q, C)) + "\n")
            except BinghamKitError as exc:
                raise type(exc)(f"row {i + 1}: {exc}")
    return 0


def _cmd_loss(args):
    cfg = _load_config(args.config)
    if args.input and args.input.endswith(".json"):
        # batch wire format: {"repr", "thetas", "q_gts", optional "config"}
        with open(args.input) as fh:
            req = json.load(fh)
        for field in ("repr", "thetas", "q_gts"):
            if field not in req:
                raise InvalidParameter(f"batch request: missing field {field!r}")
        if "config" in req:
            cfg = QuadratureConfig.from_dict(req["config"])
        tag = req["repr"]
        if tag not in TAGS:
            raise InvalidParameter(f"batch request: unknown repr {tag!r}")
        thetas = np.asarray(req["thetas"], dtype=float)
        q_gts = np.asarray(req["q_gts"], dtype=float)
        if thetas.size == 0 and q_gts.size == 0:
            values, grads = np.empty(0), np.empty((0, TAG_DIMS[tag]))
        else:
            values, grads = batch_nll_from_params(tag, thetas, q_gts, cfg)
        payload = {"values": list(values), "grads": [list(g) for g in grads]}
        with _out_stream(args) as out:
            json.dump(payload, out)
            out.write("\n")
        return 0
    if args.qgt is None:
        raise InvalidParameter("loss needs --qgt (or a batch --input JSON)")
    q_gt = _parse_floats(args.qgt, 4, "--qgt")
    if args.repr:
        theta = _parse_floats(args.theta, TAG_DIMS[args.repr], "--theta")
        rep = nll_from_params(ParamVector(args.repr, theta), q_gt, cfg)
    else:
        rep = nll_grad(_distribution_from_args(args), q_gt, cfg)
    print("value =", _fmt(rep.value))
    print("grad_lambda =", _fmt_vec(rep.grad_lambda))
    print("grad_D =", "; ".join(_fmt_vec(r) for r in rep.grad_D))
    print("grad_A =", "; ".join(_fmt_vec(r) for r in rep.grad_A))
    if rep.grad_theta is not None:
        print("grad_theta =", _fmt_vec(rep.grad_theta))
    if rep.degenerate_eigenvalues:
        print("degenerate_eigenvalues = true")
    return 0


def _cmd_gradcheck(args):
    cfg = _load_config(args.config)
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.n):
        for tag in TAGS:
            theta = rng.standard_normal(TAG_DIMS[tag])
            q = report_mod.random_unit_quaternion(rng)
            rep = nll_from_params(ParamVector(tag, theta), q, cfg)

            def f(th):
                return nll_from_params(ParamVector(tag, th), q, cfg).value

            fd = oracle.finite_diff(f, theta, step=1e-6)
            scale = max(1.0, float(np.max(np.abs(fd))))
            err = float(np.max(np.abs(rep.grad_theta - fd))) / scale
            worst = max(worst, err)
    print("max_relative_gradient_error =", _fmt(worst))
    return 0


def _cmd_sample(args):
    p = _distribution_from_args(args)
    if args.n < 1:
        raise InvalidParameter("--n must be >= 1")
    batch = sample(p, args.n, args.seed)
    with _out_stream(args) as out:
        _write_quaternion_csv(out, batch.quaternions)
    print("acceptance_rate =", _fmt(batch.acceptance_rate), file=sys.stderr)
    if args.qgt:
        q_gt = _parse_floats(args.qgt, 4, "--qgt")
        mean, hist = delta_q_stats(p, q_gt, args.n, args.seed)
        print("mean_delta_q =", _fmt(mean), file=sys.stderr)
        print("histogram =", json.dumps(hist), file=sys.stderr)
    return 0


def _cmd_fit(args):
    cfg = _load_config(args.config)
    if not args.input:
        raise InvalidParameter("fit needs --input samples.csv")
    if args.repr is None:
        raise InvalidParameter("fit needs --repr TAG")
    samples = _read_quaternion_csv(args.input)
    opt = OptimizerSettings(max_iters=args.max_iters)
    result = fit_mle(samples, args.repr, cfg, opt)
    payload = result.params.to_dict()
    payload["converged"] = result.converged
    payload["final_loss"] = float(result.trace[-1])
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(payload, fh, indent=2)
        trace_path = os.path.splitext(args.output)[0] + "_trace.csv"
        with open(trace_path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["iteration", "loss"])
            for i, v in enumerate(result.trace):
                writer.writerow([i, _fmt(v)])
    else:
        json.dump(payload, sys.stdout, indent=2)
        print()
    return 0


def _cmd_classify(args):
    p = _distribution_from_args(args)
    sc = classify_symmetry(p, args.tol)
    print("kind =", sc.kind.value)
    print("margin =", _fmt(sc.margin))
    print("trace_indicator =", _fmt(trace_indicator(p)))
    return 0


def _cmd_report(args):
    keys = args.keys if args.keys else sorted(report_mod.CRITERIA, key=int)
    results = report_mod.run_criteria(keys)
    all_pass = True
    for res in results:
        status = "PASS" if res["passed"] else "FAIL"
        all_pass &= res["passed"]
        print(f"{status}  {res['name']}: {res['detail']}")
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(results, fh, indent=2)
    print("overall:", "PASS" if all_pass else "FAIL")
    return 0 if all_pass else 1


def _cmd_oracle_cache(args):
    if not args.output:
        raise InvalidParameter("oracle-cache needs --output PATH")
    if args.input:
        with open(args.input) as fh:
            lambdas = [np.asarray(row, dtype=float) for row in json.load(fh)]
    else:
        lambdas = [np.array(row, dtype=float) for row in (
            [0.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, -2.0, -3.0],
            [0.0, -5.0, -20.0, -40.0],
            [0.0, -100.0, -100.0, -100.0],
        )]
    cache = oracle.build_cache(lambdas, args.output)
    print(f"wrote {len(cache)} entries to {args.output}")
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(prog="bingham-kit",
                                     description="Bingham distributions on S^3")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, func, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(func=func)
        p.add_argument("--lambda", dest="lam", help="comma-separated eigenvalues a,b,c,d")
        p.add_argument("--repr", choices=TAGS, help="parametrization tag")
        p.add_argument("--theta", help="comma-separated raw parameter vector")
        p.add_argument("--qgt", help="ground-truth quaternion w,x,y,z")
        p.add_argument("--n", type=int, default=1, help="count")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--config", help="quadrature config JSON path")
        p.add_argument("--input", help="input file path")
        p.add_argument("--output", help="output file path")
        p.add_argument("--params", help="distribution JSON path ({D, lambda})")
        return p

    add("normconst", _cmd_normconst, help="normalizing constant and derivatives")
    add("pdf", _cmd_pdf, help="per-row log-pdf of quaternions")
    add("loss", _cmd_loss, help="NLL loss report (scalar or batch JSON)")
    add("gradcheck", _cmd_gradcheck, help="finite-difference gradient audit")
    add("sample", _cmd_sample, help="draw quaternions, optional delta-Q stats")
    p_fit = add("fit", _cmd_fit, help="maximum-likelihood fit from a CSV dataset")
    p_fit.add_argument("--max-iters", type=int, default=OptimizerSettings().max_iters)
    p_cls = add("classify", _cmd_classify, help="symmetry class and trace indicator")
    p_cls.add_argument("--tol", type=float, default=1e-6)
    p_rep = add("report", _cmd_report, help="run the acceptance suite")
    p_rep.add_argument("keys", nargs="*", help="criteria to run (default: all)")
    add("oracle-cache", _cmd_oracle_cache, help="(re)build brute-force oracle fixtures")
    return parser


def run(argv):
    """Dispatch one subcommand; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        _apply_thread_cap()
        return args.func(args)
    except (InvalidParameter, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericalFailure, BinghamKitError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
