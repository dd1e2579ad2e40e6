"""Command-line interface.

Exit codes: 0 success, 1 I/O error, 2 invalid input or failed check,
3 numerical failure.  Set ``ARCHK_LOG`` (e.g. ``DEBUG``) for diagnostics.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from archk import __version__
from archk.errors import DomainError, NumericalError
from archk.gp import Dataset, fit, log_marginal_likelihood, predict, tune
from archk.io import (
    format_dataset,
    format_matrix,
    load_json,
    load_kernel_spec,
    load_space,
    read_dataset,
    read_matrix,
)
from archk.kernel import KernelSpec, dim_embedding, gram
from archk.metric import rho_star_crossover, rho_star_paper
from archk.space import sample_config, validate_space
from archk.verify import check_isometry, check_psd, check_triangle

log = logging.getLogger("archk")

EXIT_OK, EXIT_IO, EXIT_DOMAIN, EXIT_NUMERIC = 0, 1, 2, 3


class CheckFailed(Exception):
    pass


def _manifest(args, inputs: dict, spec: KernelSpec | None = None) -> dict:
    return {
        "tool": "archk",
        "version": __version__,
        "subcommand": args.command,
        "inputs": {k: str(v) for k, v in inputs.items() if v is not None},
        "seed": args.seed,
        "spec_digest": spec.digest() if spec is not None else None,
    }


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, default=_default) + "\n"


def _default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {obj!r}")


def cmd_validate(args) -> int:
    space = load_space(args.space)
    print(f"D={len(space)} roots={','.join(space.roots)} depth={space.depth}")
    return EXIT_OK


def cmd_sample(args) -> int:
    space = load_space(args.space)
    rng = np.random.default_rng(args.seed)
    configs = [sample_config(space, rng) for _ in range(args.n)]
    manifest = _manifest(args, {"space": args.space})
    header = "# manifest: " + json.dumps(manifest, sort_keys=True, separators=(",", ":")) + "\n"
    _emit(args, header + format_dataset(space, configs))
    return EXIT_OK


def cmd_embed(args) -> int:
    space = load_space(args.space)
    spec, _ = load_kernel_spec(args.spec, space)
    configs, _ = read_dataset(args.data, space)
    rows = [{i: dim_embedding(spec, i, c).tolist() for i in space.ids} for c in configs]
    manifest = _manifest(args, {"space": args.space, "spec": args.spec, "data": args.data}, spec)
    _emit(args, _dumps({"manifest": manifest, "embeddings": rows}))
    return EXIT_OK


def cmd_gram(args) -> int:
    space = load_space(args.space)
    spec, _ = load_kernel_spec(args.spec, space)
    configs, _ = read_dataset(args.data, space)
    K = gram(spec, configs)
    manifest = _manifest(args, {"space": args.space, "spec": args.spec, "data": args.data}, spec)
    manifest["config_digest"] = K.config_digest
    _emit(args, format_matrix(K.entries, manifest))
    return EXIT_OK


def cmd_psd(args) -> int:
    report = check_psd(read_matrix(args.gram), tol=args.tol)
    out = json.loads(report.to_json())
    out["manifest"] = _manifest(args, {"gram": args.gram})
    _emit(args, _dumps(out))
    if not report.passed:
        raise CheckFailed(f"matrix is not PSD: lambda_min = {report.witness['lambda_min']:.6g}")
    return EXIT_OK


def cmd_check(args) -> int:
    space = load_space(args.space)
    spec, _ = load_kernel_spec(args.spec, space)
    manifest = _manifest(args, {"space": args.space, "spec": args.spec}, spec)
    reports = check_isometry(space, spec, args.pairs, args.seed)
    reports += check_triangle(space, spec, args.pairs, args.seed)
    lines = []
    for r in reports:
        out = json.loads(r.to_json())
        out["manifest"] = manifest
        lines.append(_dumps(out))
    _emit(args, "".join(lines))
    failed = [f"{r.check}[{r.dimension}]" for r in reports if not r.passed]
    if failed:
        raise CheckFailed("failed checks: " + ", ".join(failed))
    return EXIT_OK


def _noise(args, spec_noise):
    if args.noise is not None:
        return args.noise
    if spec_noise is not None:
        return float(spec_noise)
    raise DomainError("no noise variance: pass --noise or put 'noise' in the spec file")


def cmd_fit(args) -> int:
    space = load_space(args.space)
    spec, spec_noise = load_kernel_spec(args.spec, space)
    configs, y = read_dataset(args.data, space, require_y=True)
    model = fit(spec, Dataset(configs, y), _noise(args, spec_noise))
    summary = {
        "manifest": _manifest(args, {"space": args.space, "spec": args.spec, "data": args.data}, spec),
        "space": space.to_dict(),
        "kernel": spec.to_dict(),
        "noise": model.noise,
        "jitter": model.jitter,
        "log_marginal_likelihood": log_marginal_likelihood(model),
        "n": model.n,
        "train": {"configs": [c.to_dict() for c in model.configs], "y": model.y.tolist()},
    }
    _emit(args, _dumps(summary))
    return EXIT_OK


def cmd_predict(args) -> int:
    saved = load_json(args.model)
    space = validate_space(saved["space"])
    spec = KernelSpec.from_dict(space, saved["kernel"])
    train = saved["train"]
    model = fit(spec, Dataset(train["configs"], train["y"]), saved["noise"])
    if model.jitter != saved["jitter"]:
        log.warning("refit used jitter %g, saved model recorded %g", model.jitter, saved["jitter"])
    queries, _ = read_dataset(args.data, space)
    pred = predict(model, queries)
    _emit(args, _dumps({
        "manifest": _manifest(args, {"model": args.model, "data": args.data}, spec),
        "mean": pred.mean,
        "variance": pred.variance,
        "n_clamped": pred.n_clamped,
    }))
    return EXIT_OK


def cmd_tune(args) -> int:
    space = load_space(args.space)
    configs, y = read_dataset(args.data, space, require_y=True)
    result = tune(space, Dataset(configs, y), args.budget, args.seed,
                  combination=args.combination, kind=args.kernel)
    out = result.spec.to_dict()
    out["noise"] = result.noise
    out["lml"] = result.lml
    out["manifest"] = _manifest(args, {"space": args.space, "data": args.data}, result.spec)
    _emit(args, _dumps(out))
    return EXIT_OK


def cmd_rho_star(args) -> int:
    paper, crossover = rho_star_paper(args.m), rho_star_crossover(args.m)
    print(f"rho_star_paper(m={args.m}) = {paper:.10f}")
    print(f"rho_star_crossover(m={args.m}) = {crossover:.10f}")
    print("note: the closed form balances sqrt(2)*rho against 1+(m-1)(1-rho)^2 "
          "(no square root); the crossover makes dist_cat of differing categories equal omega "
          "for the square-rooted normalisation actually used.")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="archk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"archk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--seed", type=int, default=0)
        return p

    p = add("validate", cmd_validate, "validate a space file")
    p.add_argument("--space", required=True)

    p = add("sample", cmd_sample, "sample configurations as dataset CSV")
    p.add_argument("--space", required=True)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--out")

    p = add("embed", cmd_embed, "per-dimension embeddings of dataset rows")
    p.add_argument("--space", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out")

    p = add("gram", cmd_gram, "write the Gram matrix of a dataset as CSV")
    p.add_argument("--space", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out")

    p = add("psd", cmd_psd, "check that a matrix CSV is positive semi-definite")
    p.add_argument("gram")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out")

    p = add("check", cmd_check, "isometry and pseudometric checks")
    p.add_argument("--space", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--pairs", type=int, default=1000)
    p.add_argument("--out")

    p = add("fit", cmd_fit, "fit a GP and write a model summary")
    p.add_argument("--space", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--noise", type=float)
    p.add_argument("--out")

    p = add("predict", cmd_predict, "predict with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out")

    p = add("tune", cmd_tune, "random-search kernel hyperparameters")
    p.add_argument("--space", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--budget", type=int, default=100)
    p.add_argument("--combination", choices=["sum", "product"], default="product")
    p.add_argument("--kernel", choices=["eq", "rq"], default="eq")
    p.add_argument("--out")

    p = add("rho-star", cmd_rho_star, "categorical crossover values of rho")
    p.add_argument("--m", type=int, required=True)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("ARCHK_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DomainError, CheckFailed) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
