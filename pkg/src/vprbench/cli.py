"""``vprbench`` command-line driver.

Exit codes: 0 success, 1 validation error (bad arguments, config, inputs or
mismatched artifacts), 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, RunConfig, load_config
from .datasets import (identity_ground_truth, load_bundle, load_manifest, open_manifest,
                       read_ground_truth, write_ground_truth)
from .evaluation import (GroundTruthError, aggregate_timing, compute_pr, correlation_coefficient,
                         recall_at_1, write_pr_csv, write_pr_svg)
from .harness import (StageError, extract_dataset, file_sha256, localize_all, map_from_manifest,
                      read_results_csv, run_bench, train_from_manifest, write_json,
                      write_results_csv, write_timing_csv)
from .pipeline import load_map, save_map
from .vocab import load_dictionary, save_dictionary

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("vprbench")


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for runtime failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _run_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_synth(args) -> int:
    from .synthetic import SyntheticConfig, generate, write_bundle

    kw = {"seed": args.seed if args.seed is not None else SyntheticConfig.seed}
    for name in ("cols", "rows", "n_training"):
        if getattr(args, name) is not None:
            kw[name] = getattr(args, name)
    path = write_bundle(generate(SyntheticConfig(**kw)), args.out)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_identity_gt(args) -> int:
    m = open_manifest(args.manifest)
    write_ground_truth(identity_ground_truth(m.ids), args.out)
    print(f"wrote identity ground truth for {len(m.ids)} images to {args.out}")
    return EXIT_OK


def cmd_train_dict(args) -> int:
    cfg = _run_config(args)
    m = load_manifest(args.training, "training")
    V = train_from_manifest(m, cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_dictionary(V, out, {"run_config": cfg.to_dict(), "seed": cfg.seed,
                             "inputs": {m.name: m.fingerprint()}})
    print(f"words={V.k} descriptors={V.params['n_descriptors']} "
          f"final_distortion={V.params['final_distortion']:.6g} -> {out}")
    return EXIT_OK


def cmd_build_map(args) -> int:
    cfg = _run_config(args)
    m = load_manifest(args.reference, "reference")
    V = load_dictionary(args.dictionary)
    env = map_from_manifest(m, V, cfg)
    env.provenance["run_config"] = cfg.to_dict()
    env.provenance["dictionary_file_sha256"] = file_sha256(args.dictionary)
    save_map(env, args.out)
    print(f"map of {len(env)} images ({len(env.degenerate_ids)} degenerate) -> {args.out}")
    return EXIT_OK


def cmd_localize(args) -> int:
    cfg = _run_config(args)
    env = load_map(args.map)
    m = load_manifest(args.queries, "query")
    # an explicit config must agree with the map; otherwise the map's own extractor is used
    extractor = cfg.extractor if args.config else None
    results = localize_all(m, env, args.n or cfg.n, extractor)
    out = _out_dir(args)
    write_results_csv(results, out / cfg.outputs.results_csv)
    write_timing_csv(results, out / cfg.outputs.timing_csv)
    write_json({"mode": "latency (single worker)", "timing": aggregate_timing(results),
                "degenerate": sum(r.degenerate for r in results)}, out / cfg.outputs.summary_json)
    write_json({"command": "localize", "run_config": cfg.to_dict(), "seed": cfg.seed,
                "map": env.provenance, "inputs": {m.name: m.fingerprint()}}, out / "meta.json")
    print(f"localized {len(results)} queries -> {out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _run_config(args)
    gt = read_ground_truth(args.ground_truth)
    labels = args.label or []
    if labels and len(labels) != len(args.results):
        raise UsageError("give one --label per results file")
    out = _out_dir(args)
    curves, summary = {}, {}
    for i, path in enumerate(args.results):
        path = Path(path)
        label = labels[i] if labels else (path.parent.name if path.stem == "results" else path.stem)
        if label in curves:
            raise UsageError(f"duplicate curve label {label!r}; pass --label")
        results = read_results_csv(path)
        missing = sorted({r.query_id for r in results} - set(gt))
        if missing:
            raise GroundTruthError(f"{path}: {len(missing)} query ids absent from ground truth: "
                                   + ", ".join(missing))
        curve = compute_pr(results, gt)
        curves[label] = curve
        name = cfg.outputs.pr_csv if len(args.results) == 1 else f"pr_{label}.csv"
        write_pr_csv(curve, out / name)
        summary[label] = {"auc": curve.auc, "recall_at_1": recall_at_1(results, gt),
                          "n_queries": curve.n_queries, "results_sha256": file_sha256(path)}
        print(f"{label}: AUC={curve.auc:.6f}")
    write_pr_svg(curves, out / cfg.outputs.pr_svg)
    write_json({"curves": summary, "ground_truth_sha256": file_sha256(args.ground_truth),
                "run_config": cfg.to_dict(), "seed": cfg.seed}, out / cfg.outputs.summary_json)
    return EXIT_OK


def cmd_correlate(args) -> int:
    cfg = _run_config(args)
    a, b = open_manifest(args.a), open_manifest(args.b)
    fa = extract_dataset(a, cfg.extractor, cfg.workers)
    fb = extract_dataset(b, cfg.extractor, cfg.workers)
    res = correlation_coefficient(fa, fb, sample_n=cfg.sample_n, seed=cfg.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_json({**res.to_dict(), "a": a.name, "b": b.name,
                "inputs": {"a": a.fingerprint(), "b": b.fingerprint()},
                "run_config": cfg.to_dict()}, out)
    print(f"correlation({a.name}, {b.name}) = {res.value:.6f} "
          f"(pairs used {res.pairs_used}, skipped {res.pairs_skipped})")
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _run_config(args)
    if args.n:
        cfg = replace(cfg, n=args.n)
    bundle = load_bundle(args.bundle)
    splits = [s.strip() for s in args.splits.split(",")] if args.splits else None
    report = run_bench(bundle, cfg, _out_dir(args), splits)
    for name, p in report["presets"].items():
        for split, s in p["splits"].items():
            print(f"{name:>12} {split:>5}  AUC={s['auc']:.4f}  R@1={s['recall_at_1']:.3f}  "
                  f"mean t_total={s['mean_t_total'] * 1e3:.2f} ms")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="INI run configuration")
    common.add_argument("--seed", type=int, help="override the global seed")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="vprbench", description="Visual place recognition benchmark toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", parents=[common], help="generate a synthetic dataset bundle")
    s.add_argument("--out", required=True)
    s.add_argument("--cols", type=int)
    s.add_argument("--rows", type=int)
    s.add_argument("--n-training", dest="n_training", type=int)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("identity-gt", parents=[common], help="ground truth mapping each image to itself")
    s.add_argument("manifest")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_identity_gt)

    s = sub.add_parser("train-dict", parents=[common], help="train a visual dictionary")
    s.add_argument("training", help="training manifest or image directory")
    s.add_argument("--out", required=True, help="dictionary file to write")
    s.set_defaults(func=cmd_train_dict)

    s = sub.add_parser("build-map", parents=[common], help="build an environment map")
    s.add_argument("reference", help="reference manifest or image directory")
    s.add_argument("--dictionary", required=True)
    s.add_argument("--out", required=True, help="map directory")
    s.set_defaults(func=cmd_build_map)

    s = sub.add_parser("localize", parents=[common], help="rank map images for every query")
    s.add_argument("queries", help="query manifest or image directory")
    s.add_argument("--map", required=True)
    s.add_argument("--n", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_localize)

    s = sub.add_parser("evaluate", parents=[common], help="precision-recall from results files")
    s.add_argument("results", nargs="+")
    s.add_argument("--ground-truth", required=True)
    s.add_argument("--label", action="append")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("correlate", parents=[common], help="mean descriptor correlation of two datasets")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--out", required=True, help="JSON file to write")
    s.set_defaults(func=cmd_correlate)

    s = sub.add_parser("bench", parents=[common], help="full train/map/localize/evaluate run")
    s.add_argument("bundle", help="bundle.json or its directory")
    s.add_argument("--splits", help="comma-separated query splits (default: all)")
    s.add_argument("--n", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_bench)
    return p


def _is_validation(exc: BaseException) -> bool:
    if isinstance(exc, StageError):
        return _is_validation(exc.cause)
    return isinstance(exc, (ValueError, FileNotFoundError, NotADirectoryError, KeyError))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:
        code = EXIT_VALIDATION if _is_validation(exc) else EXIT_RUNTIME
        print(f"error: {exc}", file=sys.stderr)
        if args.verbose:
            logging.exception("details")
        return code


if __name__ == "__main__":
    sys.exit(main())
