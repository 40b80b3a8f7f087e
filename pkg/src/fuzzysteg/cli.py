"""Command-line interface.

Subcommands: gen-corpus, embed, extract, analyze, bench, ablate, profile.
The password for embed/extract/bench comes from --password or the
FUZZYSTEG_PASSWORD environment variable. `bench`, `ablate`, and `profile`
accept a JSON config file mirroring BenchConfig; explicit flags win over
config-file values. Exit code is 0 only when the command completed without a
fatal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import bench as bench_mod
from . import codec, corpus, crypto, report
from .errors import FuzzystegError
from .fuzzy import system_from_dict
from .imaging import load_png, save_png
from .steganalysis import run_detectors

PASSWORD_ENV = "FUZZYSTEG_PASSWORD"


def _password(args) -> str:
    if args.password is not None:
        return args.password
    env = os.environ.get(PASSWORD_ENV)
    if env:
        return env
    raise SystemExit(f"no password: use --password or set {PASSWORD_ENV}")


def _kdf(args) -> crypto.KdfParams:
    return crypto.DEFAULT_KDF if args.kdf_profile == "paper" else crypto.FAST_KDF


def _fuzzy_system(args):
    if getattr(args, "fuzzy_config", None):
        with open(args.fuzzy_config, encoding="utf-8") as fh:
            return system_from_dict(json.load(fh))
    return None


def cmd_gen_corpus(args) -> int:
    spec = corpus.CorpusSpec(
        images_per_category=args.images_per_category,
        side=args.side,
        master_seed=args.seed,
    )
    manifest = corpus.generate_corpus(spec, args.out)
    print(f"wrote {len(manifest)} images under {args.out}")
    return 0


def cmd_embed(args) -> int:
    cover = load_png(args.cover)
    message = Path(args.message).read_bytes()
    wire = crypto.serialize(
        crypto.seal(message, _password(args), _kdf(args))
    )
    stego = codec.embed(
        cover, wire, args.method, args.seed, system=_fuzzy_system(args)
    )
    save_png(stego, args.out)
    print(f"embedded {len(message)} bytes ({len(wire)} on the wire) into {args.out}")
    return 0


def cmd_extract(args) -> int:
    stego = load_png(args.stego)
    wire = codec.extract(stego, args.method, args.seed, system=_fuzzy_system(args))
    plaintext = crypto.open_payload(
        crypto.deserialize(wire), _password(args), _kdf(args)
    )
    Path(args.out).write_bytes(plaintext)
    print(f"recovered {len(plaintext)} bytes into {args.out}")
    return 0


def cmd_analyze(args) -> int:
    img = load_png(args.image)
    results = run_detectors(img)
    if args.detector != "all":
        results = {args.detector: results[args.detector]}
    payload = {
        name: {
            "statistic": res.statistic,
            "detected": res.detected,
            "threshold": res.threshold,
        }
        for name, res in results.items()
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _bench_config(args) -> bench_mod.BenchConfig:
    base = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            base = json.load(fh)
    manifest = args.corpus or base.get("corpus_manifest")
    if manifest is None:
        raise SystemExit("no corpus manifest: use --corpus or the config file")
    cfg = bench_mod.BenchConfig(
        corpus_manifest=str(manifest),
        bpp_levels=tuple(base.get("bpp_levels", (0.05, 0.10, 0.20, 0.30, 0.40))),
        methods=tuple(base.get("methods", codec.METHODS)),
        seed=base.get("seed", 42),
        password=base.get("password", "bench-password"),
        images_limit=base.get("images_limit"),
        ablation_variants=tuple(
            base.get("ablation_variants", bench_mod.ABLATION_VARIANTS)
        ),
    )
    if args.bpp:
        cfg = replace(cfg, bpp_levels=tuple(sorted(args.bpp)))
    if args.methods:
        cfg = replace(cfg, methods=tuple(args.methods))
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.password is not None or os.environ.get(PASSWORD_ENV):
        cfg = replace(cfg, password=_password(args))
    if args.images_limit is not None:
        cfg = replace(cfg, images_limit=args.images_limit)
    cfg = replace(cfg, kdf=_kdf(args))
    return cfg


def cmd_bench(args) -> int:
    cfg = _bench_config(args)
    result = bench_mod.run_bench(cfg, system=_fuzzy_system(args))
    paths = report.write_bench_outputs(result, args.out, render=not args.no_figures)
    failures = [r for r in result.records if r.error is not None]
    print(f"{len(result.records)} records ({len(failures)} failed) -> {args.out}")
    for name, path in sorted(paths.items()):
        print(f"  {name}: {path}")
    return 0


def cmd_ablate(args) -> int:
    cfg = _bench_config(args)
    cells = bench_mod.run_ablation(cfg, system=_fuzzy_system(args))
    paths = report.write_ablation_outputs(cells, args.out, render=not args.no_figures)
    print(f"{len(cells)} ablation cells -> {args.out}")
    for name, path in sorted(paths.items()):
        print(f"  {name}: {path}")
    return 0


def cmd_profile(args) -> int:
    cfg = _bench_config(args)
    rows = bench_mod.profile(cfg, images_count=args.images_count)
    paths = report.write_profile_outputs(rows, args.out, render=not args.no_figures)
    print(f"profiled {len(cfg.methods)} methods -> {args.out}")
    for name, path in sorted(paths.items()):
        print(f"  {name}: {path}")
    return 0


def _add_common_bench_args(sub):
    sub.add_argument("--corpus", help="path to a corpus manifest.csv")
    sub.add_argument("--config", help="JSON config mirroring BenchConfig")
    sub.add_argument("--out", required=True, help="output directory")
    sub.add_argument("--bpp", type=float, nargs="+", help="payload levels (bpp)")
    sub.add_argument("--methods", nargs="+", choices=codec.METHODS)
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--password", default=None)
    sub.add_argument("--images-limit", type=int, default=None)
    sub.add_argument(
        "--kdf-profile",
        choices=("paper", "fast"),
        default="fast",
        help="Argon2id cost profile (desk runs default to the reduced one)",
    )
    sub.add_argument("--fuzzy-config", help="JSON file with an alternative fuzzy system")
    sub.add_argument("--no-figures", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fuzzysteg",
        description="Adaptive fuzzy-controlled LSB steganography toolkit",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("gen-corpus", help="generate the synthetic cover corpus")
    sub.add_argument("--out", required=True)
    sub.add_argument("--images-per-category", type=int, default=200)
    sub.add_argument("--side", type=int, default=256)
    sub.add_argument("--seed", type=int, default=42)
    sub.set_defaults(func=cmd_gen_corpus)

    sub = subs.add_parser("embed", help="seal a message and embed it into a cover")
    sub.add_argument("--cover", required=True)
    sub.add_argument("--out", required=True)
    sub.add_argument("--method", required=True, choices=codec.METHODS)
    sub.add_argument("--seed", type=int, default=codec.DEFAULT_SEED)
    sub.add_argument("--password", default=None)
    sub.add_argument("--message", required=True, help="file with the plaintext")
    sub.add_argument("--kdf-profile", choices=("paper", "fast"), default="paper")
    sub.add_argument("--fuzzy-config")
    sub.set_defaults(func=cmd_embed)

    sub = subs.add_parser("extract", help="extract and decrypt a hidden message")
    sub.add_argument("--stego", required=True)
    sub.add_argument("--method", required=True, choices=codec.METHODS)
    sub.add_argument("--seed", type=int, default=codec.DEFAULT_SEED)
    sub.add_argument("--password", default=None)
    sub.add_argument("--out", required=True)
    sub.add_argument("--kdf-profile", choices=("paper", "fast"), default="paper")
    sub.add_argument("--fuzzy-config")
    sub.set_defaults(func=cmd_extract)

    sub = subs.add_parser("analyze", help="run steganalysis detectors on an image")
    sub.add_argument("--image", required=True)
    sub.add_argument(
        "--detector", choices=("rs", "chi2", "spa", "all"), default="all"
    )
    sub.set_defaults(func=cmd_analyze)

    sub = subs.add_parser("bench", help="run the full evaluation protocol")
    _add_common_bench_args(sub)
    sub.set_defaults(func=cmd_bench)

    sub = subs.add_parser("ablate", help="run the fuzzy-input ablation study")
    _add_common_bench_args(sub)
    sub.set_defaults(func=cmd_ablate)

    sub = subs.add_parser("profile", help="measure per-stage timings")
    _add_common_bench_args(sub)
    sub.add_argument("--images-count", type=int, default=30)
    sub.set_defaults(func=cmd_profile)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FuzzystegError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
