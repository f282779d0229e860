"""Exporter commands: `export` runs a masked LM over raw text, `synth`
emits a planted-cluster corpus. Both write the engine's binary embedding
file plus vocabulary (and labels for synth)."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .plm import ExportJob, export
from .synth import SynthSpec, export_synthetic


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"usage error: {message}", file=sys.stderr)
        raise SystemExit(4)


def build_parser():
    parser = _Parser(prog="embexport")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="embed a text file with a masked LM")
    p.add_argument("--input", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--max-seq-length", type=int, default=128)
    p.add_argument("--layer", type=int, default=-1)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("synth", help="generate a planted-cluster corpus")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--n", type=int, default=2000, help="token count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--latent-dim", type=int, default=8)
    p.add_argument("--tokens-per-doc", type=int, default=20)
    p.add_argument("--kappa", type=float, default=50.0)
    p.add_argument("--vocab-size", type=int, default=200)
    p.set_defaults(func=cmd_synth)
    return parser


def cmd_export(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    job = ExportJob(input_path=args.input, model=args.model,
                    out_embeddings=str(out / "embeddings.bin"),
                    out_vocab=str(out / "vocab.tsv"),
                    max_seq_length=args.max_seq_length, layer=args.layer)
    stats = export(job)
    print(f"{stats['documents']} docs, {stats['tokens']} tokens, "
          f"{stats['words']} words, r={stats['dim']} "
          f"({stats['skipped']} line(s) skipped)")
    return 0


def cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec = SynthSpec(k=args.k, dim=args.dim, n_tokens=args.n, seed=args.seed,
                     latent_dim=args.latent_dim,
                     tokens_per_doc=args.tokens_per_doc, kappa=args.kappa,
                     vocab_size=args.vocab_size)
    stats = export_synthetic(spec, out / "embeddings.bin", out / "vocab.tsv",
                             out / "labels.tsv")
    print(f"{stats['documents']} docs, {stats['tokens']} tokens, "
          f"{stats['words']} words, {stats['clusters']} planted clusters")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 4
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())
