"""Command-line interface.

Subcommands:

* ``align <map1> <map2>``: run the full pipeline and print (or write)
  the result document;
* ``interpret <map>``: run map interpretation alone and dump the pruned
  arrangement.

Exit codes: 0 ok, 2 I/O or config problem, 3 no traits detected,
4 no faces in the arrangement, 5 empty hypothesis pool.
"""

from __future__ import annotations

import argparse
import sys

from .config import SCHEMA, PipelineConfig, load_config_file, set_key
from .errors import MapAlignError
from .pipeline import align_maps, interpret_to_artifacts, serialize_arrangement


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="config file (key = value lines)")
    group = parser.add_argument_group("config overrides")
    for key, (_, help_text) in SCHEMA.items():
        group.add_argument(f"--{key}", dest=f"cfg:{key}", metavar="V", help=help_text)
    # short aliases for the knobs people actually reach for
    group.add_argument("--mode", dest="cfg:matching.mode", metavar="V", help="ombb or exact")
    group.add_argument("--thr-e", dest="cfg:prune.thr_e", metavar="F", help="pruning threshold")
    group.add_argument("--thr-s", dest="cfg:matching.thr_s", metavar="F", help="scale-ratio bound")


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    config = PipelineConfig()
    if args.config:
        load_config_file(args.config, config)
    for name, value in vars(args).items():
        if name.startswith("cfg:") and value is not None:
            set_key(config, name[4:], value)
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mapalign", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_align = sub.add_parser("align", help="align two maps")
    p_align.add_argument("map1", help="bitmap (.pgm/.png) or line-list text file")
    p_align.add_argument("map2", help="bitmap (.pgm/.png) or line-list text file")
    p_align.add_argument("--out", metavar="PATH", help="write the result document here")
    p_align.add_argument("--dump-pool", metavar="PATH", help="write the hypothesis pool here")
    p_align.add_argument("--overlay", metavar="PATH", help="write a PNG of map1 warped onto map2")
    _add_config_flags(p_align)

    p_int = sub.add_parser("interpret", help="interpret a single map")
    p_int.add_argument("map", help="bitmap (.pgm/.png) or line-list text file")
    p_int.add_argument("--out", metavar="PATH", help="write the arrangement dump here")
    p_int.add_argument("--render", metavar="PATH", help="write a face-colored PNG here")
    _add_config_flags(p_int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _build_config(args)
        if args.command == "align":
            report = align_maps(
                args.map1,
                args.map2,
                config,
                out_path=args.out,
                dump_pool_path=args.dump_pool,
                overlay_path=args.overlay,
            )
            text = report.to_text()
            if args.out is None:
                sys.stdout.write(text)
            else:
                sys.stdout.write(f"wrote {args.out}\n")
        else:
            interp = interpret_to_artifacts(
                args.map, config, out_path=args.out, render_path=args.render
            )
            if args.out is None:
                sys.stdout.write(serialize_arrangement(interp.arrangement))
            else:
                sys.stdout.write(f"wrote {args.out}\n")
    except MapAlignError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
