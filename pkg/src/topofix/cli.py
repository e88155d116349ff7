"""Command line front end.

Subcommands mirror the library: generate phantoms, compute barcodes and
losses, refine probability fields, run the connected-component baseline,
and score masks.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .baseline import cca_clean
from .export import render_barcode_svg, write_barcode_csv
from .grids import (
    CLASS_NAMES,
    GridFormatError,
    LabelMask,
    MultiClassProb,
    ProbMap,
    load_grid,
    save_grid,
)
from .loss import topo_loss, topo_loss_single, union_prob
from .metrics import dsc, mean_dsc, topologically_correct
from .persistence import barcode_of
from .phantom import (
    CorruptionSpec,
    PhantomSpec,
    corrupt_with_info,
    generate,
)
from .priors import load_prior, short_axis_prior
from .refine import (
    MODE_PAIRS,
    MODE_SINGLE,
    RefineConfig,
    argmax_mask,
    refine,
    write_report_csv,
)


def _class_id(name: str) -> int:
    try:
        return CLASS_NAMES.index(name)
    except ValueError:
        raise SystemExit(f"unknown class {name!r}, expected one of {CLASS_NAMES}")


def _load_prior(path):
    return load_prior(path) if path else short_axis_prior()


def _as_mask(grid) -> LabelMask:
    if isinstance(grid, LabelMask):
        return grid
    if isinstance(grid, MultiClassProb):
        return LabelMask(np.argmax(grid.channels, axis=0).astype(np.uint8))
    raise SystemExit("expected a label mask or a 4-channel probability grid")


def cmd_phantom(args) -> int:
    spec = PhantomSpec(
        size=args.size,
        temperature=args.temperature,
        seed=args.seed,
    )
    mask, prob = generate(spec)
    if args.corrupt:
        kwargs = {"seed": args.corrupt_seed}
        if args.corrupt in ("spurious_component", "punched_hole"):
            if not args.klass:
                raise SystemExit(f"--klass is required for {args.corrupt}")
            kwargs["klass"] = _class_id(args.klass)
        spec_c = CorruptionSpec(kind=args.corrupt, **kwargs)
        res = corrupt_with_info(mask, prob, spec_c)
        prob = res.prob
        for i, j, d in sorted(res.violated):
            print(
                f"violated: ({CLASS_NAMES[i]}, {CLASS_NAMES[j]}) dim {d}",
                file=sys.stderr,
            )
    save_grid(mask, args.truth)
    save_grid(prob, args.prob)
    print(f"wrote {args.truth} and {args.prob}")
    return 0


def cmd_barcode(args) -> int:
    grid = load_grid(args.input)
    if isinstance(grid, ProbMap):
        pm = grid
    elif isinstance(grid, MultiClassProb):
        i, j = _class_id(args.ci), _class_id(args.cj or args.ci)
        if not 1 <= i <= j <= 3:
            raise SystemExit("union channels must be foreground, i <= j")
        pm = union_prob(grid, i, j)
    else:
        raise SystemExit("barcode needs a probability grid, not a label mask")
    bc = barcode_of(pm.values)
    if args.csv:
        write_barcode_csv(bc, args.csv)
        print(f"wrote {args.csv}")
    if args.svg:
        render_barcode_svg(bc, args.svg, min_lifetime=args.min_lifetime)
        print(f"wrote {args.svg}")
    if not args.csv and not args.svg:
        for p in bc.pairs:
            print(
                f"dim {p.dim}  [{p.death:.6f}, {p.birth:.6f}]  "
                f"lifetime {p.lifetime:.6f}"
            )
    return 0


def cmd_loss(args) -> int:
    grid = load_grid(args.input)
    if not isinstance(grid, MultiClassProb):
        raise SystemExit("loss needs a 4-channel probability grid")
    prior = _load_prior(args.prior)
    fn = topo_loss if args.mode == MODE_PAIRS else topo_loss_single
    breakdown, _ = fn(grid, prior)
    print("  i   j  dim  target  matched  spurious  contribution")
    for e in breakdown.entries:
        print(
            f"  {CLASS_NAMES[e.i]:3s} {CLASS_NAMES[e.j]:3s} {e.d}   "
            f"{e.target:5d}  {e.matched:8.5f} {e.spurious:9.5f}  {e.contribution:12.5f}"
        )
    print(f"total {breakdown.total!r}")
    return 0


def cmd_refine(args) -> int:
    grid = load_grid(args.input)
    if not isinstance(grid, MultiClassProb):
        raise SystemExit("refine needs a 4-channel probability grid")
    prior = _load_prior(args.prior)
    cfg = RefineConfig(
        lam=args.lam,
        iterations=args.iterations,
        step_size=args.step_size,
        mode=args.mode,
    )
    report = refine(grid, prior, cfg)
    save_grid(report.prob, args.out)
    print(f"wrote {args.out}")
    if args.mask_out:
        save_grid(report.mask, args.mask_out)
        print(f"wrote {args.mask_out}")
    if args.history:
        write_report_csv(report, args.history)
        print(f"wrote {args.history}")
    t = report.best_iteration
    print(
        f"best iteration {t}: loss {float(report.topo[t])!r} "
        f"(from {float(report.topo[0])!r}), prior satisfied: {report.topo_correct}"
    )
    return 0


def cmd_cca(args) -> int:
    grid = load_grid(args.input)
    mask = cca_clean(_as_mask(grid))
    save_grid(mask, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_metrics(args) -> int:
    truth = _as_mask(load_grid(args.truth))
    pred = _as_mask(load_grid(args.pred))
    prior = _load_prior(args.prior)
    for k, name in enumerate(CLASS_NAMES):
        if k == 0:
            continue
        print(f"dice[{name}] = {dsc(truth, pred, k):.6f}")
    print(f"dice[mean] = {mean_dsc(truth, pred):.6f}")
    print(f"prior satisfied: {topologically_correct(pred, prior)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="topofix",
        description="Topological refinement of multi-class probability grids",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="generate a synthetic labelled field")
    p.add_argument("--truth", required=True, help="output path, label mask grid")
    p.add_argument("--prob", required=True, help="output path, probability grid")
    p.add_argument("--size", type=int, default=96)
    p.add_argument("--temperature", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--corrupt",
        choices=["spurious_component", "punched_hole", "broken_ring", "adjacency_break", "soften"],
        help="apply one corruption to the probability grid",
    )
    p.add_argument("--klass", choices=CLASS_NAMES[1:], help="class the corruption edits")
    p.add_argument("--corrupt-seed", type=int, default=0)
    p.set_defaults(fn=cmd_phantom)

    p = sub.add_parser("barcode", help="persistence barcode of a probability grid")
    p.add_argument("input")
    p.add_argument("--ci", default="rv", help="first union class (4-channel input)")
    p.add_argument("--cj", help="second union class, defaults to --ci")
    p.add_argument("--csv", help="write ranked pairs as CSV")
    p.add_argument("--svg", help="write a bar diagram")
    p.add_argument("--min-lifetime", type=float, default=0.0)
    p.set_defaults(fn=cmd_barcode)

    p = sub.add_parser("loss", help="loss breakdown of a probability grid")
    p.add_argument("input")
    p.add_argument("--prior", help="prior table file, default built-in")
    p.add_argument("--mode", choices=[MODE_PAIRS, MODE_SINGLE], default=MODE_PAIRS)
    p.set_defaults(fn=cmd_loss)

    p = sub.add_parser("refine", help="gradient refinement of a probability grid")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--mask-out", help="also write the argmax mask")
    p.add_argument("--history", help="write per-iteration losses as CSV")
    p.add_argument("--prior", help="prior table file, default built-in")
    p.add_argument("--lam", type=float, default=RefineConfig.lam)
    p.add_argument("--iterations", type=int, default=RefineConfig.iterations)
    p.add_argument("--step-size", type=float, default=RefineConfig.step_size)
    p.add_argument("--mode", choices=[MODE_PAIRS, MODE_SINGLE], default=MODE_PAIRS)
    p.set_defaults(fn=cmd_refine)

    p = sub.add_parser("cca", help="largest-component baseline cleanup")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_cca)

    p = sub.add_parser("metrics", help="overlap and topology scores of a mask")
    p.add_argument("--truth", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--prior", help="prior table file, default built-in")
    p.set_defaults(fn=cmd_metrics)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (GridFormatError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
