"""Command-line driver: batch segmentation, meshing, evaluation, filtering,
scripted replay, and the interactive session service.

Exit codes: 0 success, 1 I/O or usage errors, 2 validation/topology errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_IO)


def _build_parser() -> _Parser:
    p = _Parser(prog="livewire", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    seg = sub.add_parser("segment", help="run the automatic 3D sweep headlessly")
    seg.add_argument("--volume", required=True)
    seg.add_argument("--cuts", required=True, help="cut definitions JSON")
    seg.add_argument("--out", required=True, help="contours JSON output")
    seg.add_argument("--safety", type=float, default=1.5)
    seg.add_argument("--train", help="PGM mask of painted boundary pixels")
    seg.add_argument("--train-slice", type=int, default=0)
    seg.add_argument("--weights", default="0.5,0.5,0,0", help="wG,wL,wD,wS")

    msh = sub.add_parser("mesh", help="triangulate a contour stack to OBJ")
    msh.add_argument("--contours", required=True)
    msh.add_argument("--out", required=True)
    msh.add_argument("--samples", type=int, default=64)
    msh.add_argument("--arc-window", type=float, default=None,
                     help="window as a fraction of circumference (default 2/samples)")

    ev = sub.add_parser("eval", help="pairwise distance-transform error report")
    ev.add_argument("--runs", nargs="+", required=True, help="contour JSON files")
    ev.add_argument("--report", required=True, help="CSV output path")
    ev.add_argument("--summary", help="summary JSON output path")
    ev.add_argument("--width", type=int, default=0, help="image width (0 = fit)")
    ev.add_argument("--height", type=int, default=0)

    fl = sub.add_parser("filter", help="pre-filter a volume slice by slice")
    fl.add_argument("--volume", required=True)
    fl.add_argument("--kind", required=True,
                    choices=("anisotropic_diffusion", "contrast", "histogram_eq",
                             "unsharp_mask"))
    fl.add_argument("--params", default="", help="k=v comma list, e.g. amount=1,sigma=2")
    fl.add_argument("--out", required=True)

    sv = sub.add_parser("serve", help="run the interactive WebSocket session service")
    sv.add_argument("--port", type=int, default=8765)
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--root", default=".", help="directory volume paths resolve against")

    rp = sub.add_parser("replay", help="scripted-user phantom runs")
    rp.add_argument("--phantom", default="cylinder",
                    choices=("cylinder", "cone", "two_edge_plate", "ellipsoid"))
    rp.add_argument("--runs", type=int, default=2)
    rp.add_argument("--seeds", type=int, default=8)
    rp.add_argument("--jitter", type=float, default=1.0)
    rp.add_argument("--noise", type=float, default=4.0)
    rp.add_argument("--rng-seed", type=int, default=0)
    rp.add_argument("--out-dir", required=True)
    return p


def _parse_weights(text: str):
    from .cost_model import CostWeights

    try:
        wg, wl, wd, ws = (float(t) for t in text.split(","))
    except ValueError:
        raise ValueError(f"--weights expects wG,wL,wD,wS, got {text!r}") from None
    return CostWeights(w_g=wg, w_l=wl, w_d=wd, w_s=ws)


def _cmd_segment(args) -> int:
    from .cost_model import train_mapping
    from .pipeline3d import StripParams, TopologyViolation, UnreachableSeedError, load_segments
    from .replay import paint_training_samples
    from .volume_io import load_volume, read_pgm, save_contours
    from .cost_model import static_cost

    volume = load_volume(args.volume)
    segments = load_segments(args.cuts)
    weights = _parse_weights(args.weights)
    mapping = None
    if args.train:
        mask = read_pgm(args.train) > 0
        field = static_cost(volume.voxels[args.train_slice], weights)
        mapping = train_mapping(paint_training_samples(field, mask))
    try:
        from .pipeline3d import segment_volume

        contours = segment_volume(volume, segments, weights, mapping,
                                  StripParams(args.safety))
    except TopologyViolation as e:
        loc = f" (slice {e.slice_index})" if e.slice_index is not None else ""
        loc += f" (cut {e.cut_number})" if e.cut_number is not None else ""
        print(f"topology violation{loc}: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except UnreachableSeedError as e:
        print(f"unreachable seed (slice {e.slice_index}): {e}; "
              "widen the safety factor", file=sys.stderr)
        return EXIT_VALIDATION
    save_contours(contours, args.out)
    return EXIT_OK


def _cmd_mesh(args) -> int:
    from . import mesh as mesh_mod
    from .volume_io import load_contours

    contours = load_contours(args.contours)
    try:
        result = mesh_mod.reconstruct(contours, args.samples, args.arc_window)
    except mesh_mod.MeshError as e:
        print(f"mesh error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    frac = args.arc_window if args.arc_window is not None else 2.0 / args.samples
    mesh_mod.save_obj(result, args.out, m=args.samples, arc_window=frac)
    return EXIT_OK


def _cmd_eval(args) -> int:
    from .metrics import build_report, save_report
    from .volume_io import load_contours

    if len(args.runs) < 2:
        print("eval needs at least 2 runs", file=sys.stderr)
        return EXIT_VALIDATION
    runs = [load_contours(p) for p in args.runs]
    if args.width and args.height:
        shape = (args.height, args.width)
    else:
        hi = 0
        for r in runs:
            for _, pts in r.slices:
                if len(pts):
                    hi = max(hi, int(np.asarray(pts).max()) + 2)
        shape = (hi, hi)
    report = build_report(runs, shape)
    save_report(report, args.report, args.summary)
    return EXIT_OK


def _cmd_filter(args) -> int:
    from .image_ops import FilterSpec, apply_filter
    from .volume_io import Volume, load_volume, save_volume_lwv1

    params = {}
    if args.params:
        for part in args.params.split(","):
            k, v = part.split("=", 1)
            params[k.strip()] = float(v)
    volume = load_volume(args.volume)
    try:
        spec = FilterSpec(args.kind, params)
        out = np.stack([apply_filter(volume.voxels[k], spec)
                        for k in range(volume.depth)])
    except ValueError as e:
        print(f"invalid filter parameters: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    save_volume_lwv1(Volume(out, volume.spacing), args.out)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import asyncio

    from .service import serve

    asyncio.run(serve(args.host, args.port, root=args.root))
    return EXIT_OK


def _cmd_replay(args) -> int:
    from .phantoms import Phantom
    from .replay import SeedStrategy, scripted_user
    from .volume_io import save_contours

    phantom = Phantom(args.phantom, noise_sigma=args.noise)
    strategy = SeedStrategy(seeds=args.seeds, jitter_sigma=args.jitter)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(args.runs):
        result = scripted_user(phantom, strategy, args.rng_seed + i)
        save_contours(result.contours, out / f"{result.run_id}.json")
        print(f"{result.run_id}: seeds={result.seed_count} "
              f"corrections={result.corrections} converged={result.converged}")
    return EXIT_OK


_COMMANDS = {
    "segment": _cmd_segment,
    "mesh": _cmd_mesh,
    "eval": _cmd_eval,
    "filter": _cmd_filter,
    "serve": _cmd_serve,
    "replay": _cmd_replay,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
