"""Command-line interface: estimate kernels, deblur, synthesize, evaluate.

Machine-readable results go to stdout; diagnostics to stderr.  Exit codes:
0 success, 2 I/O failure, 3 degenerate input, 4 dimension mismatch.
"""

import argparse
import json
import logging
import sys

import numpy as np

from . import estimation, imgio, kernels, metrics, nonuniform, synth
from .optimizer import DeblurParams, deblur_multiscale, estimate_latent

EXIT_IO = 2
EXIT_DEGENERATE = 3
EXIT_DIMENSION = 4

log = logging.getLogger("phasedeblur")

_DEFAULTS = DeblurParams()
_PEAK_DEFAULTS = estimation.PeakConfig()


def _add_solver_flags(sp):
    sp.add_argument("--mu1", type=float, default=_DEFAULTS.mu1,
                    help="kernel L2 weight")
    sp.add_argument("--mu2", type=float, default=_DEFAULTS.mu2,
                    help="gradient-penalty weight")
    sp.add_argument("--epsilon", type=float, default=_DEFAULTS.epsilon,
                    help="gradient threshold scale in [0.1, 1]")
    sp.add_argument("--iters", type=int, default=_DEFAULTS.outer_iters,
                    help="alternations per pyramid level")
    sp.add_argument("--scale", type=float, default=_DEFAULTS.pyramid_scale,
                    help="pyramid downscale factor in (0.5, 1)")
    sp.add_argument("--boundary", choices=("taper", "circular"),
                    default=_DEFAULTS.boundary, help="frequency-solve boundary handling")


def _add_peak_flags(sp):
    sp.add_argument("--taper-fraction", type=float,
                    default=_PEAK_DEFAULTS.taper_fraction,
                    help="border fraction for the pre-analysis edge taper")
    sp.add_argument("--threshold", type=float,
                    default=_PEAK_DEFAULTS.relative_threshold,
                    help="relative side-peak threshold in (0, 1)")
    sp.add_argument("--exclusion-radius", type=float,
                    default=_PEAK_DEFAULTS.central_exclusion_radius,
                    help="central exclusion radius in px")
    sp.add_argument("--max-peaks", type=int, default=_PEAK_DEFAULTS.max_peaks,
                    help="maximum number of side peaks")


def _params(args):
    return DeblurParams(mu1=args.mu1, mu2=args.mu2, epsilon=args.epsilon,
                        outer_iters=args.iters, pyramid_scale=args.scale,
                        boundary=args.boundary)


def _peak_config(args):
    return estimation.PeakConfig(central_exclusion_radius=args.exclusion_radius,
                                 relative_threshold=args.threshold,
                                 max_peaks=args.max_peaks,
                                 taper_fraction=args.taper_fraction)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="phasedeblur",
        description="Blind motion deblurring via phase-only kernel estimation.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("estimate-kernel",
                        help="estimate a blur kernel from a blurry image")
    sp.add_argument("input")
    sp.add_argument("out_kernel")
    sp.add_argument("--dump-spectrum", metavar="PATH",
                    help="write the autocorrelation image for inspection")
    _add_peak_flags(sp)
    sp.add_argument("--config", metavar="PATH")

    sp = sub.add_parser("deblur", help="deblur an image")
    sp.add_argument("input")
    sp.add_argument("output")
    sp.add_argument("--kernel", metavar="PATH",
                    help="use this kernel instead of estimating one")
    sp.add_argument("--grid", metavar="NxM",
                    help="non-uniform patch grid, e.g. 2x2")
    sp.add_argument("--overlap", type=float, default=0.25,
                    help="patch overlap fraction in [0, 0.5)")
    sp.add_argument("--masks", action="append", default=None, metavar="PATH",
                    help="external region mask image (repeatable)")
    sp.add_argument("--trace", metavar="PATH",
                    help="write a per-iteration energy trace as JSON")
    sp.add_argument("--out-kernel", metavar="PATH",
                    help="also write the final kernel")
    sp.add_argument("--depth", type=int, choices=(8, 16), default=16)
    sp.add_argument("--jobs", type=int, default=1,
                    help="parallel workers for non-uniform regions")
    _add_solver_flags(sp)
    _add_peak_flags(sp)
    sp.add_argument("--config", metavar="PATH")

    sp = sub.add_parser("synth", help="generate synthetic test data")
    sp.add_argument("--pattern", choices=("checker", "noise", "edges", "circle"),
                    default="edges")
    sp.add_argument("--size", type=int, default=256)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--length", type=float, default=20.0,
                    help="linear blur length in px")
    sp.add_argument("--angle", type=float, default=10.0,
                    help="linear blur angle in degrees")
    sp.add_argument("--waypoints", nargs="+", metavar="X,Y",
                    help="trajectory waypoints; overrides --length/--angle")
    sp.add_argument("--noise-sigma", type=float, default=0.0)
    sp.add_argument("--noise-seed", type=int, default=0)
    sp.add_argument("--out-sharp", metavar="PATH")
    sp.add_argument("--out-blurry", metavar="PATH")
    sp.add_argument("--out-kernel", metavar="PATH")
    sp.add_argument("--depth", type=int, choices=(8, 16), default=16)
    sp.add_argument("--config", metavar="PATH")

    sp = sub.add_parser("eval", help="compare a result against a reference")
    sp.add_argument("result")
    sp.add_argument("reference")
    sp.add_argument("--peak", type=float, default=1.0)
    sp.add_argument("--border", type=int, default=0,
                    help="crop this border (px) before computing metrics")
    sp.add_argument("--image-id", default=None)
    sp.add_argument("--blurry", metavar="PATH",
                    help="blurry observation (needed for --gt-kernel)")
    sp.add_argument("--est-kernel", metavar="PATH")
    sp.add_argument("--gt-kernel", metavar="PATH",
                    help="ground-truth kernel; enables the error ratio")
    sp.add_argument("--out", metavar="PATH", help="also write the JSON report")
    _add_solver_flags(sp)
    sp.add_argument("--config", metavar="PATH")

    return parser


def _apply_config(parser, argv, args):
    """Config file supplies defaults; explicit CLI flags still win."""
    if getattr(args, "config", None) is None:
        return args
    with open(args.config) as f:
        cfg = json.load(f)
    sub_actions = next(a for a in parser._actions
                       if isinstance(a, argparse._SubParsersAction))
    sp = sub_actions.choices[args.command]
    allowed = {a.dest for a in sp._actions if a.dest not in ("help", "config")}
    unknown = set(cfg) - allowed
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    sp.set_defaults(**cfg)
    return parser.parse_args(argv)


def _cmd_estimate_kernel(args):
    img = imgio.read_image(args.input)
    cfg = _peak_config(args)
    try:
        ms = estimation.motion_spectrum(img, cfg)
    except ValueError as exc:
        log.error("degenerate input: %s", exc)
        return EXIT_DEGENERATE
    kernel, pattern = estimation.estimate_kernel(img, cfg)
    kernels.write_kernel_text(args.out_kernel, kernel)
    if args.dump_spectrum:
        vis = ms / ms.max()
        imgio.write_image(args.dump_spectrum, np.clip(vis, 0.0, 1.0), depth=8)
    print(json.dumps({"angle": pattern.angle, "magnitude": pattern.magnitude,
                      "confidence": pattern.confidence}, sort_keys=True))
    return 0


def _parse_grid(spec):
    try:
        nx, ny = (int(t) for t in spec.lower().split("x"))
    except Exception:
        raise ValueError(f"bad grid spec {spec!r}; expected NxM")
    return nx, ny


def _cmd_deblur(args):
    img = imgio.read_image(args.input)
    p = _params(args)
    cfg = _peak_config(args)
    records = [] if args.trace else None
    kernel_out = None

    if args.masks:
        masks = nonuniform.load_region_masks(
            [imgio.read_image(m) for m in args.masks])
        latent, results = nonuniform.deblur_nonuniform(
            img, masks, p, peak_cfg=cfg, jobs=args.jobs)
        kernel_out = results[0].kernel
    elif args.grid:
        nx, ny = _parse_grid(args.grid)
        masks = nonuniform.grid_decompose(img, nx, ny, args.overlap)
        latent, results = nonuniform.deblur_nonuniform(
            img, masks, p, peak_cfg=cfg, jobs=args.jobs)
        kernel_out = results[0].kernel
    else:
        k_init = kernels.read_kernel_text(args.kernel) if args.kernel else None
        res = deblur_multiscale(img, p, k_init=k_init, peak_cfg=cfg,
                                records=records)
        latent, kernel_out = res.latent, res.kernel

    imgio.write_image(args.output, latent, depth=args.depth)
    if args.out_kernel and kernel_out is not None:
        kernels.write_kernel_text(args.out_kernel, kernel_out)
    if args.trace:
        with open(args.trace, "w") as f:
            json.dump(records or [], f, indent=2, sort_keys=True)
    return 0


def _cmd_synth(args):
    sharp = synth.test_pattern(args.pattern, args.size, seed=args.seed)
    if args.waypoints:
        pts = [tuple(float(v) for v in w.split(",")) for w in args.waypoints]
        kernel = synth.trajectory_kernel(pts)
    else:
        kernel = synth.synthesize_linear_kernel(args.length, args.angle)
    blurry = synth.blur_with_kernel(sharp, kernel, args.noise_sigma,
                                    seed=args.noise_seed)
    if args.out_sharp:
        imgio.write_image(args.out_sharp, sharp, depth=args.depth)
    if args.out_blurry:
        imgio.write_image(args.out_blurry, np.clip(blurry, 0.0, 1.0),
                          depth=args.depth)
    if args.out_kernel:
        kernels.write_kernel_text(args.out_kernel, kernel)
    return 0


def _cmd_eval(args):
    result = imgio.read_image(args.result)
    reference = imgio.read_image(args.reference)
    if result.shape != reference.shape:
        log.error("dimension mismatch: %s vs %s", result.shape, reference.shape)
        return EXIT_DIMENSION
    ratio = None
    if args.gt_kernel:
        if not (args.blurry and args.est_kernel):
            log.error("--gt-kernel requires --blurry and --est-kernel")
            return EXIT_IO
        blurry = imgio.read_image(args.blurry)
        if blurry.shape != reference.shape:
            log.error("dimension mismatch: blurry %s vs reference %s",
                      blurry.shape, reference.shape)
            return EXIT_DIMENSION
        k_est = kernels.read_kernel_text(args.est_kernel)
        k_gt = kernels.read_kernel_text(args.gt_kernel)
        ratio = metrics.error_ratio(blurry, k_est, k_gt, reference, _params(args))
    rep = metrics.report(result, reference, peak=args.peak, border=args.border,
                         error_ratio_value=ratio)
    payload = rep.to_json(args.image_id or args.result)
    print(payload)
    if args.out:
        with open(args.out, "w") as f:
            f.write(payload + "\n")
    return 0


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config(parser, argv, args)
        handler = {"estimate-kernel": _cmd_estimate_kernel,
                   "deblur": _cmd_deblur,
                   "synth": _cmd_synth,
                   "eval": _cmd_eval}[args.command]
        return handler(args)
    except (IOError, OSError, json.JSONDecodeError) as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO
    except ValueError as exc:
        log.error("degenerate input: %s", exc)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
