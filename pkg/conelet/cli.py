""" Command line front end

Subcommands design, certify, transform, roundtrip, bench and validate. Every
artifact echoes the run configuration (without the thread count and output
directory) and the library version.
"""

import argparse
import math
import os
import sys
from collections import namedtuple

import numpy as np
from tqdm import tqdm

from conelet import check, convert, set_type
from conelet.cartoon_bench import (
    DEFAULT_N_LIST,
    DEFAULT_N_RANGE,
    run_bench,
    summarize_slopes,
)
from conelet.errors import (
    ArtifactError,
    ArtifactSchemaError,
    ConeletError,
    NotCertifiableError,
    ParameterError,
    exit_code,
)
from conelet.filter_design import (
    DEFAULT_J1,
    FilterParams,
    feasibility_envelope,
    filter_to_dict,
    halfband_power,
    spectral_factorize,
)
from conelet.frame_certification import (
    GAMMA_PRIME_POINTS,
    FeasibleParamSet,
    ShearSet,
    certificate_to_dict,
    certify,
    kprime_search,
    table1,
)
from conelet.scaling_function import cascade_table, envelope_table, make_profile
from conelet.shearlet_transform import analyze, build_system, reconstruct
from conelet.validate import load_schema, validate_csv_file, validate_json_file
from conelet.workers import thread_count


RunConfig = namedtuple("RunConfig", "subcommand flags seed out_dir threads")

# flags that do not change any output
UNECHOED_FLAGS = ("out", "threads", "quiet", "func", "subcommand")

COEFFICIENT_SUFFIX = ".cnlt"


def main(argv=None):
    """Entry point of the conelet console script

    Returns:
        code (int): 0 on success, 2 parameter error, 3 certification or
            numerical failure, 4 input/output error
    """
    cli = init_cli()
    args = cli.parse_args(argv)
    try:
        config = run_config(args)
        os.makedirs(config.out_dir, exist_ok=True)
        args.func(args, config)
    except (ConeletError, OSError) as e:
        tqdm.write(f"conelet {args.subcommand}: {e}", file=sys.stderr)
        return exit_code(e)
    return 0


def run_config(args):
    """RunConfig of parsed arguments, the thread count resolved against
    CONELET_THREADS"""
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in UNECHOED_FLAGS}
    return RunConfig(
        subcommand=args.subcommand,
        flags=flags,
        seed=args.seed,
        out_dir=args.out,
        threads=thread_count(args.threads),
    )


def echo(config):
    """The part of the configuration embedded in artifacts"""
    return {"subcommand": config.subcommand, "flags": config.flags, "seed": config.seed}


def init_cli():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--out",
        type=str,
        default=".",
        help="Directory the artifacts are written to",
    )
    common.add_argument(
        "--seed",
        type=int,
        default=0,
        help="Seed of every random draw",
    )
    common.add_argument(
        "--threads",
        type=int,
        help="Number of worker processes, overridden by CONELET_THREADS",
    )
    common.add_argument(
        "--quiet",
        action="store_true",
        help="Do not print stage lines",
    )

    parser = argparse.ArgumentParser(
        prog="conelet",
        description="Compactly supported cone-adapted shearlet frames",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    design = subparsers.add_parser(
        "design", parents=[common], help="Design the low pass filter and its decay envelope"
    )
    _filter_arguments(design, required=True)
    design.add_argument(
        "--Kprime",
        type=int,
        help="Split parameter of the decay envelope; writes the envelope artifact",
    )
    design.add_argument("--J1", type=int, default=DEFAULT_J1, help="Depth of the envelope product")
    design.add_argument(
        "--force",
        action="store_true",
        help="Skip the construction band and envelope hypothesis gate",
    )
    design.add_argument(
        "--cascade-levels",
        type=int,
        default=0,
        help="Write the scaling function sampled at this dyadic depth",
    )
    design.add_argument(
        "--envelope-points",
        type=int,
        default=0,
        help="Write this many spectrum samples with their bounds",
    )
    design.set_defaults(func=cmd_design)

    certify_parser = subparsers.add_parser(
        "certify", parents=[common], help="Certify frame bounds in closed form"
    )
    _filter_arguments(certify_parser, required=False)
    _sampling_arguments(certify_parser)
    mode = certify_parser.add_mutually_exclusive_group(required=True)
    mode.add_argument(
        "--kprime-pair",
        type=_pair,
        help="K' for the upper Calderon bound and K' for the remainder, as a,b",
    )
    mode.add_argument("--search", action="store_true", help="Search the best admissible K' pair")
    mode.add_argument("--table1", action="store_true", help="Recompute the ten tabulated ratios")
    certify_parser.add_argument("--plane", choices=["cone", "full"], default="cone")
    certify_parser.add_argument("--J0", type=int, help="Depth of the lower bound, convergence rule by default")
    certify_parser.add_argument("--J1", type=int, default=DEFAULT_J1, help="Depth of the envelope product")
    certify_parser.add_argument("--gamma-points", type=int, default=GAMMA_PRIME_POINTS, help="Size of the gamma' grid")
    certify_parser.add_argument(
        "--ceil-sectors",
        action="store_true",
        help="Count ceil(c1/c2) lattice sectors in the remainder instead of min(ceil(c1/c2), 2); always on with --table1",
    )
    output = certify_parser.add_mutually_exclusive_group()
    output.add_argument("--json", dest="format", action="store_const", const="json", help="Write JSON (default)")
    output.add_argument("--csv", dest="format", action="store_const", const="csv", help="Write CSV")
    certify_parser.set_defaults(func=cmd_certify, format="json")

    transform = subparsers.add_parser(
        "transform", parents=[common], help="Shearlet coefficients of an image, or the image of coefficients"
    )
    _system_arguments(transform)
    source = transform.add_mutually_exclusive_group(required=True)
    source.add_argument("--image", type=str, help="PGM or .npy image to analyze")
    source.add_argument("--coefficients", type=str, help="Coefficient file to synthesize with the dual frame")
    transform.add_argument("--tol", type=float, default=1e-8, help="CG relative residual")
    transform.set_defaults(func=cmd_transform)

    roundtrip = subparsers.add_parser(
        "roundtrip", parents=[common], help="Relative error of reconstruct after analyze"
    )
    _system_arguments(roundtrip)
    roundtrip.add_argument("--image", type=str, help="PGM or .npy image, random images by default")
    roundtrip.add_argument("--size", type=int, default=128, help="Side of the random images")
    roundtrip.add_argument("--ntrials", type=int, default=1, help="Number of random images")
    roundtrip.add_argument("--tol", type=float, default=1e-8, help="CG relative residual")
    roundtrip.set_defaults(func=cmd_roundtrip)

    bench = subparsers.add_parser(
        "bench", parents=[common], help="N-term approximation of cartoons, shearlets against wavelets"
    )
    _filter_arguments(bench, required=False, K=39, L=19)
    _sampling_arguments(bench)
    bench.add_argument("--size", type=int, default=256, help="Image side")
    bench.add_argument("--ntrials", type=int, default=5, help="Number of cartoon seeds, from --seed on")
    bench.add_argument("--nu", type=float, default=10.0, help="Curvature budget of the boundary")
    bench.add_argument("--rho0", type=float, default=0.8, help="Largest boundary radius")
    bench.add_argument("--n-list", type=_int_list, default=DEFAULT_N_LIST, help="Coefficient counts, as a,b,...")
    bench.add_argument("--n-range", type=_pair, default=DEFAULT_N_RANGE, help="Range of N fitted, as low,high")
    bench.add_argument("--smooth-only", action="store_true", help="Cartoons without the jump part")
    bench.add_argument("--svg", action="store_true", help="Also plot the decay curves as SVG")
    bench.set_defaults(func=cmd_bench)

    validate = subparsers.add_parser(
        "validate", parents=[common], help="Validate a JSON artifact or CSV records against a schema"
    )
    validate.add_argument("--schema", required=True, type=str, help="Bundled schema name or schema path")
    validate.add_argument("--max-fails", type=int, default=1, help="Maximum number of reports printed")
    validate.add_argument("--chunk-size", type=int, default=1000, help="Number of rows in a CSV records chunk")
    validate.add_argument("path", type=str, metavar="PATH", help="The .json or .csv artifact")
    validate.set_defaults(func=cmd_validate)
    return parser


def cmd_design(args, config):
    params = FilterParams(args.K, args.L, args.Kprime or 0)
    check.require(check.basic(params))
    if not args.force and (args.Kprime is not None or args.L >= 10):
        check.require(check.construction_band(params), "construction band, use --force to skip")
        if args.Kprime is not None:
            check.require(check.envelope(params), "envelope, use --force to skip")

    _say(args, "Designing filter...")
    poly = halfband_power(params)
    filt = spectral_factorize(poly)
    env = None
    if args.Kprime is not None:
        _say(args, "Computing decay envelope...")
        env = feasibility_envelope(params, J1=args.J1, strict=not args.force)

    _say(args, "Exporting...")
    name = f"K{args.K}_L{args.L}"
    convert.write_json(
        os.path.join(config.out_dir, f"filter_{name}.json"), filter_to_dict(filt, poly, env), "filter", echo(config)
    )
    if env is not None:
        name = f"{name}_Kp{args.Kprime}"
        convert.write_json(
            os.path.join(config.out_dir, f"envelope_{name}.json"), env._asdict(), "envelope", echo(config)
        )
    if args.cascade_levels:
        df = set_type.phi_samples(cascade_table(filt, args.cascade_levels))
        convert.write_csv(os.path.join(config.out_dir, f"phi_{name}.csv"), df, echo(config))
    if args.envelope_points:
        if env is None:
            raise ParameterError("--envelope-points needs --Kprime")
        xi = np.linspace(0.0, 4.0 * env.q / (2 * math.pi), args.envelope_points)
        df = set_type.envelope_samples(envelope_table(make_profile(params), env, xi))
        convert.write_csv(os.path.join(config.out_dir, f"envelope_samples_{name}.csv"), df, echo(config))
    _say(args, "Done!")


def cmd_certify(args, config):
    if args.table1:
        _say(args, "Certifying table rows...")
        df = set_type.table1(
            table1(
                J0=args.J0,
                J1=args.J1,
                gamma_points=args.gamma_points,
                threads=config.threads,
                progress=not args.quiet,
            )
        )
        _say(args, "Exporting...")
        convert.write_csv(os.path.join(config.out_dir, "table1.csv"), df, echo(config))
        for row in df.itertuples(index=False):
            _say(args, f"K={row.K} L={row.L} c=({row.c1}, {row.c2}) K'={row.Kprime_pair}: {row.ratio:.4f} (printed {row.printed_ratio})")
        _say(args, "Done!")
        return

    if args.K is None or args.L is None:
        raise ParameterError("--K and --L are required unless --table1 is given")
    params = FilterParams(args.K, args.L)
    param_set = FeasibleParamSet(c=(args.c1, args.c2))
    name = f"K{args.K}_L{args.L}_c{args.c1:g}_{args.c2:g}"
    if args.search:
        _say(args, "Searching K' pairs...")
        search = kprime_search(
            params,
            param_set,
            J0=args.J0,
            J1=args.J1,
            gamma_points=args.gamma_points,
            threads=config.threads,
            progress=not args.quiet,
            capped=not args.ceil_sectors,
        )
        certificate = search.certificate
        if args.plane == "full":
            certificate = certify(
                params, search.pair, param_set, args.J0, args.J1, args.gamma_points,
                plane="full", capped=not args.ceil_sectors,
            )
        convert.write_csv(
            os.path.join(config.out_dir, f"scanned_{name}.csv"), set_type.scanned_pairs(search.scanned), echo(config)
        )
    else:
        _say(args, "Certifying...")
        certificate = certify(
            params, args.kprime_pair, param_set, args.J0, args.J1, args.gamma_points,
            plane=args.plane, capped=not args.ceil_sectors,
        )

    _say(args, "Exporting...")
    record = certificate_to_dict(certificate)
    if args.format == "csv":
        convert.write_csv(
            os.path.join(config.out_dir, f"certificate_{name}.csv"), set_type.certificates([record]), echo(config)
        )
    else:
        convert.write_json(os.path.join(config.out_dir, f"certificate_{name}.json"), record, "certificate", echo(config))
    if not certificate.valid:
        # the invalid certificate stays on disk for inspection
        raise NotCertifiableError(
            f"not certifiable: R~ = {certificate.R_tilde:.6g} >= L~_inf = {certificate.L_inf_tilde:.6g}"
            f" for c = ({args.c1}, {args.c2})",
            certificate,
        )
    _say(args, f"B/A <= {certificate.ratio:.6g} with K' pair {certificate.kprime_pair}")
    _say(args, "Done!")


def cmd_transform(args, config):
    if args.image is not None:
        image = convert.read_image(args.image)
        system = _build_system(args, size=image.shape[0])
        _say(args, "Analyzing...")
        coeffs = analyze(system, image)
        stem = os.path.splitext(os.path.basename(args.image))[0]
        path = os.path.join(config.out_dir, stem + COEFFICIENT_SUFFIX)
        convert.write_coefficients(path, system, coeffs, echo(config))
        summary = {"coefficients": coeffs.count, "energy": float(np.sum(coeffs.flatten() ** 2))}
    else:
        coeffs = convert.read_coefficients(args.coefficients)
        system = system_from_header(coeffs.header)
        _say(args, "Synthesizing...")
        image, info = reconstruct(system, coeffs, tol=args.tol, info=True)
        stem = os.path.splitext(os.path.basename(args.coefficients))[0]
        path = os.path.join(config.out_dir, stem + ".npy")
        np.save(path, image)
        summary = {"iterations": info.iterations, "residual": info.residual}

    _say(args, "Exporting...")
    convert.write_json(
        os.path.join(config.out_dir, f"{stem}_transform.json"),
        {"command": "transform", "outputs": [os.path.basename(path)], "system": system.header, "summary": summary},
        "manifest",
        echo(config),
    )
    _say(args, "Done!")


def cmd_roundtrip(args, config):
    if args.image is not None:
        images = [convert.read_image(args.image)]
    else:
        if args.ntrials < 1:
            raise ParameterError("--ntrials must be >= 1")
        rng = np.random.default_rng(args.seed)
        images = [rng.standard_normal((args.size, args.size)) for _ in range(args.ntrials)]
    system = _build_system(args, size=images[0].shape[0])

    trials = []
    for trial, image in enumerate(tqdm(images, disable=args.quiet, desc="trials")):
        result, info = reconstruct(system, analyze(system, image), tol=args.tol, info=True)
        error = float(np.linalg.norm(result - image) / np.linalg.norm(image))
        trials.append({"trial": trial, "relative_error": error, "iterations": info.iterations})
        _say(args, f"trial {trial}: relative error {error:.3e} after {info.iterations} CG iterations")

    summary = {"max_relative_error": max(t["relative_error"] for t in trials), "trials": trials}
    convert.write_json(
        os.path.join(config.out_dir, "roundtrip.json"),
        {"command": "roundtrip", "outputs": [], "system": system.header, "summary": summary},
        "manifest",
        echo(config),
    )


def cmd_bench(args, config):
    seeds = range(args.seed, args.seed + args.ntrials)
    _say(args, "Running benchmark...")
    curves, slopes = run_bench(
        FilterParams(args.K, args.L),
        FeasibleParamSet(c=(args.c1, args.c2)),
        seeds=seeds,
        size=args.size,
        nu=args.nu,
        rho0=args.rho0,
        N_list=args.n_list,
        N_range=args.n_range,
        smooth_only=args.smooth_only,
        threads=config.threads,
        progress=not args.quiet,
    )

    _say(args, "Exporting...")
    curves = set_type.decay_curve(curves)
    slopes = set_type.slopes(slopes)
    outputs = ["decay.csv", "slopes.csv"]
    convert.write_csv(os.path.join(config.out_dir, "decay.csv"), curves, echo(config))
    convert.write_csv(os.path.join(config.out_dir, "slopes.csv"), slopes, echo(config))
    if args.svg:
        plot_decay(curves, os.path.join(config.out_dir, "decay.svg"))
        outputs.append("decay.svg")

    summary = summarize_slopes(slopes)
    summary.columns = ["_".join(col).strip("_") for col in summary.columns]
    convert.write_json(
        os.path.join(config.out_dir, "bench.json"),
        {"command": "bench", "outputs": outputs, "summary": {"slopes": summary.to_dict(orient="records")}},
        "manifest",
        echo(config),
    )
    for row in summary.itertuples(index=False):
        _say(args, f"{row.system}: mean slope {row.slope_mean:.3f}, deflated {row.deflated_slope_mean:.3f}")
    _say(args, "Done!")


def cmd_validate(args, config):
    schema = load_schema(args.schema)
    if args.path.endswith(".json"):
        validate_json_file(args.path, schema)
        reports = []
    else:
        reports = validate_csv_file(
            args.path,
            schema,
            chunk_size=args.chunk_size,
            processes=config.threads,
            max_fails=args.max_fails,
            progress=not args.quiet,
        )
    for report in reports:
        tqdm.write(report)
        tqdm.write("")
    if reports:
        raise ArtifactSchemaError(f"{args.path} does not satisfy {args.schema}")
    _say(args, f"{args.path} is valid")


def system_from_header(header):
    """Rebuild the shearlet system described by a coefficient file header

    Raises:
        ArtifactError: if the header does not describe a shearlet system
    """
    if header.get("kind") != "shearlet":
        raise ArtifactError(f"cannot rebuild a {header.get('kind')!r} system")
    try:
        shears = ShearSet(header["shears"]["kind"], tuple(header["shears"]["values"]))
        return build_system(
            FilterParams(header["K"], header["L"]),
            FeasibleParamSet(shears=shears, c=tuple(header["c"])),
            size=header["size"],
            j_max=header["j_max"],
            J_trunc=header["J_trunc"],
        )
    except KeyError as e:
        raise ArtifactError(f"coefficient header misses {e}")


def plot_decay(curves, path):
    """Log-log decay curves, one line per seed and system, as SVG"""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "conelet"
    fig, ax = plt.subplots(figsize=(6, 4))
    colors = {"shearlet": "tab:blue", "wavelet": "tab:orange"}
    for (seed, system), curve in curves.groupby(["seed", "system"], sort=True):
        label = system if seed == curves["seed"].min() else None
        ax.loglog(curve["N"], curve["err"], color=colors.get(system, "k"), alpha=0.7, label=label)
    ax.set_xlabel("N")
    ax.set_ylabel("squared L2 error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _build_system(args, size):
    return build_system(
        FilterParams(args.K, args.L),
        FeasibleParamSet(c=(args.c1, args.c2)),
        size=size,
        j_max=args.jmax,
    )


def _filter_arguments(parser, required, K=None, L=None):
    parser.add_argument("--K", type=int, required=required, default=K, help="Order of the zero at 1/2")
    parser.add_argument("--L", type=int, required=required, default=L, help="Flatness order at 0")


def _sampling_arguments(parser):
    parser.add_argument("--c1", type=float, default=1.0, help="Sampling step along the cone axis")
    parser.add_argument("--c2", type=float, default=1.0, help="Sampling step across the cone axis")


def _system_arguments(parser):
    _filter_arguments(parser, required=False, K=39, L=18)
    _sampling_arguments(parser)
    parser.add_argument("--jmax", type=int, help="Number of scales, log2(size) - 3 by default")


def _pair(text):
    values = _int_list(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"expected two integers a,b, got {text!r}")
    return values


def _int_list(text):
    try:
        return tuple(int(value) for value in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")


def _say(args, message):
    if not args.quiet:
        tqdm.write(message)


if __name__ == "__main__":
    sys.exit(main())
