"""
Command-line entry point.

    python cli.py align ref.png slave1.png slave2.png -o out/
    python cli.py synth input.png --theta 5 --tx 10 --ty 30 --ev -2 -o pair/
    python cli.py eval out/report.txt pair/input_synth_truth.txt --plot eval.html

Exit status: 0 on success, 1 on usage errors, 2 on processing errors.
"""
import logging
import os
import sys
from dataclasses import replace

import click
import numpy as np
import pandas as pd

from align import align_stack, code_image
from coder import to_decimal
from config import get_align_config, get_default_jobs, get_output_dir
from data_validation import ImageReadError, ValidationError
from data_visualization import write_dashboard
from evaluation import errors_table, mutual_information, summarize_errors, synth_exposure, synth_warp
from image_core import invert_motion, to_luminance, warp_euclidean
from image_io import output_path, read_image, write_image
from imf import estimate_imf, compute_thresholds, normalize, order_by_exposure
from model import CoderKind, Motion, NormalizationMode
from report import RunReport, SlaveRecord, TOOL_NAME, __version__, read_report, read_truth, write_report, write_truth

logger = logging.getLogger(__name__)

PROCESSING_ERROR = 2
USAGE_ERROR = 1


class ProcessingError(click.ClickException):
    exit_code = PROCESSING_ERROR


def _load_gray(path):
    try:
        return to_luminance(read_image(path))
    except (ImageReadError, ValidationError) as e:
        raise ProcessingError(str(e)) from e


def _dump_codes(img, cfg, path):
    """Write the decimal LBP code image of a luminance image as PGM"""
    coder = cfg.coder if cfg.coder is not CoderKind.MTB else CoderKind.LBP_GT
    planes = code_image(img, replace(cfg, coder=coder))
    return write_image(path, to_decimal(planes))


def _slave_record(reference, slave, slave_path, output, result):
    aligned, mask = warp_euclidean(slave, invert_motion(result.motion))
    return SlaveRecord.from_result(
        slave_path,
        output,
        result,
        mi_before=mutual_information(reference, slave),
        mi_after=mutual_information(reference, aligned, mask),
    )


@click.group()
@click.version_option(__version__, prog_name=TOOL_NAME)
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for per-iteration detail.")
def cli(verbose):
    """Align differently exposed photographs of the same scene."""
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s", force=True)


def _align_options(func):
    options = [
        click.option("--coder", type=click.Choice([k.value for k in CoderKind]), default=None,
                     help="Binary descriptor (default lbp)."),
        click.option("--levels", type=click.IntRange(min=1), default=None, help="Maximum pyramid levels."),
        click.option("--alpha", type=click.IntRange(0, 255), default=None, help="Under-exposure level."),
        click.option("--beta", type=click.IntRange(0, 255), default=None, help="Over-exposure level."),
        click.option("--max-iters", type=click.IntRange(min=1), default=None, help="Iterations per level."),
        click.option("--no-init", is_flag=True, help="Skip the coarse rotation and shift search."),
        click.option("--normalization", type=click.Choice([m.value for m in NormalizationMode]), default=None,
                     help="Exposure normalization before coding."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _config(coder, levels, alpha, beta, max_iters, no_init, normalization):
    try:
        return get_align_config(
            coder=coder,
            max_pyramid_levels=levels,
            alpha=alpha,
            beta=beta,
            max_iters_per_level=max_iters,
            use_histogram_init=False if no_init else None,
            normalization=normalization,
        )
    except ValidationError as e:
        raise click.UsageError(str(e)) from e


@cli.command("align")
@click.argument("reference", type=click.Path(dir_okay=False))
@click.argument("slaves", type=click.Path(dir_okay=False), nargs=-1, required=True)
@click.option("-o", "--output-dir", default=None, help="Output directory (env EXPOSURE_ALIGN_OUTPUT_DIR).")
@click.option("--report", "report_name", default="report.txt", show_default=True, help="Report file name.")
@click.option("--codes", is_flag=True, help="Also dump the decimal LBP images as PGM.")
@click.option("--jobs", type=int, default=None, help="Slaves aligned concurrently (env EXPOSURE_ALIGN_JOBS).")
@_align_options
def align_command(reference, slaves, output_dir, report_name, codes, jobs, **options):
    """Align SLAVES to REFERENCE and write *_aligned.png plus a report."""
    cfg = _config(**options)
    logger.debug("Configuration: %s", cfg.to_dict())
    output_dir = get_output_dir(output_dir)
    jobs = jobs if jobs is not None else get_default_jobs()

    ref_img = _load_gray(reference)
    slave_imgs = [_load_gray(path) for path in slaves]
    for path, img in zip(slaves, slave_imgs):
        if img.shape != ref_img.shape:
            raise ProcessingError(f"{path} is {img.shape[1]}x{img.shape[0]} but the reference is "
                                  f"{ref_img.shape[1]}x{ref_img.shape[0]}")

    click.echo(f"Aligning {len(slaves)} image(s) to {reference}...", err=True)
    try:
        results = align_stack(ref_img, slave_imgs, cfg, n_jobs=jobs)
    except ValidationError as e:
        raise ProcessingError(str(e)) from e

    report = RunReport(reference=reference, config=cfg.to_dict())
    for path, slave, (result, aligned) in zip(slaves, slave_imgs, results):
        target = write_image(output_path(output_dir, path, "_aligned"), aligned)
        if codes:
            _dump_codes(aligned, cfg, output_path(output_dir, path, "_codes", ".pgm"))
        report.records.append(_slave_record(ref_img, slave, path, target, result))
        click.echo(
            f"  {path}: theta={result.motion.degrees:.3f} deg tx={result.motion.tx:.2f} "
            f"ty={result.motion.ty:.2f} converged={result.converged}",
            err=True,
        )
    if codes:
        _dump_codes(ref_img, cfg, output_path(output_dir, reference, "_codes", ".pgm"))

    report_path = write_report(os.path.join(output_dir, report_name), report)
    click.echo(f"Report written to {report_path}", err=True)


@cli.command("normalize")
@click.argument("z1", type=click.Path(dir_okay=False))
@click.argument("z2", type=click.Path(dir_okay=False))
@click.option("-o", "--output-dir", default=None, help="Output directory.")
@click.option("--alpha", type=click.IntRange(0, 255), default=None)
@click.option("--beta", type=click.IntRange(0, 255), default=None)
@click.option("--normalization", type=click.Choice([m.value for m in NormalizationMode]), default=None)
@click.option("--codes", is_flag=True, help="Also dump the decimal LBP images as PGM.")
def normalize_command(z1, z2, output_dir, alpha, beta, normalization, codes):
    """Write the saturation-synchronized pair *_norm.png."""
    cfg = _config(None, None, alpha, beta, None, False, normalization)
    output_dir = get_output_dir(output_dir)
    img1, img2 = _load_gray(z1), _load_gray(z2)

    long_img, short_img, swapped = order_by_exposure(img1, img2)
    try:
        pair = normalize(long_img, short_img, cfg.normalization, cfg.alpha, cfg.beta)
    except ValidationError as e:
        raise ProcessingError(str(e)) from e
    hat1, hat2 = (pair.z2_hat, pair.z1_hat) if swapped else (pair.z1_hat, pair.z2_hat)

    for path, img in ((z1, hat1), (z2, hat2)):
        write_image(output_path(output_dir, path, "_norm"), img)
        if codes:
            _dump_codes(img, cfg, output_path(output_dir, path, "_codes", ".pgm"))
    click.echo(f"zeta1={pair.thresholds.zeta1} zeta2={pair.thresholds.zeta2} swapped={str(swapped).lower()}", err=True)


@cli.command("imf")
@click.argument("z1", type=click.Path(dir_okay=False))
@click.argument("z2", type=click.Path(dir_okay=False))
@click.option("-o", "--output-dir", default=None, help="Output directory.")
@click.option("--alpha", type=click.IntRange(0, 255), default=None)
@click.option("--beta", type=click.IntRange(0, 255), default=None)
def imf_command(z1, z2, output_dir, alpha, beta):
    """Dump f12/f21 as imf.csv and the thresholds as thresholds.txt."""
    cfg = _config(None, None, alpha, beta, None, False, None)
    output_dir = get_output_dir(output_dir)
    img1, img2 = _load_gray(z1), _load_gray(z2)
    try:
        f12, f21 = estimate_imf(img1, img2)
        thresholds = compute_thresholds(f12, f21, cfg.alpha, cfg.beta)
    except ValidationError as e:
        raise ProcessingError(str(e)) from e

    os.makedirs(output_dir, exist_ok=True)
    df = pd.DataFrame({"z": np.arange(256), "f12": f12.table.astype(int), "f21": f21.table.astype(int)})
    df.to_csv(os.path.join(output_dir, "imf.csv"), index=False)
    with open(os.path.join(output_dir, "thresholds.txt"), "w") as f:
        f.write("".join(f"{key}={value}\n" for key, value in thresholds.to_dict().items()))
    click.echo(f"IMF written to {output_dir}", err=True)


@cli.command("synth")
@click.argument("input_path", metavar="INPUT", type=click.Path(dir_okay=False))
@click.option("--theta", type=float, default=5.0, show_default=True, help="Rotation in degrees.")
@click.option("--tx", type=float, default=10.0, show_default=True, help="Translation along x in pixels.")
@click.option("--ty", type=float, default=30.0, show_default=True, help="Translation along y in pixels.")
@click.option("--ev", type=click.FloatRange(-4.0, 4.0), default=0.0, show_default=True, help="Exposure shift in stops.")
@click.option("--noise", type=click.FloatRange(min=0.0), default=0.0, show_default=True,
              help="Gaussian sensor noise (intensity levels) added to the slave.")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for the noise generator.")
@click.option("-o", "--output-dir", default=None, help="Output directory.")
def synth_command(input_path, theta, tx, ty, ev, noise, seed, output_dir):
    """Write a reference, a re-exposed and warped slave, and its ground truth."""
    output_dir = get_output_dir(output_dir)
    img = _load_gray(input_path)
    try:
        slave = synth_warp(synth_exposure(img, ev), Motion.from_degrees(theta, tx, ty))
    except ValidationError as e:
        raise ProcessingError(str(e)) from e
    if noise > 0:
        rng = np.random.default_rng(seed)
        slave = np.clip(np.rint(slave + rng.normal(0.0, noise, slave.shape)), 0, 255).astype(np.uint8)

    reference_path = write_image(output_path(output_dir, input_path, "_ref"), img)
    slave_path = write_image(output_path(output_dir, input_path, "_synth"), slave)
    truth_path = output_path(output_dir, input_path, "_synth_truth", ".txt")
    write_truth(truth_path, os.path.basename(slave_path), theta, tx, ty, ev)
    click.echo(f"Wrote {reference_path}, {slave_path} and {truth_path}", err=True)


@cli.command("eval")
@click.argument("report_path", metavar="REPORT", type=click.Path(dir_okay=False))
@click.argument("truth_paths", metavar="TRUTH...", type=click.Path(dir_okay=False), nargs=-1, required=True)
@click.option("--plot", "plot_path", default=None, help="Write HTML charts to this file.")
@click.option("--csv", "csv_path", default=None, help="Write the per-image table as CSV.")
def eval_command(report_path, truth_paths, plot_path, csv_path):
    """Compare a report against ground-truth sidecars."""
    try:
        report = read_report(report_path)
        truths = {}
        for path in truth_paths:
            truth = read_truth(path)
            truth["sequence"] = os.path.basename(os.path.dirname(os.path.abspath(path))) or "default"
            truths[os.path.basename(truth["slave"])] = truth
    except (OSError, ValueError) as e:
        raise ProcessingError(str(e)) from e

    records = []
    for record in report.records:
        values = record.to_dict()
        values["path"] = os.path.basename(record.path)
        records.append(values)
    table = errors_table(records, truths)
    if table.empty:
        raise ProcessingError("No report record matches a ground-truth sidecar")

    click.echo(table.to_string(index=False, float_format=lambda v: f"{v:.3f}"))
    click.echo("")
    click.echo(summarize_errors(table).to_string(index=False, float_format=lambda v: f"{v:.3f}"))

    if csv_path:
        table.to_csv(csv_path, index=False)
    if plot_path:
        write_dashboard(table, plot_path)
        click.echo(f"Charts written to {plot_path}", err=True)


@cli.command("codes")
@click.argument("image_path", metavar="IMAGE", type=click.Path(dir_okay=False))
@click.option("--coder", type=click.Choice([CoderKind.LBP_GT.value, CoderKind.CENSUS_GE.value]), default=None)
@click.option("-o", "--output", "output", default=None, help="Destination PGM (default <stem>_codes.pgm).")
def codes_command(image_path, coder, output):
    """Dump the decimal LBP/census code image of IMAGE as PGM."""
    cfg = _config(coder, None, None, None, None, False, None)
    img = _load_gray(image_path)
    output = output or output_path(get_output_dir(None), image_path, "_codes", ".pgm")
    try:
        _dump_codes(img, cfg, output)
    except ValidationError as e:
        raise ProcessingError(str(e)) from e
    click.echo(f"Codes written to {output}", err=True)


def run(argv):
    """
    Run the command line and return the exit status

    Parameters:
    - argv: argument list without the program name

    Returns:
    - 0 on success, 1 on usage errors, 2 on processing errors
    """
    try:
        status = cli.main(args=list(argv), prog_name=TOOL_NAME, standalone_mode=False)
    except click.UsageError as e:
        e.show()
        if e.ctx is not None:
            click.echo(e.ctx.get_help(), err=True)
        return USAGE_ERROR
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        return USAGE_ERROR
    except (ImageReadError, ValidationError) as e:
        click.echo(f"Error: {e}", err=True)
        return PROCESSING_ERROR
    return status if isinstance(status, int) else 0


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
