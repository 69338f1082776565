"""Command-line front end.

Every command is deterministic given its flags (all randomness flows from
--seed, with per-stage sub-seeds derived as [seed, stage]).  On failure,
partially written outputs are removed and the exit code is nonzero.
"""

import contextlib
import json
import os
import sys

import click
import numpy as np

from . import imagecore, inverseapps, reconstructor, sampler, speczones, transforms

NOISE_SUBSEED = 1
SPECTRUM_SUBSEED = 2


@contextlib.contextmanager
def _outputs(*paths):
    """Remove the named output files if the wrapped block raises."""
    paths = [p for p in paths if p]
    try:
        yield
    except Exception as exc:
        for p in paths:
            with contextlib.suppress(OSError):
                os.remove(p)
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


def _write_mask_pgm(mask, path):
    imagecore.write_pgm(np.where(mask, 255.0, 0.0), path)


def _read_mask_pgm(path):
    return imagecore.read_pgm(path) > 127


def _zone_options(fn):
    fn = click.option("--shape", "family", default="ellipse",
                      type=click.Choice(speczones.FAMILIES), show_default=True,
                      help="Spectral zone family.")(fn)
    fn = click.option("--aspect", default=1.0, show_default=True,
                      help="Vertical/horizontal extent ratio of the zone.")(fn)
    fn = click.option("--exponent", default=3.0, show_default=True,
                      help="Super-ellipse exponent.")(fn)
    fn = click.option("--theta", default=0.0, show_default=True,
                      help="Rotation in radians (centered zones only).")(fn)
    return fn


def _resolve_zone(img, family, fraction, rms_target, aspect, exponent, theta):
    """Zone mask from an explicit fraction or fitted to an RMS target."""
    H, W = img.shape
    if fraction is not None:
        shape = speczones.fit_shape_to_fraction(
            family, fraction, aspect, exponent, theta, H=H, W=W)
    elif rms_target is not None:
        shape = speczones.fit_zone_to_rms(img, rms_target, family, aspect, exponent)
    else:
        raise click.UsageError("either --fraction or --rms-target is required")
    return shape, speczones.build_zone_mask(shape, H, W)


@click.group()
@click.version_option()
def main():
    """Sample images near the minimal rate and reconstruct them by bounding
    their spectrum to a compact zone."""


# ---------------------------------------------------------------------------


@main.command()
@click.argument("input_pgm", type=click.Path(exists=True, dir_okay=False))
@click.option("--rms-target", type=float, default=None,
              help="Report the minimal coefficient count for this RMS.")
@click.option("--energy", type=float, default=None,
              help="Instead report the minimal centered zone holding this "
                   "energy fraction after apodization.")
@click.option("--aspect", default=1.0, show_default=True)
@click.option("--flat-radius", default=0.6, show_default=True,
              help="Apodization flat radius (energy mode).")
@click.option("--apodize/--no-apodize", "do_apodize", default=True,
              show_default=True, help="Window the image before energy analysis.")
@click.option("--map", "map_path", type=click.Path(dir_okay=False), default=None,
              help="Write the sparse-spectrum map (white dots) as PGM.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None,
              help="Write the kept coefficients as CSV.")
def analyze(input_pgm, rms_target, energy, aspect, flat_radius, do_apodize,
            map_path, csv_path):
    """Sparse-spectrum / energy-zone analysis of an image."""
    with _outputs(map_path, csv_path):
        img = imagecore.read_pgm(input_pgm)
        if energy is not None:
            if not 0.0 < energy <= 1.0:
                raise ValueError(f"--energy must be in (0, 1], got {energy}")
            apod = transforms.apodize(img, flat_radius, 1.0) if do_apodize else img
            spec = transforms.dft2(apod)
            shape = speczones.ZoneShape("ellipse", 1.0, aspect, anchor="centered")
            lo, hi = 0.0, 2.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                m = speczones._membership(shape, mid, *img.shape)
                if speczones.energy_fraction_in_mask(spec, m) < energy:
                    lo = mid
                else:
                    hi = mid
            m = speczones._membership(shape, hi, *img.shape)
            frac = speczones.mask_fraction(m)
            click.echo(json.dumps({
                "energy_fraction": energy,
                "zone_fraction": frac,
                "zone_coefficients": int(np.count_nonzero(m)),
            }))
            if map_path:
                _write_mask_pgm(m, map_path)
            return
        if rms_target is None:
            raise click.UsageError("either --rms-target or --energy is required")
        rep = speczones.sparse_spectrum(img, rms_target)
        summary = {"K": rep.K, "sparsity": rep.sparsity,
                   "achieved_rms": rep.achieved_rms, "rms_target": rms_target}
        click.echo(json.dumps(summary))
        if map_path:
            dots = np.zeros(img.shape, dtype=bool)
            dots[rep.kept_indices[:, 0], rep.kept_indices[:, 1]] = True
            _write_mask_pgm(dots, map_path)
        if csv_path:
            spec = transforms.dct2(img)
            with open(csv_path, "w", newline="\n") as fh:
                fh.write("# " + json.dumps(summary) + "\n")
                fh.write("row,col,energy\n")
                for r, c in rep.kept_indices:
                    fh.write(f"{r},{c},{float(spec[r, c]) ** 2!r}\n")


@main.command()
@_zone_options
@click.option("--fraction", type=float, default=None, help="Target area fraction.")
@click.option("--rms-target", type=float, default=None,
              help="Fit the zone to an image's tail RMS instead (needs --image).")
@click.option("--image", "image_path", type=click.Path(exists=True, dir_okay=False),
              default=None)
@click.option("--anchor", default="dc_corner", show_default=True,
              type=click.Choice(speczones.ANCHORS))
@click.option("--height", default=512, show_default=True)
@click.option("--width", default=512, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True,
              help="Output mask PGM (255 inside the zone).")
def fitzone(family, aspect, exponent, theta, fraction, rms_target, image_path,
            anchor, height, width, out_path):
    """Fit a zone shape and write its binary mask."""
    with _outputs(out_path):
        if image_path and rms_target is not None:
            img = imagecore.read_pgm(image_path)
            shape = speczones.fit_zone_to_rms(img, rms_target, family, aspect, exponent)
            height, width = img.shape
        elif fraction is not None:
            shape = speczones.fit_shape_to_fraction(
                family, fraction, aspect, exponent, theta, anchor, H=height, W=width)
        else:
            raise click.UsageError("need --fraction, or --image with --rms-target")
        mask = speczones.build_zone_mask(shape, height, width)
        _write_mask_pgm(mask, out_path)
        click.echo(json.dumps({"family": shape.family,
                               "achieved_fraction": shape.achieved_fraction,
                               "scale": shape.scale}))


@main.command()
@click.argument("input_pgm", type=click.Path(exists=True, dir_okay=False))
@click.option("--grid", default="jitter", show_default=True,
              type=click.Choice(sorted(sampler.GENERATORS)))
@click.option("--fraction", type=float, default=None,
              help="Sample count as a fraction of the pixel count.")
@click.option("--count", type=int, default=None, help="Explicit sample count M.")
@click.option("--multiplier", default=1.0, show_default=True,
              help="Oversampling multiplier applied to the fraction.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
def sample(input_pgm, grid, fraction, count, multiplier, seed, out_path):
    """Generate a sampling grid and extract samples to CSV."""
    with _outputs(out_path):
        img = imagecore.read_pgm(input_pgm)
        n = img.size
        if count is None:
            if fraction is None:
                raise click.UsageError("either --fraction or --count is required")
            count = int(round(multiplier * fraction * n))
        samples = sampler.generate_samples(img, grid, count, seed)
        sampler.write_samples_csv(samples, out_path)
        click.echo(json.dumps({"M": samples.M, "N": n, "grid": grid, "seed": seed}))


@main.command()
@click.argument("samples_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--mask", "mask_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="Zone mask PGM.")
@click.option("--iters", default=1000, show_default=True)
@click.option("--stop-delta", default=1e-4, show_default=True)
@click.option("--truth", "truth_path", type=click.Path(exists=True, dir_okay=False),
              default=None)
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), default=None)
@click.option("--final-projection", is_flag=True,
              help="Append one spectral projection for a strictly bounded output.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
def reconstruct(samples_csv, mask_path, iters, stop_delta, truth_path, trace_path,
                final_projection, out_path):
    """Iterative bounded-spectrum reconstruction from a sample CSV."""
    with _outputs(out_path, trace_path):
        samples = sampler.read_samples_csv(samples_csv)
        mask = _read_mask_pgm(mask_path)
        truth = imagecore.read_pgm(truth_path) if truth_path else None
        out, trace = reconstructor.gp_reconstruct(
            samples, mask, max_iters=iters, ground_truth=truth,
            stop_delta=stop_delta, final_projection=final_projection)
        imagecore.write_pgm(out, out_path)
        if trace_path:
            trace.write_csv(trace_path)
        result = {"iterations": trace.iterations[-1], "delta_rms": trace.delta_rms[-1]}
        if truth is not None:
            r = imagecore.rms_error(out, truth)
            result.update(rms=r, psnr_db=imagecore.psnr(r))
        click.echo(json.dumps(result))


@main.command()
@click.argument("input_pgm", type=click.Path(exists=True, dir_okay=False))
@_zone_options
@click.option("--fraction", type=float, default=None, help="Zone area fraction.")
@click.option("--rms-target", type=float, default=None,
              help="Fit the zone to this RMS target instead of --fraction.")
@click.option("--grid", default="jitter", show_default=True,
              type=click.Choice(sorted(sampler.GENERATORS)))
@click.option("--seed", default=0, show_default=True)
@click.option("--multiplier", default=1.0, show_default=True)
@click.option("--iters", default=1000, show_default=True)
@click.option("--stop-delta", default=1e-4, show_default=True)
@click.option("--add-noise", "noise_sigma", type=float, default=None,
              help="Add seeded Gaussian noise before sampling.")
@click.option("--trace", "trace_name", is_flag=True, help="Also write the trace CSV.")
@click.option("--out-prefix", required=True)
def pipeline(input_pgm, family, aspect, exponent, theta, fraction, rms_target,
             grid, seed, multiplier, iters, stop_delta, noise_sigma, trace_name,
             out_prefix):
    """Full sample-and-reconstruct experiment with redundancy accounting.

    Writes PREFIX_samples.csv, PREFIX_mask.pgm, PREFIX_recon.pgm,
    PREFIX_errmap.pgm and optionally PREFIX_trace.csv, then prints the
    summary both as JSON and as one CSV row.
    """
    paths = {k: f"{out_prefix}_{k}" for k in
             ("samples.csv", "mask.pgm", "recon.pgm", "errmap.pgm", "trace.csv")}
    if not trace_name:
        paths.pop("trace.csv")
    with _outputs(*paths.values()):
        img = imagecore.read_pgm(input_pgm)
        n = img.size
        shape, mask = _resolve_zone(img, family, fraction, rms_target,
                                    aspect, exponent, theta)
        fr = shape.achieved_fraction

        measured = img
        if noise_sigma is not None:
            rng = np.random.default_rng([seed, NOISE_SUBSEED])
            measured = img + rng.normal(0.0, noise_sigma, img.shape)

        m = int(round(multiplier * fr * n))
        samples = sampler.generate_samples(measured, grid, m, seed)
        out, trace = reconstructor.gp_reconstruct(
            samples, mask, max_iters=iters, ground_truth=img,
            stop_delta=stop_delta)

        rms = imagecore.rms_error(out, img)
        target = rms_target if rms_target is not None else rms
        rep = speczones.sparse_spectrum(img, target)
        ec_red = speczones.ec_zone_redundancy(fr, rep.sparsity)
        summary = {
            "fraction": fr,
            "sparsity": rep.sparsity,
            "ec_zone_redundancy": ec_red,
            "sampling_redundancy": multiplier,
            "overall_redundancy": multiplier * ec_red,
            "rms": rms,
            "psnr_db": imagecore.psnr(rms),
            "iterations": trace.iterations[-1],
        }

        sampler.write_samples_csv(samples, paths["samples.csv"])
        _write_mask_pgm(mask, paths["mask.pgm"])
        imagecore.write_pgm(out, paths["recon.pgm"])
        imagecore.write_pgm(np.abs(out - img) * 8.0, paths["errmap.pgm"])
        if trace_name:
            trace.write_csv(paths["trace.csv"])

        click.echo(json.dumps(summary))
        cols = list(summary)
        click.echo(",".join(cols))
        click.echo(",".join(repr(summary[c]) for c in cols))


@main.command()
@click.argument("input_pgm", type=click.Path(exists=True, dir_okay=False))
@click.option("--occlusion", "occl_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="PGM, 255 = observed, 0 = occluded.")
@click.option("--zone", "zone_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Zone mask PGM; fitted from --fraction if omitted.")
@_zone_options
@click.option("--fraction", type=float, default=None)
@click.option("--iters", default=1000, show_default=True)
@click.option("--truth", "truth_path", type=click.Path(exists=True, dir_okay=False),
              default=None)
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), default=None)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
def inpaint(input_pgm, occl_path, zone_path, family, aspect, exponent, theta,
            fraction, iters, truth_path, trace_path, out_path):
    """In-paint occluded pixels by bounded-spectrum reconstruction."""
    with _outputs(out_path, trace_path):
        img = imagecore.read_pgm(input_pgm)
        occ = _read_mask_pgm(occl_path)
        if zone_path:
            zone = _read_mask_pgm(zone_path)
        else:
            _, zone = _resolve_zone(img, family, fraction, None, aspect,
                                    exponent, theta)
        truth = imagecore.read_pgm(truth_path) if truth_path else None
        out, trace = inverseapps.inpaint(img, occ, zone, max_iters=iters,
                                         ground_truth=truth)
        imagecore.write_pgm(out, out_path)
        if trace_path:
            trace.write_csv(trace_path)
        result = {"iterations": trace.iterations[-1]}
        if truth is not None:
            r = imagecore.rms_error(out, truth)
            result.update(rms=r, psnr_db=imagecore.psnr(r))
        click.echo(json.dumps(result))


@main.command()
@click.argument("input_pgm", type=click.Path(exists=True, dir_okay=False))
@click.option("--support", default=0.35, show_default=True,
              help="Image support circle radius as a fraction of the side.")
@click.option("--bound", default=1.0, show_default=True,
              help="Spectral bounding circle radius fraction.")
@click.option("--seed", default=0, show_default=True)
@click.option("--iters", default=100, show_default=True)
@click.option("--samples", "samples_path", type=click.Path(dir_okay=False),
              default=None, help="Write the spectrum samples as CSV.")
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), default=None)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
def specrecon(input_pgm, support, bound, seed, iters, samples_path, trace_path,
              out_path):
    """Reconstruct an image from its sparsely sampled Fourier spectrum."""
    with _outputs(out_path, trace_path, samples_path):
        img = imagecore.read_pgm(input_pgm)
        H, W = img.shape
        rate = inverseapps.sampling_rate(support, H, W)
        click.echo(json.dumps({"sampling_rate": rate}))
        ss = inverseapps.spectral_sample(img, support, bound,
                                         seed=[seed, SPECTRUM_SUBSEED])
        truth = img * inverseapps.support_circle(H, W, support)
        out, trace = inverseapps.spectral_reconstruct(ss, max_iters=iters,
                                                      ground_truth=truth)
        imagecore.write_pgm(out, out_path)
        if samples_path:
            with open(samples_path, "w", newline="\n") as fh:
                fh.write(f"# {H} {W} {ss.M} {support!r} {bound!r} {seed}\n")
                fh.write("row,col,re,im\n")
                for (r, c), v in zip(ss.positions, ss.values):
                    fh.write(f"{r},{c},{float(v.real)!r},{float(v.imag)!r}\n")
        if trace_path:
            trace.write_csv(trace_path)
        r = imagecore.rms_error(out, truth)
        click.echo(json.dumps({"M": ss.M, "rms": r, "psnr_db": imagecore.psnr(r)}))


@main.command()
@click.argument("input_pgm", type=click.Path(exists=True, dir_okay=False))
@click.option("--occlusion", "occl_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="Binary mask PGM, 255 = transparent.")
@click.option("--zone", "zone_path", type=click.Path(exists=True, dir_okay=False),
              default=None)
@_zone_options
@click.option("--fraction", type=float, default=None)
@click.option("--iters1", default=1000, show_default=True,
              help="Phase-retrieval iterations.")
@click.option("--iters2", default=500, show_default=True,
              help="In-painting iterations.")
@click.option("--stage1-only", is_flag=True)
@click.option("--stage1-out", type=click.Path(dir_okay=False), default=None)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
def phaserec(input_pgm, occl_path, zone_path, family, aspect, exponent, theta,
             fraction, iters1, iters2, stage1_only, stage1_out, out_path):
    """Recover an image from the Fourier modulus of its occluded version.

    The modulus is computed here from INPUT occluded by the mask; stage 1
    retrieves the occluded image from that modulus, stage 2 in-paints it.
    """
    with _outputs(out_path, stage1_out):
        img = imagecore.read_pgm(input_pgm)
        occ = _read_mask_pgm(occl_path)
        if occ.shape != img.shape:
            raise ValueError("occlusion mask does not match image dimensions")
        modulus = np.abs(transforms.dft2(img * occ))
        stage1 = inverseapps.phase_retrieve_masked(modulus, occ, max_iters=iters1)
        r1 = imagecore.rms_error(stage1, img * occ)
        result = {"stage1_rms": r1, "stage1_psnr_db": imagecore.psnr(r1)}
        if stage1_only:
            imagecore.write_pgm(stage1, out_path)
        else:
            if zone_path:
                zone = _read_mask_pgm(zone_path)
            else:
                _, zone = _resolve_zone(img, family, fraction, None, aspect,
                                        exponent, theta)
            out, _, _ = inverseapps.phase_retrieve_full(
                modulus, occ, zone, iters1=iters1, iters2=iters2)
            imagecore.write_pgm(out, out_path)
            r = imagecore.rms_error(out, img)
            result.update(rms=r, psnr_db=imagecore.psnr(r))
        if stage1_out:
            imagecore.write_pgm(stage1, stage1_out)
        click.echo(json.dumps(result))


@main.command()
@click.argument("sparsity", type=float, required=False)
@click.option("--sweep", nargs=3, type=float, default=None,
              help="LO HI N: log-spaced sweep, emits CSV sparsity,redundancy.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
def csbound(sparsity, sweep, out_path):
    """Required oversampling factor when coefficient positions are unknown."""
    with _outputs(out_path):
        if sweep:
            lo, hi, n = sweep
            values = np.geomspace(lo, hi, int(n))
            lines = ["sparsity,redundancy"]
            for s in values:
                r = speczones.cs_required_redundancy(float(s)).redundancy
                lines.append(f"{float(s)!r},{r!r}")
            text = "\n".join(lines) + "\n"
            if out_path:
                with open(out_path, "w", newline="\n") as fh:
                    fh.write(text)
            else:
                click.echo(text, nl=False)
        elif sparsity is not None:
            bound = speczones.cs_required_redundancy(sparsity)
            click.echo(json.dumps({"sparsity": sparsity,
                                   "redundancy": bound.redundancy,
                                   "clamped": bound.clamped}))
        else:
            raise click.UsageError("give a sparsity value or --sweep LO HI N")


if __name__ == "__main__":
    main()
