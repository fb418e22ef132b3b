"""Command-line interface: each subcommand is a thin shell over one
library call, with NPY files in and NPY/JSON out.

Exit codes: 0 success, 2 bad input data, 3 bad configuration, 4 pipeline
stage failure, 5 provider failure.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .config import PipelineConfig
from .edges import select_best
from .errors import BadConfigError, BadParamsError, RefineError
from .fusion import class_sizes, fuse_or_bypass
from .grid import GridShape, LabelVolume
from .metrics import evaluate
from .nig import hierarchical_denoise
from .npyio import read_array, write_array
from .pipeline import run_pipeline, to_json
from .providers import (
    DirCandidateProvider,
    FileSegProvider,
    ProviderConfig,
)
from .synth import (
    CorruptionSpec,
    PhantomSpec,
    RenderSpec,
    child_seed,
    class_intensity_table,
    corrupt_probmap,
    make_phantom,
    render_candidate,
)


def _guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except RefineError as exc:
            click.echo(f"error[{exc.code}]: {exc}", err=True)
            sys.exit(exc.exit_code)

    return wrapper


def _load_config(path) -> tuple[PipelineConfig, dict | None]:
    """Read the JSON config; returns (pipeline config, providers section)."""
    if path is None:
        return PipelineConfig(), None
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise BadConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise BadConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise BadConfigError(f"config {path} must hold a JSON object")
    providers = data.pop("providers", None)
    return PipelineConfig.from_dict(data), providers


def _parse_floats(text, name) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in str(text).split(","))
    except ValueError as exc:
        raise BadParamsError(f"{name} must be comma-separated numbers") from exc


def _emit(report: dict, out) -> None:
    text = to_json(report)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    click.echo(text, nl=False)


@click.group()
def main():
    """Refine segmentation pseudo-labels without any training: uncertainty
    denoising, edge-guided candidate selection, and size-aware fusion."""


@main.command()
@click.option("--prob", required=True, type=click.Path(), help="Probability map (NPY, classes first).")
@click.option("--config", "config_path", type=click.Path(), help="JSON pipeline config.")
@click.option("--out", required=True, type=click.Path(), help="Denoised labels (NPY).")
@click.option("--emit-entropy", type=click.Path(), help="Also write the voxel entropy field.")
@click.option("--emit-variance", type=click.Path(), help="Also write the variance field.")
@_guard
def denoise(prob, config_path, out, emit_entropy, emit_variance):
    """Entropy + variance denoising of a probability map."""
    cfg, _ = _load_config(config_path)
    p = read_array(prob, "prob")
    result = hierarchical_denoise(p, cfg)
    write_array(result.y_star, out)
    if emit_entropy:
        write_array(result.entropy.voxel_entropy, emit_entropy)
    if emit_variance:
        write_array(result.variance, emit_variance)
    _emit(
        {
            "status": "ok",
            "initial_foreground": result.y_initial.foreground_count(),
            "entropy_refined_foreground": result.y_entropy.foreground_count(),
            "denoised_foreground": result.y_star.foreground_count(),
            "output": str(out),
        },
        None,
    )


@main.command()
@click.option("--condition", required=True, type=click.Path(), help="Condition labels (NPY).")
@click.option("--candidates", "candidates_dir", required=True, type=click.Path(), help="Directory of candidate images (NPY).")
@click.option("--config", "config_path", type=click.Path())
@click.option("--out", type=click.Path(), help="Write the selection report JSON here.")
@_guard
def select(condition, candidates_dir, config_path, out):
    """Score candidates against the condition edges and pick the best."""
    cfg, _ = _load_config(config_path)
    cond = read_array(condition, "labels")
    provider = DirCandidateProvider(candidates_dir)
    images = provider.generate(cond, cfg.n_candidates, cfg.seed)
    best, scores = select_best(images, cond, cfg)
    _emit(
        {
            "status": "ok",
            "best_index": best,
            "scores": [
                {
                    "index": s.index,
                    "score": s.score,
                    "matched": s.matched,
                    "condition_edges": s.condition_edges,
                }
                for s in scores
            ],
        },
        out,
    )


@main.command()
@click.option("--pseudo", required=True, type=click.Path(), help="Refined pseudo-labels (NPY).")
@click.option("--seg", required=True, type=click.Path(), help="Segmentation of the selected candidate (NPY).")
@click.option("--config", "config_path", type=click.Path())
@click.option("--out", required=True, type=click.Path(), help="Fused labels (NPY).")
@_guard
def fuse(pseudo, seg, config_path, out):
    """Size-aware fusion of pseudo-labels with a candidate segmentation."""
    cfg, _ = _load_config(config_path)
    a = read_array(pseudo, "labels")
    b = read_array(seg, "labels")
    classes = max(a.classes, b.classes)
    y_star = LabelVolume(a.values, classes, a.grid)
    seg_ib = LabelVolume(b.values, classes, b.grid)
    stats = class_sizes(y_star)
    fused = fuse_or_bypass(y_star, seg_ib, cfg.fusion_mode)
    write_array(fused, out)
    populated = [c for c, n in stats.counts.items() if n > 0]
    _emit(
        {
            "status": "ok",
            "bypassed": len(populated) == 1,
            "v_min_class": None if len(populated) == 1 else stats.v_min_class,
            "class_counts": {str(c): n for c, n in stats.counts.items()},
            "lambdas": {str(c): l for c, l in stats.lambdas.items()},
            "output": str(out),
        },
        None,
    )


@main.command()
@click.option("--prob", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path())
@click.option("--candidates", "candidates_dir", type=click.Path(), help="Candidate images directory (overrides config providers).")
@click.option("--seg", "seg_dir", type=click.Path(), help="Per-candidate segmentations directory (overrides config providers).")
@click.option("--out", required=True, type=click.Path())
@click.option("--report", "report_path", type=click.Path())
@click.option("--emit-entropy", type=click.Path())
@click.option("--emit-variance", type=click.Path())
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@_guard
def pipeline(prob, config_path, candidates_dir, seg_dir, out, report_path,
             emit_entropy, emit_variance, seed):
    """Denoise, select the best candidate, segment it, fuse, write labels."""
    cfg, providers_data = _load_config(config_path)
    cfg = cfg.override(seed=seed)

    candidate = seg_provider = None
    if providers_data is not None:
        parsed = ProviderConfig.from_dict(providers_data)
        candidate, seg_provider = parsed.candidate, parsed.seg
    if candidates_dir:
        candidate = DirCandidateProvider(candidates_dir)
    if seg_dir:
        seg_provider = FileSegProvider(seg_dir)
    if candidate is None or seg_provider is None:
        raise BadConfigError(
            "no providers: give --candidates/--seg or a 'providers' config section"
        )

    code, report = run_pipeline(
        prob,
        ProviderConfig(candidate, seg_provider),
        cfg,
        out,
        report_path=report_path,
        emit_entropy=emit_entropy,
        emit_variance=emit_variance,
    )
    click.echo(to_json(report), nl=False)
    sys.exit(code)


@main.command()
@click.option("--pred", required=True, type=click.Path())
@click.option("--gt", required=True, type=click.Path())
@click.option("--spacing", default=None, help="Per-axis spacing in mm, e.g. 1.0,1.0,2.5.")
@click.option("--out", type=click.Path(), help="Write the metrics report JSON here.")
@_guard
def metrics(pred, gt, spacing, out):
    """Per-class Dice and average surface distance."""
    a = read_array(pred, "labels")
    b = read_array(gt, "labels")
    classes = max(a.classes, b.classes)
    a = LabelVolume(a.values, classes, a.grid)
    b = LabelVolume(b.values, classes, b.grid)
    sp = None
    if spacing is not None:
        sp = _parse_floats(spacing, "--spacing")
        if len(sp) != a.grid.rank:
            raise BadParamsError(
                f"--spacing has {len(sp)} entries for a {a.grid.rank}D volume"
            )
    report = evaluate(a, b, sp)
    _emit({"status": "ok", **report.to_dict()}, out)


@main.group()
def synth():
    """Deterministic synthetic phantoms, corruptions, and candidates."""


@synth.command()
@click.option("--size", required=True, help="Grid extents, e.g. 32,32,32.")
@click.option("--radii", required=True, help="Ellipsoid radii outermost..innermost, e.g. 12,8,4.")
@click.option("--seed", type=int, default=0)
@click.option("--out-labels", required=True, type=click.Path())
@click.option("--out-image", type=click.Path())
@_guard
def phantom(size, radii, seed, out_labels, out_image):
    """Nested-ellipsoid phantom labels (one class per level) and image."""
    dims = tuple(int(x) for x in _parse_floats(size, "--size"))
    levels = _parse_floats(radii, "--radii")
    spec = PhantomSpec(
        shape=GridShape(dims), classes=len(levels) + 1, nesting=levels, seed=seed
    )
    gt, image = make_phantom(spec)
    write_array(gt, out_labels)
    if out_image:
        write_array(image, out_image)
    _emit({"status": "ok", "classes": gt.classes, "output": str(out_labels)}, None)


@synth.command()
@click.option("--gt", required=True, type=click.Path(), help="Clean labels (NPY).")
@click.option("--blur", type=float, default=0.0, help="Boundary blur sigma (voxels).")
@click.option("--noise", type=float, default=0.0, help="Logit noise std.")
@click.option("--flip-rate", type=float, default=0.0, help="Fraction of adversarially flipped voxels.")
@click.option("--seed", type=int, default=0)
@click.option("--out", required=True, type=click.Path())
@_guard
def corrupt(gt, blur, noise, flip_rate, seed, out):
    """Degrade clean labels into a noisy probability map."""
    labels = read_array(gt, "labels")
    spec = CorruptionSpec(
        boundary_blur_sigma=blur, logit_noise_std=noise, flip_rate=flip_rate, seed=seed
    )
    write_array(corrupt_probmap(labels, spec), out)
    _emit({"status": "ok", "classes": labels.classes, "output": str(out)}, None)


@synth.command()
@click.option("--condition", required=True, type=click.Path(), help="Condition labels (NPY).")
@click.option("--n", type=int, default=6, help="Number of candidates to render.")
@click.option("--quality", default="0.9", help="Render quality value(s), cycled, e.g. 0.95,0.5.")
@click.option("--noise-std", type=float, default=0.05)
@click.option("--edge-jitter", type=float, default=2.0)
@click.option("--seed", type=int, default=0)
@click.option("--out-dir", required=True, type=click.Path())
@_guard
def candidates(condition, n, quality, noise_std, edge_jitter, seed, out_dir):
    """Render n stochastic candidate images from a condition label map."""
    cond = read_array(condition, "labels")
    qualities = _parse_floats(quality, "--quality")
    table = class_intensity_table(cond.classes)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(n):
        spec = RenderSpec(
            quality=qualities[i % len(qualities)],
            class_intensities=table,
            noise_std=noise_std,
            edge_jitter=edge_jitter,
            seed=child_seed(seed, i),
        )
        write_array(render_candidate(cond, spec), out / f"candidate_{i:03d}.npy")
    _emit({"status": "ok", "count": n, "output": str(out)}, None)


if __name__ == "__main__":
    main()
