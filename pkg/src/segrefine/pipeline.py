"""Full refinement chain: denoise the probability map, pick the most
structurally consistent candidate, segment it, and fuse by target size."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .config import PipelineConfig
from .edges import select_best
from .errors import NoForegroundError, ProviderError, RefineError
from .fusion import class_sizes, fuse_or_bypass
from .grid import LabelVolume, ProbVolume
from .nig import DenoiseResult, hierarchical_denoise
from .providers import ProviderConfig


@dataclass(frozen=True)
class RefineOutcome:
    """Everything a pipeline run produces, for reporting and inspection."""

    labels: LabelVolume
    denoise: DenoiseResult
    best_index: int
    scores: list
    seg_ib: LabelVolume
    bypassed_fusion: bool
    report: dict


def _round9(x: float) -> float:
    return float(f"{float(x):.9g}")


def _clean(obj):
    if isinstance(obj, float):
        return _round9(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def to_json(report: dict) -> str:
    """Deterministic JSON: sorted keys, floats at 9 significant digits."""
    return json.dumps(_clean(report), sort_keys=True, indent=2) + "\n"


def refine_volume(
    p: ProbVolume, providers: ProviderConfig, cfg: PipelineConfig | None = None
) -> RefineOutcome:
    """Run the three refinement stages on an in-memory probability map.

    Raises ``NoForeground`` if denoising leaves no foreground to condition
    the candidate generator on; provider exceptions are wrapped as
    ``Provider`` errors.
    """
    cfg = cfg or PipelineConfig()
    den = hierarchical_denoise(p, cfg)
    if den.y_star.foreground_count() == 0:
        raise NoForegroundError("denoising removed all foreground voxels")

    try:
        candidates = providers.candidate.generate(den.y_star, cfg.n_candidates, cfg.seed)
    except RefineError:
        raise
    except Exception as exc:  # provider bugs surface as provider failures
        raise ProviderError(f"candidate provider failed: {exc}") from exc

    best, scores = select_best(candidates, den.y_star, cfg)

    try:
        seg_ib = providers.seg.segment(candidates[best], best, p.classes)
    except RefineError:
        raise
    except Exception as exc:
        raise ProviderError(f"segmentation provider failed: {exc}") from exc

    stats = class_sizes(den.y_star)
    populated = [c for c, n in stats.counts.items() if n > 0]
    bypass = len(populated) == 1
    fused = fuse_or_bypass(den.y_star, seg_ib, cfg.fusion_mode)

    report = {
        "config": cfg.to_dict(),
        "classes": p.classes,
        "dims": list(p.grid.dims),
        "retention": {
            "initial_foreground": den.y_initial.foreground_count(),
            "entropy_refined_foreground": den.y_entropy.foreground_count(),
            "denoised_foreground": den.y_star.foreground_count(),
            "fused_foreground": fused.foreground_count(),
        },
        "selection": {
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
        "fusion": {
            "bypassed": bypass,
            "v_min_class": None if bypass else stats.v_min_class,
            "class_counts": {str(c): n for c, n in stats.counts.items()},
            "lambdas": {str(c): l for c, l in stats.lambdas.items()},
            "mode": cfg.fusion_mode,
        },
    }
    return RefineOutcome(
        labels=fused,
        denoise=den,
        best_index=best,
        scores=scores,
        seg_ib=seg_ib,
        bypassed_fusion=bypass,
        report=report,
    )


def run_pipeline(
    prob_path,
    providers: ProviderConfig,
    cfg: PipelineConfig,
    out_path,
    report_path=None,
    emit_entropy=None,
    emit_variance=None,
) -> tuple[int, dict]:
    """File-to-file pipeline run.

    Returns (exit status, report dict); on failure the report carries the
    error code and message instead of results, and nothing is written
    except the report (if a path was given). Exit statuses: 0 success,
    2 input, 3 config, 4 pipeline stage, 5 provider.
    """
    from .npyio import read_array, write_array

    try:
        p = read_array(prob_path, "prob")
        outcome = refine_volume(p, providers, cfg)
        write_array(outcome.labels, out_path)
        if emit_entropy:
            write_array(outcome.denoise.entropy.voxel_entropy, emit_entropy)
        if emit_variance:
            write_array(outcome.denoise.variance, emit_variance)
        report = dict(outcome.report)
        report["status"] = "ok"
        report["output"] = str(out_path)
    except RefineError as exc:
        report = {"status": "error", "error": exc.code, "message": str(exc)}
        if report_path:
            with open(report_path, "w", encoding="utf-8") as fh:
                fh.write(to_json(report))
        return exc.exit_code, report

    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write(to_json(report))
    return 0, report
