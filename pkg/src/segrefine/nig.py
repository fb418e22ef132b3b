"""Normal-Inverse-Gamma uncertainty: parameter fields, density, variance,
and the two-stage hierarchical denoise that composes them.

Each voxel's class probability is modelled as a Gaussian whose mean and
variance carry a Normal-Inverse-Gamma prior with parameters (alpha, beta,
gamma, omega). The prior is built from the entropy-refined labels: alpha
grows with disagreement between raw and entropy-refined labels, beta and
omega are driven by regional entropy, and gamma anchors to the retained
class's probability. The prior's variance omega / (beta * (alpha - 1)) is
the fine-grained uncertainty score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import PipelineConfig
from .entropy import EntropyMaps, entropy_mask, regional_entropy, voxel_entropy
from .errors import (
    AlphaNotGreaterThanOneError,
    BadConfigError,
    BadParamsError,
    ShapeMismatchError,
)
from .grid import LabelVolume, ProbVolume, ScalarField, argmax_labels


@dataclass(frozen=True)
class NigField:
    """Per-voxel Normal-Inverse-Gamma parameters.

    With a valid config alpha > 1 everywhere, beta >= zeta2 > 0 and
    omega in (0, 1/eta2].
    """

    alpha: ScalarField
    beta: ScalarField
    omega: ScalarField
    gamma: ScalarField


@dataclass(frozen=True)
class DenoiseResult:
    """Output of :func:`hierarchical_denoise` with full diagnostics."""

    y_star: LabelVolume
    y_initial: LabelVolume
    y_entropy: LabelVolume
    entropy: EntropyMaps
    nig: NigField
    variance: ScalarField


def nig_params(
    y: LabelVolume,
    y_entropy: LabelVolume,
    e: ScalarField,
    cfg: PipelineConfig,
    p: ProbVolume,
) -> NigField:
    """Build the per-voxel prior parameter fields.

    Per voxel, with d = 1 where the raw and entropy-refined labels disagree
    (a 0/1 indicator; class ids are nominal, so no arithmetic difference):

        alpha = kappa * d + epsilon
        beta  = zeta1 * (1 - E) + zeta2
        omega = 1 / (eta1 * E + eta2)
        gamma = P(retained class | v), 0 where the voxel was masked
    """
    if not cfg.epsilon > 1:
        raise BadConfigError(f"epsilon must be > 1, got {cfg.epsilon}")
    if not (y.grid.dims == y_entropy.grid.dims == e.grid.dims == p.grid.dims):
        raise ShapeMismatchError("label, entropy and probability grids differ")

    d = (y.values != y_entropy.values).astype(np.float64)
    ev = e.values
    alpha = cfg.kappa * d + cfg.epsilon
    beta = cfg.zeta1 * (1.0 - ev) + cfg.zeta2
    omega = 1.0 / (cfg.eta1 * ev + cfg.eta2)

    retained = y_entropy.values.astype(np.intp)
    probs = np.take_along_axis(
        p.values.astype(np.float64), retained[np.newaxis], axis=0
    )[0]
    gamma = np.where(y_entropy.values != 0, probs, 0.0)

    g = y.grid
    return NigField(
        ScalarField(alpha, g), ScalarField(beta, g),
        ScalarField(omega, g), ScalarField(gamma, g),
    )


def nig_logpdf(
    mu: float, sigma2: float, alpha: float, beta: float, gamma: float, omega: float
) -> float:
    """Natural log of the Normal-Inverse-Gamma density at (mu, sigma2):

        p(mu, sigma2) = beta^alpha * sqrt(omega) / (Gamma(alpha) * sqrt(2 pi sigma2))
                        * (1 / sigma2)^(alpha + 1)
                        * exp(-(2 beta + omega (gamma - mu)^2) / (2 sigma2))
    """
    if sigma2 <= 0 or alpha <= 0 or beta <= 0 or omega <= 0:
        raise BadParamsError(
            "need sigma2 > 0, alpha > 0, beta > 0, omega > 0; got "
            f"sigma2={sigma2}, alpha={alpha}, beta={beta}, omega={omega}"
        )
    log_sigma2 = math.log(sigma2)
    return (
        alpha * math.log(beta)
        + 0.5 * math.log(omega)
        - math.lgamma(alpha)
        - 0.5 * (math.log(2.0 * math.pi) + log_sigma2)
        - (alpha + 1.0) * log_sigma2
        - (2.0 * beta + omega * (gamma - mu) ** 2) / (2.0 * sigma2)
    )


def nig_variance(f: NigField) -> ScalarField:
    """Variance of the prior, omega / (beta * (alpha - 1)).

    Raises ``AlphaNotGreaterThanOne`` if any voxel has alpha <= 1: the
    variance is undefined there, which signals a misconfigured epsilon and
    is never silently clamped.
    """
    a = f.alpha.values
    if not (a > 1.0).all():
        bad = float(a.min())
        raise AlphaNotGreaterThanOneError(
            f"variance undefined: min alpha = {bad} <= 1"
        )
    var = f.omega.values / (f.beta.values * (a - 1.0))
    return ScalarField(var, f.alpha.grid)


def hierarchical_denoise(p: ProbVolume, cfg: PipelineConfig) -> DenoiseResult:
    """Two-stage pseudo-label cleanup.

    Coarse: voxels whose entropy exceeds tau1 are dropped to background.
    Fine: the Normal-Inverse-Gamma variance built from the refined labels
    drops voxels above tau2. ``mask_mode="hierarchical"`` applies both
    indicators to the initial labels; ``"nig_only"`` applies only the
    variance gate.
    """
    y = argmax_labels(p)
    h = voxel_entropy(p)
    e = regional_entropy(h, p.classes)
    y_ent = entropy_mask(y, h, cfg.tau1)
    field = nig_params(y, y_ent, e, cfg, p)
    var = nig_variance(field)

    keep = var.values <= cfg.tau2
    if cfg.mask_mode == "hierarchical":
        keep = keep & (h.values <= cfg.tau1)
    y_star = LabelVolume(
        np.where(keep, y.values, np.uint8(0)).astype(np.uint8), y.classes, y.grid
    )
    return DenoiseResult(
        y_star=y_star,
        y_initial=y,
        y_entropy=y_ent,
        entropy=EntropyMaps(h, e),
        nig=field,
        variance=var,
    )
