"""Similarity-constrained topological refinement of a probability field.

The field is reparameterized as per-pixel logits (softmax over the four
channels keeps every iterate a valid probability field) and optimized with
Adam against

    L_TP(theta) = L_topo(prob(theta)) + (lam / V) * ||y0 - prob(theta)||^2

where V is the pixel count and y0 the input probabilities. The returned
iterate is the one with the lowest L_TP seen over the whole run, including
the starting point, so the best objective value never regresses even when
individual steps overshoot.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import LabelMask, MultiClassProb
from .loss import SINGLE_PAIRS, _loss_raw
from .priors import PAIR_ORDER, BettiPrior, prior_from_mask

# logits are log-probabilities; zeros are floored first so log stays finite
PROB_FLOOR = 1e-7

MODE_PAIRS = "pairs"
MODE_SINGLE = "single"


class RefinementError(RuntimeError):
    """Non-finite loss or gradient during refinement."""


@dataclass(frozen=True)
class RefineConfig:
    lam: float = 1000.0
    iterations: int = 100
    step_size: float = 1e-1  # frozen by the one-time sweep in scripts/
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    mode: str = MODE_PAIRS

    def __post_init__(self):
        if self.mode not in (MODE_PAIRS, MODE_SINGLE):
            raise ValueError(f"mode must be '{MODE_PAIRS}' or '{MODE_SINGLE}'")
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        if self.step_size <= 0 or self.lam < 0:
            raise ValueError("step_size must be positive and lam non-negative")


@dataclass
class RefineReport:
    """Per-iteration objective decomposition plus the selected iterate."""

    config: RefineConfig
    topo: np.ndarray  # L_topo at iterate t, t = 0 .. iterations
    similarity: np.ndarray
    total: np.ndarray
    best_iteration: int
    prob: MultiClassProb
    mask: LabelMask
    topo_correct: bool


def argmax_mask(y: MultiClassProb) -> LabelMask:
    """Per-pixel argmax; ties resolve to the lowest class index."""
    return LabelMask(np.argmax(y.channels, axis=0).astype(np.uint8))


def _softmax(theta: np.ndarray) -> np.ndarray:
    shifted = theta - theta.max(axis=0, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=0, keepdims=True)


def _entry_blame(breakdown) -> str:
    for e in breakdown.entries:
        if not (np.isfinite(e.matched) and np.isfinite(e.spurious)):
            return f" in union (i={e.i}, j={e.j}, d={e.d})"
    return ""


def refine(y0: MultiClassProb, prior: BettiPrior, config: RefineConfig | None = None) -> RefineReport:
    cfg = config or RefineConfig()
    pairs = PAIR_ORDER if cfg.mode == MODE_PAIRS else SINGLE_PAIRS
    y0arr = y0.channels.astype(np.float64)
    n_pix = y0arr.shape[1] * y0arr.shape[2]
    sim_scale = cfg.lam / n_pix

    theta = np.log(np.maximum(y0arr, PROB_FLOOR))
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)

    topo_hist = np.empty(cfg.iterations + 1)
    sim_hist = np.empty(cfg.iterations + 1)
    total_hist = np.empty(cfg.iterations + 1)
    best_total = np.inf
    best_theta = theta.copy()
    best_iter = 0

    for t in range(cfg.iterations + 1):
        p = _softmax(theta)
        breakdown, g_topo = _loss_raw(p, prior, pairs)
        diff = p - y0arr
        sim = sim_scale * float((diff * diff).sum())
        total = breakdown.total + sim
        if not np.isfinite(total):
            raise RefinementError(
                f"iteration {t}: non-finite objective{_entry_blame(breakdown)}"
            )
        topo_hist[t] = breakdown.total
        sim_hist[t] = sim
        total_hist[t] = total
        if total < best_total:
            best_total, best_iter = total, t
            best_theta = theta.copy()
        if t == cfg.iterations:
            break

        g_prob = g_topo + 2.0 * sim_scale * diff
        # chain through the per-pixel softmax Jacobian
        inner = (p * g_prob).sum(axis=0, keepdims=True)
        g_theta = p * (g_prob - inner)
        if not np.all(np.isfinite(g_theta)):
            raise RefinementError(f"iteration {t}: non-finite gradient")
        step = t + 1
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g_theta
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g_theta * g_theta
        m_hat = m / (1.0 - cfg.beta1**step)
        v_hat = v / (1.0 - cfg.beta2**step)
        theta = theta - cfg.step_size * m_hat / (np.sqrt(v_hat) + cfg.eps)

    prob = MultiClassProb(_softmax(best_theta).astype(np.float32))
    mask = argmax_mask(prob)
    return RefineReport(
        config=cfg,
        topo=topo_hist,
        similarity=sim_hist,
        total=total_hist,
        best_iteration=best_iter,
        prob=prob,
        mask=mask,
        topo_correct=prior_from_mask(mask) == prior,
    )


def write_report_csv(report: RefineReport, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("iteration,topo,similarity,total\n")
        for t in range(report.topo.size):
            fh.write(
                f"{t},{float(report.topo[t])!r},{float(report.similarity[t])!r},"
                f"{float(report.total[t])!r}\n"
            )
