"""End-to-end acceptance gate.

Each test prints one [PASS]/[FAIL] line with the measured numbers, then
asserts. The corpus of corrupted phantoms and the expensive refinement runs
are shared across criteria through module-scoped fixtures.

Run with `pytest tests/test_acceptance.py -s -m acceptance`.
"""
import time
from collections import Counter
from dataclasses import dataclass

import numpy as np
import pytest

from topofix.baseline import cca_clean
from topofix.export import CSV_HEADER, _pair_rows
from topofix.grids import CLASS_LV, CLASS_MY, CLASS_RV, LabelMask, MultiClassProb, ProbMap
from topofix.loss import topo_loss, topo_loss_single
from topofix.metrics import mean_dsc, topologically_correct
from topofix.oracle import brute_barcode
from topofix.persistence import barcode_of
from topofix.phantom import CorruptionSpec, PhantomSpec, corrupt, generate, soften_mask
from topofix.priors import short_axis_prior
from topofix.refine import MODE_SINGLE, RefineConfig, argmax_mask, refine

from conftest import random_prob
from fdfields import comonotone_field, fd_gradient_worst_error, has_boundary_tie

pytestmark = pytest.mark.acceptance

CLASS_CYCLE = (CLASS_RV, CLASS_MY, CLASS_LV)
KINDS = ("spurious_component", "punched_hole", "broken_ring", "adjacency_break", "soften")
PER_KIND = 20


def _verdict(ok: bool, label: str) -> None:
    print(f"\n[{'PASS' if ok else 'FAIL'}] {label}")
    assert ok, label


@dataclass
class Case:
    kind: str
    phantom_seed: int
    corrupt_seed: int
    mask: LabelMask
    bad: MultiClassProb


def _corruption(kind: str, klass: int, seed: int) -> CorruptionSpec:
    if kind == "spurious_component":
        return CorruptionSpec.spurious_component(klass, seed=seed)
    if kind == "punched_hole":
        return CorruptionSpec.punched_hole(klass, seed=seed)
    if kind == "broken_ring":
        return CorruptionSpec.broken_ring(seed=seed)
    if kind == "adjacency_break":
        return CorruptionSpec.adjacency_break(seed=seed)
    return CorruptionSpec.soften(seed=seed)


def _build_case(kind: str, i: int, case_index: int) -> Case:
    mask, prob = generate(PhantomSpec(seed=case_index))
    c = _corruption(kind, CLASS_CYCLE[i % 3], 1000 + case_index)
    return Case(
        kind=kind,
        phantom_seed=case_index,
        corrupt_seed=1000 + case_index,
        mask=mask,
        bad=corrupt(mask, prob, c),
    )


@pytest.fixture(scope="module")
def corpus() -> list[Case]:
    out = []
    case_index = 0
    for kind in KINDS:
        for i in range(PER_KIND):
            out.append(_build_case(kind, i, case_index))
            case_index += 1
    return out


@pytest.fixture(scope="module")
def refined_pairs(corpus):
    prior = short_axis_prior()
    cfg = RefineConfig()
    t0 = time.perf_counter()
    reports = [refine(case.bad, prior, cfg) for case in corpus]
    return reports, time.perf_counter() - t0


def test_barcodes_match_the_brute_force_reference():
    rng = np.random.default_rng(42)
    n_maps = 500
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(n_maps):
        h, w = rng.integers(1, 11, size=2)
        levels = int(rng.integers(2, 7))
        vals = random_prob(rng, int(h), int(w), levels)
        if Counter(barcode_of(vals).value_triples()) != Counter(
            brute_barcode(ProbMap(vals))
        ):
            mismatches += 1
    wall = time.perf_counter() - t0
    _verdict(
        mismatches == 0 and wall < 30.0,
        f"barcode multiset equals the independent reference on {n_maps} random "
        f"maps, {mismatches} mismatches, wall {wall:.1f}s (budget 30s)",
    )


def test_loss_gradient_matches_central_differences():
    prior = short_axis_prior()
    t0 = time.perf_counter()
    worst = 0.0
    checked = 0
    seed = 0
    while checked < 50:
        rng = np.random.default_rng(seed)
        seed += 1
        channels = comonotone_field(rng, 8, 8)
        if has_boundary_tie(channels, prior):
            continue
        worst = max(worst, fd_gradient_worst_error(channels, prior))
        checked += 1
    wall = time.perf_counter() - t0
    _verdict(
        worst <= 1e-5 and wall < 120.0,
        f"analytic gradient matches central differences on {checked} fields, "
        f"worst relative error {worst:.2e} (tolerance 1e-5), wall {wall:.1f}s "
        f"(budget 120s)",
    )


def test_frozen_loss_values():
    prior = short_axis_prior()
    mask, _ = generate(PhantomSpec(seed=0))
    one_hot = soften_mask(mask, 0.0)
    loss_hot = topo_loss(one_hot, prior)[0].total
    loss_hot_single = topo_loss_single(one_hot, prior)[0].total

    empty = np.zeros((4, 96, 96), dtype=np.float32)
    empty[0] = 1.0
    bg = MultiClassProb(empty)
    loss_bg = topo_loss(bg, prior)[0].total
    loss_bg_single = topo_loss_single(bg, prior)[0].total

    _verdict(
        loss_hot == 0.0
        and loss_hot_single == 0.0
        and loss_bg == 9.0
        and loss_bg_single == 4.0,
        f"exact one-hot phantom loses {loss_hot!r} (expected 0.0) and the "
        f"all-background field loses {loss_bg!r} / {loss_bg_single!r} "
        f"(expected 9.0 / 4.0)",
    )


def test_refinement_fixes_corrupted_phantoms(corpus, refined_pairs):
    reports, wall = refined_pairs
    prior = short_axis_prior()
    fixed = sum(topologically_correct(r.mask, prior) for r in reports)
    t_rate = fixed / len(corpus)
    deltas = [
        abs(mean_dsc(c.mask, r.mask) - mean_dsc(c.mask, argmax_mask(c.bad)))
        for c, r in zip(corpus, reports)
    ]
    mean_abs_delta = float(np.mean(deltas))
    _verdict(
        t_rate >= 0.95 and mean_abs_delta <= 0.01 and wall < 1200.0,
        f"refinement restores the prior on {fixed}/{len(corpus)} corrupted "
        f"phantoms (need >= 95%), mean |dDSC| {mean_abs_delta:.4f} "
        f"(budget 0.01), wall {wall:.0f}s (budget 1200s)",
    )


def test_ablation_ordering(corpus, refined_pairs):
    prior = short_axis_prior()
    reports, _ = refined_pairs

    none_masks = [argmax_mask(c.bad) for c in corpus]
    cca_masks = [cca_clean(m) for m in none_masks]
    cfg_single = RefineConfig(mode=MODE_SINGLE)
    single_masks = [refine(c.bad, prior, cfg_single).mask for c in corpus]
    pairs_masks = [r.mask for r in reports]

    def rate(masks):
        return sum(topologically_correct(m, prior) for m in masks) / len(masks)

    t_none, t_cca = rate(none_masks), rate(cca_masks)
    t_single, t_pairs = rate(single_masks), rate(pairs_masks)

    spurious = [k for k, c in enumerate(corpus) if c.kind == "spurious_component"]
    holes = [k for k, c in enumerate(corpus) if c.kind == "punched_hole"]
    cca_spurious = rate([cca_masks[k] for k in spurious])
    cca_holes = rate([cca_masks[k] for k in holes])

    _verdict(
        t_pairs >= t_single >= t_cca >= t_none
        and cca_spurious == 1.0
        and cca_holes == 0.0,
        f"fix rates order as pairs {t_pairs:.2f} >= single {t_single:.2f} >= "
        f"largest-component {t_cca:.2f} >= none {t_none:.2f}; the baseline "
        f"fixes {cca_spurious:.0%} of spurious components and {cca_holes:.0%} "
        f"of punched holes",
    )


def test_everything_is_deterministic(corpus, refined_pairs):
    reports, _ = refined_pairs
    prior = short_axis_prior()
    cfg = RefineConfig()
    ok = True
    for k in (0, 37, 99):  # one case per corruption family tier
        case = corpus[k]
        rebuilt = _build_case(case.kind, k % PER_KIND, case.phantom_seed)
        ok &= rebuilt.mask.labels.tobytes() == case.mask.labels.tobytes()
        ok &= rebuilt.bad.channels.tobytes() == case.bad.channels.tobytes()
        rep = refine(rebuilt.bad, prior, cfg)
        ok &= rep.prob.channels.tobytes() == reports[k].prob.channels.tobytes()
        ok &= rep.mask.labels.tobytes() == reports[k].mask.labels.tobytes()
        ok &= rep.best_iteration == reports[k].best_iteration

    vals = corpus[0].bad.channels[2]
    a, b = barcode_of(vals), barcode_of(vals.copy())
    ok &= a.births.tobytes() == b.births.tobytes()
    ok &= a.deaths.tobytes() == b.deaths.tobytes()
    rows_a = "\n".join([CSV_HEADER, *_pair_rows(a.pairs)])
    rows_b = "\n".join([CSV_HEADER, *_pair_rows(b.pairs)])
    ok &= rows_a == rows_b

    _verdict(
        ok,
        "regenerating, re-corrupting and re-refining sampled cases reproduces "
        "every byte: fields, masks, barcodes and CSV rows",
    )
