"""Acceptance suite: one test per criterion, one printed line per result.

Run with `pytest tests/test_acceptance.py -v`; a scoreboard is printed at
the end of the session.  Training fixtures are shared, so the whole suite
stays well inside the per-criterion runtime budgets it asserts.
"""

import time

import numpy as np
import pytest

from sdn import (
    LabeledSample,
    TrainConfig,
    classify,
    estimate_sigmas,
    extract_skeleton,
    image_to_samples,
    kkt_violation,
    labels_to_image,
    load_model,
    max_cross_class_kernel,
    one_class_values,
    pixel_error,
    save_model,
    save_pgm,
    sigma_histogram,
    solve_dual,
    suppress_nested,
    threshold_domains,
    train,
)
from sdn import SdnModel, SimilarityDomain, decision_values, foreground_domains
from sdn.cli_app import format_histogram_table, main

from conftest import record_criterion
from oracles import kernel_matrix, qp_active_set_max, qp_grid_max, random_separated_dataset
from shapes import CRITERION_SHAPES, disk64

T_DEFAULT = 0.05
A_DEFAULT = 2.85


@pytest.fixture(scope="session")
def trained_shapes():
    """Criterion-1 shapes trained at T=0.05 with the ascent assertion on."""
    out = {}
    for name, build in CRITERION_SHAPES.items():
        image = build()
        config = TrainConfig(T=T_DEFAULT, debug=True)
        started = time.perf_counter()
        model = train(image_to_samples(image), config,
                      width=image.width, height=image.height)
        elapsed = time.perf_counter() - started
        out[name] = (image, model, elapsed)
    return out


@pytest.fixture(scope="session")
def trained_disk64():
    image = disk64()
    model = train(image_to_samples(image), TrainConfig(T=T_DEFAULT, debug=True),
                  width=64, height=64)
    return image, model


def grid_points(width, height):
    cols, rows = np.meshgrid(np.arange(width), np.arange(height))
    return np.column_stack([cols.ravel(), rows.ravel()]).astype(float)


def test_criterion_01_zero_pixel_error(trained_shapes):
    failures = []
    for name, (image, model, elapsed) in trained_shapes.items():
        err = pixel_error(model, image)
        if err != 0:
            failures.append(f"{name}: pixel_error={err}")
        if elapsed >= 60.0:
            failures.append(f"{name}: trained in {elapsed:.1f}s (budget 60s)")
    detail = "; ".join(
        f"{name} err=0 in {elapsed:.2f}s" for name, (_, _, elapsed) in trained_shapes.items()
    )
    ok = record_criterion(1, "zero-pixel-error reconstruction", not failures, detail)
    assert ok, failures


def test_criterion_02a_total_sparsity(trained_disk64):
    image, model = trained_disk64
    total = image.width * image.height
    frac = model.k / total
    ok = record_criterion(
        "2a", "sparsity: retained SDs <= 20% of all pixels",
        frac <= 0.20, f"k={model.k}/{total} = {100 * frac:.1f}%",
    )
    assert ok, f"retained fraction {frac:.3f} exceeds 0.20"


def test_criterion_02b_foreground_sparsity(trained_disk64):
    # Stated bound: foreground SDs <= 20% of foreground pixels.  With the
    # shape parameters tied to nearest-opposite distances at T=0.05,
    # adjacent-pixel kernel values are ~0.05, so every pixel within a few
    # steps of the class boundary must keep its own weight at the dual
    # optimum.  The foreground-SD count therefore scales with the
    # perimeter (~3 rim layers) while foreground pixels scale with the
    # area; at 64x64 no disk radius brings the ratio under 20% (the
    # companion metric, foreground SDs over ALL pixels, is ~7%).
    image, model = trained_disk64
    fg_sds = len(foreground_domains(model))
    fg_px = image.foreground_count
    frac = fg_sds / fg_px
    ok = record_criterion(
        "2b", "sparsity: foreground SDs <= 20% of foreground pixels",
        frac <= 0.20,
        f"s1={fg_sds}/{fg_px} = {100 * frac:.1f}% "
        f"(vs all pixels: {100 * fg_sds / (image.width * image.height):.1f}%)",
    )
    assert ok, (
        f"foreground-SD fraction {frac:.3f} exceeds 0.20; known-unattainable "
        "bound, see the comment above and the README's 'Known red' note"
    )


def test_criterion_03_constraint_audit(trained_shapes, trained_disk64):
    started = time.perf_counter()
    worst_by_shape = {}
    models = {name: model for name, (_, model, _) in trained_shapes.items()}
    models["disk64"] = trained_disk64[1]
    for name, model in models.items():
        coords = np.array([d.center for d in model.domains])
        labels = np.array([d.label for d in model.domains])
        sigma_sq = np.array([d.sigma_sq for d in model.domains])
        worst_by_shape[name] = max_cross_class_kernel(coords, labels, sigma_sq)
    elapsed = time.perf_counter() - started
    worst = max(worst_by_shape.values())
    ok = record_criterion(
        3, "cross-class kernel audit strictly below T",
        worst < T_DEFAULT and elapsed < 5.0,
        f"max K = {worst:.6f} over {len(models)} models in {elapsed:.2f}s",
    )
    assert ok, worst_by_shape


def test_criterion_04_dual_oracle_equivalence():
    rng = np.random.default_rng(20260810)
    started = time.perf_counter()
    checked = 0
    failures = []
    sizes = [2, 3, 4, 5, 6] * 10
    for n in sizes:
        coords, labels = random_separated_dataset(rng, n)
        samples = [LabeledSample((c[0], c[1]), int(y)) for c, y in zip(coords, labels)]
        sigmas = estimate_sigmas(samples, T_DEFAULT, 0.99)
        K = kernel_matrix(coords, sigmas.sigma_sq)
        if np.linalg.eigvalsh(K).min() <= 1e-6:
            continue
        C = float(rng.choice([1.0, 2.0, 1000.0]))
        state = solve_dual(samples, sigmas, TrainConfig(C=C, debug=True))
        y = labels.astype(float)
        exact_q, _ = qp_active_set_max(K, y, C)
        if state.objective < exact_q - 0.05:
            failures.append(f"n={n} C={C}: Q={state.objective:.6f} < exact {exact_q:.6f}")
        if n <= 4:
            grid_q, _ = qp_grid_max(K, y, C, step=min(0.01 * C, 0.05), cap=6.0)
            if state.objective < grid_q - 0.05:
                failures.append(f"n={n} C={C}: Q below grid optimum {grid_q:.6f}")
        viol = kkt_violation(samples, sigmas, state.alpha, C)
        if viol > 1e-3:
            failures.append(f"n={n} C={C}: KKT violation {viol:.2e}")
        checked += 1
    elapsed = time.perf_counter() - started
    if elapsed >= 30.0:
        failures.append(f"took {elapsed:.1f}s (budget 30s)")
    ok = record_criterion(
        4, "dual optimizer matches oracles on random small datasets",
        checked >= 50 and not failures,
        f"{checked} datasets in {elapsed:.1f}s",
    )
    assert ok, failures


def test_criterion_05_monotone_ascent(trained_shapes):
    # the trainers above all ran with config.debug=True, which asserts
    # Q(alpha) never decreases on any accepted pair update; reaching this
    # point means zero violations were observed
    ok = record_criterion(
        5, "objective never decreased across all training updates",
        len(trained_shapes) == 5,
        "debug-mode ascent assertion active for all criterion-1 runs",
    )
    assert ok


def test_criterion_06_one_class_agreement(trained_shapes):
    rates = {}
    for name, (image, model, _) in trained_shapes.items():
        pts = grid_points(image.width, image.height)
        full = np.where(decision_values(model, pts) > 0, 1, -1)
        approx = one_class_values(model, pts, A_DEFAULT)
        rates[name] = float((full == approx).mean())
    ok = record_criterion(
        6, "one-class approximation agrees on >= 95% of pixels",
        all(r >= 0.95 for r in rates.values()),
        ", ".join(f"{k}={100 * v:.1f}%" for k, v in rates.items()),
    )
    assert ok, rates


def test_criterion_07_skeleton_structure(trained_shapes):
    started = time.perf_counter()
    failures = []

    bar_image, bar_model, _ = trained_shapes["bar48x12"]
    graph = extract_skeleton(bar_model)
    parent = list(range(len(graph.nodes)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in graph.edges:
        parent[find(i)] = find(j)
    components = {find(i) for i in range(len(graph.nodes))}
    if len(components) != 1:
        failures.append(f"bar skeleton has {len(components)} components")
    for node in graph.nodes:
        if classify(bar_model, node.center) != 1:
            failures.append(f"node {node.center} classifies as background")
    cols = [n.center[0] for n in graph.nodes]
    span = max(cols) - min(cols)
    if span < 0.8 * 40:
        failures.append(f"bar skeleton spans {span}px of the 40px bar")
    counts = [
        len(suppress_nested(threshold_domains(bar_model, float(t)), A_DEFAULT))
        for t in np.linspace(0, 2, 41)
    ]
    if any(c1 < c2 for c1, c2 in zip(counts, counts[1:])):
        failures.append("node count not monotone in the threshold")

    disk_image, disk_model_, _ = trained_shapes["disk32"]
    disk_graph = extract_skeleton(disk_model_)
    if len(disk_graph.nodes) > 3:
        failures.append(f"disk skeleton has {len(disk_graph.nodes)} nodes")

    elapsed = time.perf_counter() - started
    if elapsed >= 10.0:
        failures.append(f"took {elapsed:.1f}s (budget 10s)")
    ok = record_criterion(
        7, "skeleton structure on bar and disk",
        not failures,
        f"bar nodes={len(graph.nodes)} span={span:.0f}px, "
        f"disk nodes={len(disk_graph.nodes)}, {elapsed:.2f}s",
    )
    assert ok, failures


def test_criterion_08_histogram_layout():
    domains = tuple(
        SimilarityDomain((float(i), 0.0), float(v), 1.0, 1)
        for i, v in enumerate(range(1, 11))
    )
    model = SdnModel(domains, T_DEFAULT, 1000.0, A_DEFAULT, 16, 16)
    hist = sigma_histogram(model, 10)
    table = format_histogram_table(hist)
    center_row, count_row = table.splitlines()
    centers = [float(tok) for tok in center_row.split(":")[1].split()]
    counts = [int(tok) for tok in count_row.split(":")[1].split()]
    width = (10 - 1) / 10
    expected_centers = [round(1 + width * (i + 0.5), 2) for i in range(10)]
    ok = record_criterion(
        8, "histogram table layout with uniform bins",
        counts == [1] * 10 and centers == expected_centers,
        "one count per bin, centers " + ", ".join(f"{c:g}" for c in centers[:3]) + ", ...",
    )
    assert ok, (centers, counts)


def test_criterion_09_train_determinism(tmp_path, capsys):
    image = CRITERION_SHAPES["disk32"]()
    pgm = tmp_path / "disk32.pgm"
    save_pgm(image, pgm)
    code1 = main(["train", str(pgm), "--out-dir", str(tmp_path / "run1")])
    code2 = main(["train", str(pgm), "--out-dir", str(tmp_path / "run2")])
    capsys.readouterr()
    first = (tmp_path / "run1" / "disk32.sdn").read_bytes()
    second = (tmp_path / "run2" / "disk32.sdn").read_bytes()
    ok = record_criterion(
        9, "identical train invocations yield byte-identical models",
        code1 == 0 and code2 == 0 and first == second,
        f"{len(first)} bytes",
    )
    assert ok


def test_criterion_10_round_trip_fidelity(trained_shapes, tmp_path):
    failures = []
    _, model, _ = trained_shapes["disk32"]
    path_a = tmp_path / "a.sdn"
    path_b = tmp_path / "b.sdn"
    save_model(model, path_a)
    save_model(load_model(path_a), path_b)
    if path_a.read_bytes() != path_b.read_bytes():
        failures.append("model save->load->save changed bytes")

    rng = np.random.default_rng(99)
    for trial in range(100):
        w, h = int(rng.integers(1, 16)), int(rng.integers(1, 16))
        from sdn import BinaryImage

        img = BinaryImage(w, h, rng.integers(0, 2, size=(h, w)).astype(np.uint8))
        labels = [s.y for s in image_to_samples(img)]
        if labels_to_image(w, h, labels) != img:
            failures.append(f"image round trip failed on trial {trial}")
            break
    ok = record_criterion(
        10, "model and image round trips are exact",
        not failures,
        "model bytes stable, 100 random images exact",
    )
    assert ok, failures
