"""Acceptance suite: one test per acceptance criterion, each printing a
pass/fail line and enforcing its stated tolerances and runtime budget.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they complete.  The conditional-generation criterion trains the
full toy model for 2,000 steps and dominates the runtime (about five
minutes on a laptop CPU).
"""

import base64
import functools
import time

import numpy as np
from scipy.stats import kstest

from layerkit.attention import (
    ModulationSpec,
    Role,
    StreamLayout,
    attention,
    attention_weights,
    build_bias,
)
from layerkit.compositor import (
    ColorLayer,
    ColorStroke,
    ColorStrokeSpec,
    LayerStack,
    composite_color,
    composite_edge,
    degrade_color_map,
    flatten,
)
from layerkit.maskgen import ChangeMask, MaskRejection, derive_mask
from layerkit.metrics import l1, l2, psnr, ssim
from layerkit.model import (
    ColorFieldTask,
    TASK_COLOR_FIELD,
    ToyDiT,
    ToyModelConfig,
    rf_loss,
    sample,
    train,
)
from layerkit.raster import content_digest, load_png, save_png


def criterion(name, budget_seconds=None):
    """Print `[ACCEPTANCE] <name>: PASS|FAIL` and enforce the time budget."""

    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            started = time.monotonic()
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[ACCEPTANCE] {name}: FAIL")
                raise
            elapsed = time.monotonic() - started
            if budget_seconds is not None and elapsed > budget_seconds:
                print(f"[ACCEPTANCE] {name}: FAIL (took {elapsed:.1f}s > {budget_seconds}s budget)")
                raise AssertionError(f"{name} exceeded its {budget_seconds}s budget: {elapsed:.1f}s")
            print(f"[ACCEPTANCE] {name}: PASS ({elapsed:.1f}s)")

        return wrapper

    return decorate


@criterion("bias semantics suite", budget_seconds=5)
def test_bias_semantics_suite():
    rng = np.random.default_rng(2024)
    for trial in range(30):
        n_text = int(rng.integers(1, 5))
        n_x = int(rng.integers(2, 20))
        n_y = int(rng.integers(0, 16))
        n_cues = int(rng.integers(1, 4))
        cues = {f"c{k}": int(rng.integers(1, 12)) for k in range(n_cues)}
        total = n_text + n_x + n_y + sum(cues.values())
        if total > 64:
            continue
        d = int(rng.integers(2, 33))
        layout = StreamLayout.from_counts(n_text, n_x, n_y, cues)
        Q, K, V = rng.normal(size=(3, layout.total, d))
        x_rows = layout.indices(Role.NOISY_IMAGE)
        probe = next(iter(cues))

        # (a) sigma = 1: bias block exactly zero.
        bias1 = build_bias(layout, ModulationSpec({c: 1.0 for c in cues}))
        for cue_id in cues:
            block = bias1.finite[np.ix_(x_rows, layout.indices(Role.CUE, cue_id))]
            assert np.all(block == 0.0)
            assert not bias1.blocked[np.ix_(x_rows, layout.indices(Role.CUE, cue_id))].any()

        # (b) sigma = 0: x-row outputs equal cue-column-deleted attention (1e-12).
        sigmas = {c: 1.0 for c in cues}
        sigmas[probe] = 0.0
        bias0 = build_bias(layout, ModulationSpec(sigmas))
        full = attention(Q, K, V, bias0)
        keep = np.setdiff1d(np.arange(layout.total), layout.indices(Role.CUE, probe))
        trunc_layout = StreamLayout.from_counts(
            n_text, n_x, n_y, {c: n for c, n in cues.items() if c != probe}
        )
        trunc_bias = build_bias(trunc_layout, ModulationSpec({c: 1.0 for c in cues if c != probe}))
        truncated = attention(Q[keep], K[keep], V[keep], trunc_bias)
        np.testing.assert_allclose(
            full[x_rows], truncated[trunc_layout.indices(Role.NOISY_IMAGE)], atol=1e-12
        )

        # (c) cue rows place exactly zero weight outside their own cue.
        weights = attention_weights(Q, K, bias1)[0]
        for cue_id in cues:
            rows = layout.indices(Role.CUE, cue_id)
            outside = np.setdiff1d(np.arange(layout.total), rows)
            assert np.all(weights[np.ix_(rows, outside)] == 0.0)

        # (d) x->cue attention mass strictly monotone in sigma.
        masses = []
        for sigma in (0.25, 0.5, 1.0, 2.0, 4.0):
            sweep = {c: 1.0 for c in cues}
            sweep[probe] = sigma
            w = attention_weights(Q, K, build_bias(layout, ModulationSpec(sweep)))[0]
            masses.append(w[np.ix_(x_rows, layout.indices(Role.CUE, probe))].sum(axis=1))
        assert np.all(np.diff(np.stack(masses), axis=0) > 0)


@criterion("gradient check", budget_seconds=60)
def test_gradient_check():
    config = ToyModelConfig()  # the full-size toy model
    model = ToyDiT(config, seed=0)
    rng = np.random.default_rng(7)
    batch_size = 2
    targets = rng.uniform(0, 1, size=(batch_size, 16, 16, 3))
    cues = {"color": rng.uniform(0, 1, size=(batch_size, 16, 16, 3))}
    from layerkit.model import TrainBatch

    batch = TrainBatch(targets=targets, task_ids=np.zeros(batch_size, dtype=np.int64), cues=cues)
    t_fixed = rng.uniform(0.2, 0.8, size=batch_size)
    eps_fixed = rng.standard_normal(targets.shape)

    def loss_value():
        loss, _ = rf_loss(model, batch, rng, t=t_fixed, eps=eps_fixed)
        return loss

    loss = loss_value()
    loss.backward()
    names = sorted(model.params)
    choose = np.random.default_rng(17)
    picks = []
    while len(picks) < 20:
        name = names[int(choose.integers(0, len(names)))]
        p = model.params[name]
        if p.grad is None:
            continue
        idx = tuple(choose.integers(0, s) for s in p.value.shape)
        picks.append((name, idx))
    h = 1e-4
    for name, idx in picks:
        p = model.params[name]
        analytic = p.grad[idx]
        original = p.value[idx]
        p.value[idx] = original + h
        lp = loss_value().value.item()
        p.value[idx] = original - h
        lm = loss_value().value.item()
        p.value[idx] = original
        numeric = (lp - lm) / (2 * h)
        denom = max(abs(analytic), abs(numeric), 1e-10)
        assert abs(analytic - numeric) / denom < 1e-3, (name, idx, analytic, numeric)


@criterion("toy conditional-generation convergence", budget_seconds=900)
def test_toy_conditional_generation_convergence():
    config = ToyModelConfig()  # 2 blocks, d=64, 16x16, lr 1e-4
    model = ToyDiT(config, seed=0)
    task = ColorFieldTask(config)
    result = train(model, task, steps=2000, batch_size=8, seed=0)
    first = float(np.mean(result.losses[:100]))
    last = float(np.mean(result.losses[-100:]))
    assert last < 0.5 * first, (first, last)

    rng = np.random.default_rng(123)
    n = 32
    targets = np.empty((n, 16, 16, 3))
    cues = np.empty((n, 16, 16, 3))
    for i in range(n):
        targets[i], cues[i] = task.make_sample(rng)
    task_ids = np.full(n, TASK_COLOR_FIELD)
    noise = rng.standard_normal((n, 16, 16, 3))
    guided = sample(model, task_ids, cues={"color": cues}, strengths={"color": 1.0},
                    steps=20, initial_noise=noise)
    unguided = sample(model, task_ids, cues={"color": cues}, strengths={"color": 0.0},
                      steps=20, initial_noise=noise, strict_sigma_zero=True)
    l1_guided = np.mean([np.abs(degrade_color_map(guided[i], 16) - cues[i]).mean() for i in range(n)])
    l1_unguided = np.mean([np.abs(degrade_color_map(unguided[i], 16) - cues[i]).mean() for i in range(n)])
    assert l1_guided < 0.7 * l1_unguided, (l1_guided, l1_unguided)


@criterion("compositing formula suite")
def test_compositing_formula_suite():
    rng = np.random.default_rng(99)
    for _ in range(100):
        h, w = int(rng.integers(4, 24)), int(rng.integers(4, 24))
        e = rng.random((h, w))
        m_add = (rng.random((h, w)) > 0.5).astype(float)
        m_sub = (rng.random((h, w)) > 0.5).astype(float)
        e_sub = e * (1 - m_sub)
        want_e = e_sub + m_add * (1 - e_sub)
        np.testing.assert_allclose(composite_edge(e, m_add, m_sub), want_e, atol=1e-12)

        c = rng.random((h, w, 3))
        mask = (rng.random((h, w)) > 0.5).astype(float)
        color = tuple(rng.random(3))
        alpha = float(rng.random())
        got = composite_color(c, [ColorStroke(mask=mask, color=color, alpha=alpha)])
        m3 = mask[..., None]
        want_c = (1 - alpha * m3) * c + alpha * m3 * np.asarray(color)
        np.testing.assert_allclose(got, want_c, atol=1e-12)

    # Default alpha 0.4 honored end-to-end through the service.
    from fastapi.testclient import TestClient

    from layerkit.service import ServiceConfig, create_app

    base = np.stack([(np.indices((32, 32)).sum(axis=0) % 7) / 6.0] * 3, axis=-1)
    app = create_app(ServiceConfig(max_image_side=128))
    with TestClient(app) as client:
        created = client.post(
            "/sessions", json={"image_b64": base64.b64encode(save_png(base)).decode()}
        ).json()
        client.post(
            f"/sessions/{created['id']}/layers",
            json={"kind": "color",
                  "color_strokes": [{"points": [[4, 4], [28, 28]], "radius": 5.0,
                                     "color": "#00ff00"}]},  # alpha omitted -> 0.4
        )
        composite = client.post(f"/sessions/{created['id']}/composite").json()
    stored_base = load_png(save_png(base))
    spec = ColorStrokeSpec(points=((4.0, 4.0), (28.0, 28.0)), radius=5.0,
                           color=(0.0, 1.0, 0.0), alpha=0.4)
    want = flatten(LayerStack(32, 32, (ColorLayer("L1", strokes=(spec,)),)), stored_base)
    assert composite["digests"]["colors"] == content_digest(save_png(want.colors))


@criterion("homography suite")
def test_homography_suite():
    from layerkit.augment import (
        ForegroundPiece,
        sample_perspective,
        solve_homography,
        warp,
    )

    rng = np.random.default_rng(555)
    for _ in range(10_000):
        w, h = int(rng.integers(16, 200)), int(rng.integers(16, 200))
        src, dst = sample_perspective(w, h, rng)
        hom = solve_homography(src, dst)
        np.testing.assert_allclose(hom.apply(src), dst, atol=1e-9)

    image = rng.random((48, 64, 3))
    mask = np.zeros((48, 64))
    mask[12:36, 16:48] = 1.0
    piece = ForegroundPiece(image=image, mask=mask)
    for _ in range(20):
        src, dst = sample_perspective(64, 48, rng)
        hom = solve_homography(src, dst)
        back = warp(warp(piece, hom), hom.inverse())
        inter = (back.mask * piece.mask).sum()
        union = np.maximum(back.mask, piece.mask).sum()
        assert inter / union >= 0.95, inter / union


@criterion("mask-derivation oracle", budget_seconds=10)
def test_mask_derivation_oracle():
    rng = np.random.default_rng(31)
    src = np.clip(rng.normal(0.5, 0.05, size=(512, 512, 3)), 0, 1)
    edited = src.copy()
    edited[100:164, 200:264] = 1.0 - edited[100:164, 200:264]
    result = derive_mask(src, edited)
    assert isinstance(result, ChangeMask)
    square = np.zeros((512, 512), dtype=bool)
    square[100:164, 200:264] = True
    iou = (result.mask & square).sum() / (result.mask | square).sum()
    assert iou >= 0.9, iou
    assert abs(result.hull_area_ratio - 4096 / 262144) < 0.005

    big_src = np.clip(rng.normal(0.5, 0.05, size=(512, 512, 3)), 0, 1)
    big_edited = big_src.copy()
    big_edited[: int(512 * 0.95)] = 1.0 - big_edited[: int(512 * 0.95)]  # ~95% changed
    rejection = derive_mask(big_src, big_edited)
    assert isinstance(rejection, MaskRejection)
    assert rejection.reason == "too-large"


@criterion("statistical augmentation suite")
def test_statistical_augmentation_suite():
    from layerkit.augment import (
        sample_perspective_record,
        sample_relight_category,
        sample_resolution_record,
    )

    rng = np.random.default_rng(77)
    rhos = np.array([sample_perspective_record(64, 48, rng).rho for _ in range(10_000)])
    assert rhos.min() >= 0.1 and rhos.max() <= 0.3
    assert kstest(rhos, "uniform", args=(0.1, 0.2)).statistic < 0.02

    scales = np.array([sample_resolution_record(rng).scale for _ in range(10_000)])
    assert scales.min() >= 0.15 and scales.max() <= 0.9
    assert kstest(scales, "uniform", args=(0.15, 0.75)).statistic < 0.02

    counts = {"grayscale": 0, "low_saturation": 0, "high_saturation": 0}
    n = 10_000
    for _ in range(n):
        counts[sample_relight_category(rng)] += 1
    for name, want in (("grayscale", 0.5), ("low_saturation", 0.3), ("high_saturation", 0.2)):
        assert abs(counts[name] / n - want) < 0.02, (name, counts[name] / n)


@criterion("metrics suite")
def test_metrics_suite():
    rng = np.random.default_rng(13)
    a = rng.random((16, 16, 3))
    assert l1(a, a) == 0.0 and l2(a, a) == 0.0
    x = np.full((8, 8), 0.5)
    y = np.full((8, 8), 0.6)
    assert abs(l1(x, y) - 0.1) < 1e-12
    assert abs(l2(x, y) - 0.01) < 1e-12
    assert abs(psnr(np.zeros((4, 4)), np.full((4, 4), 0.1)) - 20.0) < 1e-9
    assert abs(psnr(np.zeros((4, 4)), np.full((4, 4), 0.01)) - 40.0) < 1e-9
    assert psnr(a, a) == float("inf")
    assert ssim(a[..., 0], a[..., 0]) == 1.0

    for _ in range(100):
        p, q = rng.random((12, 12, 3)), rng.random((12, 12, 3))
        assert l1(p, q) == l1(q, p)
        assert l2(p, q) == l2(q, p)
        assert psnr(p, q) == psnr(q, p)
        assert abs(ssim(p, q) - ssim(q, p)) < 1e-12


@criterion("manifest replay")
def test_manifest_replay(tmp_path):
    import json as json_mod

    from layerkit.dataset import BuilderConfig, build_dataset, read_manifest, verify_replay

    rng = np.random.default_rng(2025)
    input_dir = tmp_path / "inputs"
    (input_dir / "images").mkdir(parents=True)
    (input_dir / "masks").mkdir(parents=True)
    captions = {}
    for i in range(50):
        image = rng.random((64, 64, 3))
        mask = np.zeros((64, 64))
        y0, x0 = rng.integers(4, 28, size=2)
        mask[y0 : y0 + 24, x0 : x0 + 24] = 1.0
        save_png(image, input_dir / "images" / f"s{i:02d}.png")
        save_png(mask, input_dir / "masks" / f"s{i:02d}.png")
        captions[f"s{i:02d}"] = f"sample {i}"
    (input_dir / "captions.json").write_text(json_mod.dumps(captions))

    out_dir = tmp_path / "out"
    manifest, stats = build_dataset(
        "content", input_dir, out_dir, seed=42,
        config=BuilderConfig(augment_probability=0.7),
    )
    assert stats.succeeded == 50
    assert len(read_manifest(manifest)) == 50
    mismatches = verify_replay(manifest)
    assert mismatches == [], mismatches
