"""Finite-time basin classification and intermingled-basin rasters.

Basin membership is an asymptotic statement; the classifier uses the
finite-time proxy "t stayed within delta of a boundary circle for `window`
consecutive steps before n_max ran out".  UNDECIDED is a first-class label.
The proxy parameters are config knobs and are stamped into every output.

The kernels iterate in symmetry-adapted coordinates, so for the classic
map the label of (theta + 1/2, 1 - t) is the exact mirror of the label of
(theta, t) whenever the two start states convert to mirrored kernel states
(raster cell centers on power-of-two grids do, exactly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from kanlab._backend import get_kernels
from kanlab._parallel import parallel_map
from kanlab.skew import KanSystem

BASIN0 = 0
BASIN1 = 1
UNDECIDED = 2

PGM_BYTES = {BASIN0: 0, BASIN1: 255, UNDECIDED: 128}

RASTER_CHUNK_ROWS = 16  # fixed task size so output cannot depend on workers


@dataclass(frozen=True)
class BasinParams:
    n_max: int = 5000
    delta: float = 1e-6
    window: int = 50

    def to_config(self) -> dict:
        return {"n_max": self.n_max, "delta": self.delta, "window": self.window}


def classify(sys: KanSystem, theta: float, t: float, params: BasinParams) -> tuple[int, int]:
    """Label one point; returns (label, hitting_time)."""
    kern = get_kernels()
    label, steps = kern.classify_point(
        sys.kernel_params(), float(theta), float(t), params.n_max, params.delta, params.window
    )
    if label == 3:
        raise RuntimeError(f"invariance violation while classifying ({theta}, {t})")
    return label, steps


def classify_many(sys: KanSystem, thetas, ts, params: BasinParams, workers: int = 1):
    """Vector classify; returns (labels, hitting_times) arrays."""
    kern = get_kernels()
    thetas = np.asarray(thetas, dtype=float)
    ts = np.asarray(ts, dtype=float)
    if workers <= 1:
        labels, steps = kern.classify_block(
            sys.kernel_params(), thetas, ts, params.n_max, params.delta, params.window
        )
    else:
        nch = max(1, math.ceil(len(thetas) / (workers * 4)))
        tasks = [
            (sys, thetas[i : i + nch], ts[i : i + nch], params)
            for i in range(0, len(thetas), nch)
        ]
        parts = parallel_map(_classify_task, tasks, workers)
        labels = np.concatenate([p[0] for p in parts])
        steps = np.concatenate([p[1] for p in parts])
    if np.any(labels == 3):
        bad = int(np.argmax(labels == 3))
        raise RuntimeError(f"invariance violation while classifying ({thetas[bad]}, {ts[bad]})")
    return labels, steps


def _classify_task(args):
    sys, thetas, ts, params = args
    kern = get_kernels()
    return kern.classify_block(sys.kernel_params(), thetas, ts, params.n_max, params.delta, params.window)


@dataclass(frozen=True)
class BasinRaster:
    labels: np.ndarray  # shape (height, width), row j <-> t=(j+1/2)/height
    hitting: np.ndarray  # same shape, window-fire step (n_max where undecided)
    params: BasinParams

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def fractions(self) -> tuple[float, float, float]:
        total = self.labels.size
        f0 = float(np.count_nonzero(self.labels == BASIN0)) / total
        f1 = float(np.count_nonzero(self.labels == BASIN1)) / total
        return f0, f1, 1.0 - f0 - f1


def _raster_task(args):
    sys, width, height, j0, j1, params = args
    kern = get_kernels()
    return kern.raster_rows(sys.kernel_params(), width, height, j0, j1, params.n_max, params.delta, params.window)


def compute_raster(sys: KanSystem, width: int, height: int, params: BasinParams, workers: int = 1) -> BasinRaster:
    """Per-cell classification at cell centers; deterministic for any worker count."""
    tasks = [
        (sys, width, height, j0, min(j0 + RASTER_CHUNK_ROWS, height), params)
        for j0 in range(0, height, RASTER_CHUNK_ROWS)
    ]
    parts = parallel_map(_raster_task, tasks, workers)
    labels = np.concatenate([p[0] for p in parts]).reshape(height, width)
    hitting = np.concatenate([p[1] for p in parts]).reshape(height, width)
    if np.any(labels == 3):
        raise RuntimeError("invariance violation inside raster")
    return BasinRaster(labels, hitting, params)


def involution_agreement(raster: BasinRaster) -> float:
    """Fraction of decided symmetric pixel pairs with mirrored labels.

    The involution S(theta,t) = (theta+1/2, 1-t) maps cell (i,j) to
    (i + W/2 mod W, H-1-j); labels should swap BASIN0 <-> BASIN1.
    Returns 1.0 when there are no decided pairs.
    """
    lab = raster.labels
    h, w = lab.shape
    if w % 2:
        raise ValueError("involution pairing needs even raster width")
    mirrored = np.roll(lab[::-1, :], w // 2, axis=1)
    decided = (lab != UNDECIDED) & (mirrored != UNDECIDED)
    if not decided.any():
        return 1.0
    agree = (lab[decided] ^ 1) == mirrored[decided]
    return float(np.mean(agree))


@dataclass(frozen=True)
class IntermingledReport:
    passed: bool
    cells_theta: int
    cells_t: int
    interior_cells: int
    failing: tuple[tuple[int, int], ...]  # (i_theta, j_t) of cells missing a label


def intermingled_test(raster: BasinRaster, cells_theta: int = 32, cells_t: int = 16) -> IntermingledReport:
    """Finite proxy for intermingledness: every coarse cell strictly inside
    the open cylinder must contain at least one decided pixel of each label."""
    if raster.width < 16 * cells_theta or raster.height < 16 * cells_t:
        raise ValueError("raster must be at least 16x the coarse partition in each axis")
    lab = raster.labels
    wstep = raster.width / cells_theta
    hstep = raster.height / cells_t
    failing = []
    interior = 0
    for jc in range(1, cells_t - 1):  # strictly inside (0,1) in t
        r0, r1 = int(round(jc * hstep)), int(round((jc + 1) * hstep))
        for ic in range(cells_theta):
            c0, c1 = int(round(ic * wstep)), int(round((ic + 1) * wstep))
            block = lab[r0:r1, c0:c1]
            interior += 1
            if not ((block == BASIN0).any() and (block == BASIN1).any()):
                failing.append((ic, jc))
    return IntermingledReport(not failing, cells_theta, cells_t, interior, tuple(failing))


@dataclass(frozen=True)
class CoverageCurve:
    n_values: tuple[int, ...]
    undecided_fraction: tuple[float, ...]
    sample_size: int
    seed: int


def coverage_curve(
    sys: KanSystem,
    sample_size: int,
    n_values,
    params: BasinParams,
    seed: int = 0,
    workers: int = 1,
) -> CoverageCurve:
    """Undecided fraction vs iteration budget, over seeded random points.

    One classifier run at the largest budget provides every smaller budget:
    a point is undecided at N iff its window never fired by step N.
    """
    if sample_size < 1:
        raise ValueError("sample size must be positive")
    n_values = tuple(int(n) for n in n_values)
    rng = np.random.Generator(np.random.Philox(key=seed))
    thetas = rng.random(sample_size)
    ts = rng.random(sample_size)
    big = BasinParams(n_max=max(max(n_values), 1), delta=params.delta, window=params.window)
    labels, steps = classify_many(sys, thetas, ts, big, workers)
    fractions = []
    for n in n_values:
        if n <= 0:
            fractions.append(1.0)
            continue
        undecided = (labels == UNDECIDED) | (steps > n)
        fractions.append(float(np.mean(undecided)))
    return CoverageCurve(n_values, tuple(fractions), sample_size, seed)


def write_pgm(path, raster: BasinRaster) -> None:
    """8-bit binary PGM: 0=BASIN0, 255=BASIN1, 128=UNDECIDED.

    Image row 0 is the top of the cylinder (t near 1)."""
    lut = np.zeros(256, dtype=np.uint8)
    lut[BASIN0] = PGM_BYTES[BASIN0]
    lut[BASIN1] = PGM_BYTES[BASIN1]
    lut[UNDECIDED] = PGM_BYTES[UNDECIDED]
    img = lut[raster.labels[::-1, :]]
    with open(path, "wb") as fh:
        fh.write(f"P5\n{raster.width} {raster.height}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
