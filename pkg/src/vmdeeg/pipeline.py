"""End-to-end classification experiments over Bonn-style set collections.

Every signal is decomposed once per VMD configuration; the per-mode feature
vectors of each signal feed one MLP per feature kind. The ranked classifier
takes the majority vote of the SODP, FODP and amplitude networks.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from vmdeeg.features import FEATURE_KINDS, extract, write_ellipses, write_point_cloud
from vmdeeg.mlp import LabeledDataset, TrainConfig, fit_classifier, predict
from vmdeeg.signal_io import BONN_SET_IDS, DataError, Signal, SignalCollection, SplitSpec, split
from vmdeeg.vmd import ModeSet, VmdConfig, decompose, mode_spectra

logger = logging.getLogger(__name__)

RANKED_KINDS = ("sodp-area", "fodp-area", "avg-amplitude")
HIDDEN_LAYERS = (10, 10)
_CACHE_VERSION = 1


@dataclass(frozen=True)
class TaskSpec:
    name: str
    class_map: Mapping[str, int]

    def __post_init__(self):
        classes = set(self.class_map.values())
        if classes != {0, 1}:
            raise ValueError(f"task {self.name}: both classes 0 and 1 need at least one set")

    @property
    def set_ids(self) -> tuple[str, ...]:
        order = {sid: i for i, sid in enumerate(BONN_SET_IDS)}
        return tuple(sorted(self.class_map, key=lambda s: (order.get(s, len(order)), s)))


TASKS = {
    t.name: t
    for t in (
        TaskSpec("normal-vs-seizure", {"Z": 0, "O": 0, "S": 1}),
        TaskSpec("seizure-vs-seizure-free", {"N": 0, "F": 0, "S": 1}),
        TaskSpec("seizure-vs-non-seizure", {"Z": 0, "O": 0, "N": 0, "F": 0, "S": 1}),
    )
}


@dataclass
class TrialRow:
    iteration: int
    accuracy: float
    n_test: int
    n_correct: int
    recall: list[float]
    feature_accuracy: dict[str, float] = field(default_factory=dict)
    split_seed: int | None = None
    train_seed: int = 0


@dataclass
class ExperimentReport:
    task: str
    feature_kinds: list[str]
    rows: list[TrialRow]
    split: dict
    vmd_config: dict
    train_config: dict
    ellipse_variant: str = "standard"

    @property
    def average(self) -> float | None:
        if not self.rows:
            return None
        return float(np.mean([r.accuracy for r in self.rows]))

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["average"] = self.average
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentReport:
        d = dict(d)
        d.pop("average", None)
        d["rows"] = [TrialRow(**r) for r in d["rows"]]
        return cls(**d)


class ModeCache:
    """Decompositions keyed by signal content and VMD configuration.

    Held in memory and, when ``directory`` is given, persisted as ``.npz``.
    """

    def __init__(self, vmd_cfg: VmdConfig, directory=None, workers: int = 1):
        self.vmd_cfg = vmd_cfg
        self.directory = Path(directory) if directory is not None else None
        self.workers = workers
        self._memory: dict[str, ModeSet] = {}
        self._cfg_blob = json.dumps(vmd_cfg.to_dict(), sort_keys=True).encode()

    def key(self, signal: Signal) -> str:
        h = hashlib.sha256()
        h.update(f"v{_CACHE_VERSION}".encode())
        h.update(self._cfg_blob)
        h.update(np.ascontiguousarray(signal.samples, dtype="<f8").tobytes())
        return h.hexdigest()

    def get(self, signal: Signal) -> ModeSet:
        key = self.key(signal)
        if key not in self._memory:
            modes = self._load(key)
            if modes is None:
                modes = decompose(signal, self.vmd_cfg)
                self._store(key, modes)
            self._memory[key] = modes
        return _with_meta(self._memory[key], signal)

    def prefetch(self, signals: Iterable[Signal]) -> None:
        """Decompose all uncached signals, in parallel when ``workers > 1``."""
        pending = {}
        for s in signals:
            key = self.key(s)
            if key in self._memory or key in pending:
                continue
            cached = self._load(key)
            if cached is not None:
                self._memory[key] = cached
            else:
                pending[key] = s
        if not pending:
            return
        if self.workers > 1 and len(pending) > 1:
            with ProcessPoolExecutor(self.workers) as pool:
                results = pool.map(decompose, pending.values(), [self.vmd_cfg] * len(pending))
                computed = dict(zip(pending, results))
        else:
            computed = {key: decompose(s, self.vmd_cfg) for key, s in pending.items()}
        for key, modes in computed.items():
            self._store(key, modes)
            self._memory[key] = modes

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.npz"

    def _load(self, key: str) -> ModeSet | None:
        if self.directory is None or not self._path(key).exists():
            return None
        with np.load(self._path(key)) as z:
            return ModeSet(
                z["modes"],
                z["center_freqs"],
                int(z["iterations_used"]),
                float(z["final_residual"]),
                float(z["final_change"]),
                bool(z["degenerate"]),
            )

    def _store(self, key: str, modes: ModeSet) -> None:
        if self.directory is None:
            return
        self.directory.mkdir(parents=True, exist_ok=True)
        np.savez(
            self._path(key),
            modes=modes.modes,
            center_freqs=modes.center_freqs,
            iterations_used=modes.iterations_used,
            final_residual=modes.final_residual,
            final_change=modes.final_change,
            degenerate=modes.degenerate,
        )


def _with_meta(modes: ModeSet, signal: Signal) -> ModeSet:
    return dataclasses.replace(
        modes,
        sample_rate_hz=signal.sample_rate_hz,
        label=signal.label,
        source_id=signal.source_id,
    )


def majority_vote(votes: Sequence[int]) -> int:
    if len(votes) != 3:
        raise ValueError(f"need exactly 3 votes, got {len(votes)}")
    if any(v not in (0, 1) for v in votes):
        raise ValueError("votes must be binary class indices")
    return int(sum(votes) >= 2)


def _set_split_spec(spec: SplitSpec, set_id: str) -> SplitSpec:
    # each set gets its own permutation, derived from the split seed and set name
    if spec.mode != "random":
        return spec
    entropy = [spec.seed, *set_id.encode()]
    seed = int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])
    return dataclasses.replace(spec, seed=seed)


def split_task(
    task: TaskSpec, data: Mapping[str, SignalCollection], spec: SplitSpec
) -> tuple[list[tuple[Signal, int]], list[tuple[Signal, int]]]:
    """Per-set train/test division, labelled with the task's class indices."""
    train, test = [], []
    for sid in task.set_ids:
        if sid not in data:
            raise DataError(f"task {task.name} needs set {sid}, which is not loaded")
        tr, te = split(data[sid], _set_split_spec(spec, sid))
        cls = task.class_map[sid]
        train += [(s, cls) for s in tr]
        test += [(s, cls) for s in te]
    train_ids = {id(s) for s, _ in train}
    if any(id(s) in train_ids for s, _ in test):
        raise AssertionError("train and test sets overlap")
    return train, test


def _feature_matrix(items, kind: str, cache: ModeCache, variant: str) -> np.ndarray:
    return np.stack([extract(cache.get(s), kind, variant).values for s, _ in items])


def evaluate(
    train: Sequence[tuple[Signal, int]],
    test: Sequence[tuple[Signal, int]],
    kinds: Sequence[str],
    cache: ModeCache,
    train_cfg: TrainConfig,
    variant: str = "standard",
    iteration: int = 1,
    split_seed: int | None = None,
) -> TrialRow:
    """Train one MLP per feature kind and score the test signals.

    With one kind the prediction is that network's; with three it is the
    majority vote.
    """
    if len(kinds) not in (1, 3):
        raise ValueError("use one feature kind or three for the majority vote")
    for kind in kinds:
        if kind not in FEATURE_KINDS:
            raise ValueError(f"unknown feature kind {kind!r}")
    cache.prefetch([s for s, _ in train] + [s for s, _ in test])
    y_train = np.array([c for _, c in train])
    y_test = np.array([c for _, c in test])
    predictions = {}
    for kind in kinds:
        x_train = _feature_matrix(train, kind, cache, variant)
        x_test = _feature_matrix(test, kind, cache, variant)
        model, _ = fit_classifier(LabeledDataset(x_train, y_train), HIDDEN_LAYERS, train_cfg)
        predictions[kind] = np.atleast_1d(predict(model, x_test))
    if len(kinds) == 1:
        final = predictions[kinds[0]]
    else:
        stacked = np.stack([predictions[k] for k in kinds], axis=1)
        final = np.array([majority_vote(v) for v in stacked])
    n_test = len(test)
    correct = int(np.sum(final == y_test))
    recall = []
    for cls in (0, 1):
        mask = y_test == cls
        recall.append(float(100.0 * np.mean(final[mask] == cls)) if mask.any() else float("nan"))
    per_kind = {k: float(100.0 * np.mean(p == y_test)) for k, p in predictions.items()}
    return TrialRow(
        iteration=iteration,
        accuracy=100.0 * correct / n_test,
        n_test=n_test,
        n_correct=correct,
        recall=recall,
        feature_accuracy=per_kind,
        split_seed=split_seed,
        train_seed=train_cfg.seed,
    )


def _report(task, kinds, rows, split_spec, vmd_cfg, train_cfg, variant, **split_extra):
    split_info = dataclasses.asdict(split_spec)
    split_info.update(split_extra)
    return ExperimentReport(
        task=task.name,
        feature_kinds=list(kinds),
        rows=rows,
        split=split_info,
        vmd_config=vmd_cfg.to_dict(),
        train_config=train_cfg.to_dict(),
        ellipse_variant=variant,
    )


def _cache_for(vmd_cfg: VmdConfig, cache: ModeCache | None) -> ModeCache:
    if cache is None:
        return ModeCache(vmd_cfg)
    if cache.vmd_cfg != vmd_cfg:
        raise ValueError("cache was built for a different VMD configuration")
    return cache


def run_single_feature(
    task: TaskSpec,
    kind: str,
    split_spec: SplitSpec,
    vmd_cfg: VmdConfig,
    train_cfg: TrainConfig,
    data: Mapping[str, SignalCollection],
    cache: ModeCache | None = None,
    variant: str = "standard",
) -> ExperimentReport:
    cache = _cache_for(vmd_cfg, cache)
    train, test = split_task(task, data, split_spec)
    seed = split_spec.seed if split_spec.mode == "random" else None
    row = evaluate(train, test, [kind], cache, train_cfg, variant, split_seed=seed)
    return _report(task, [kind], [row], split_spec, vmd_cfg, train_cfg, variant)


def run_ranked(
    task: TaskSpec,
    split_spec: SplitSpec,
    vmd_cfg: VmdConfig,
    train_cfg: TrainConfig,
    data: Mapping[str, SignalCollection],
    cache: ModeCache | None = None,
    variant: str = "standard",
) -> ExperimentReport:
    cache = _cache_for(vmd_cfg, cache)
    train, test = split_task(task, data, split_spec)
    seed = split_spec.seed if split_spec.mode == "random" else None
    row = evaluate(train, test, RANKED_KINDS, cache, train_cfg, variant, split_seed=seed)
    return _report(task, RANKED_KINDS, [row], split_spec, vmd_cfg, train_cfg, variant)


def run_randomized_trials(
    task: TaskSpec,
    iterations: int,
    base_seed: int,
    vmd_cfg: VmdConfig,
    train_cfg: TrainConfig,
    data: Mapping[str, SignalCollection],
    cache: ModeCache | None = None,
    train_count: int = 80,
    kinds: Sequence[str] = RANKED_KINDS,
    variant: str = "standard",
) -> ExperimentReport:
    """Repeat the classification with fresh random splits.

    Trial ``i`` (1-based) seeds both its split and its network initialization
    with ``base_seed + i - 1``.
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    cache = _cache_for(vmd_cfg, cache)
    rows = []
    for i in range(1, iterations + 1):
        seed = base_seed + i - 1
        spec = SplitSpec("random", train_count, seed)
        trial_cfg = dataclasses.replace(train_cfg, seed=seed)
        train, test = split_task(task, data, spec)
        rows.append(evaluate(train, test, kinds, cache, trial_cfg, variant, i, seed))
        logger.info("%s trial %d: %.2f%%", task.name, i, rows[-1].accuracy)
    base_spec = SplitSpec("random", train_count, base_seed)
    return _report(
        task, kinds, rows, base_spec, vmd_cfg, train_cfg, variant, iterations=iterations
    )


def export_report(reports, path) -> tuple[Path, Path]:
    """Write accuracies as CSV (one row per iteration, one column per task)
    plus a JSON sidecar holding the full reports and configuration."""
    if isinstance(reports, ExperimentReport):
        reports = [reports]
    path = Path(path)
    json_path = path.with_suffix(".json")
    n_rows = max((len(r.rows) for r in reports), default=0)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration"] + [r.task for r in reports])
        for i in range(n_rows):
            writer.writerow(
                [i + 1] + [repr(r.rows[i].accuracy) if i < len(r.rows) else "" for r in reports]
            )
        if n_rows:
            writer.writerow(["average"] + [repr(r.average) for r in reports])
    json_path.write_text(json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True) + "\n")
    return path, json_path


def load_reports(path) -> list[ExperimentReport]:
    path = Path(path)
    if path.suffix != ".json":
        path = path.with_suffix(".json")
    return [ExperimentReport.from_dict(d) for d in json.loads(path.read_text())]


def dump_modes(signal: Signal, vmd_cfg: VmdConfig, out_dir, mode_set: ModeSet | None = None) -> Path:
    """Mode waveforms as CSV ``mode,t,value`` with ``t`` in seconds."""
    mode_set = mode_set or decompose(signal, vmd_cfg)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{signal.source_id or 'signal'}_modes.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["mode", "t", "value"])
        dt = 1.0 / signal.sample_rate_hz
        for k, mode in enumerate(mode_set.modes):
            for n, v in enumerate(mode):
                writer.writerow([k, repr(n * dt), repr(float(v))])
    return path


def dump_spectra(signal: Signal, vmd_cfg: VmdConfig, out_dir, mode_set: ModeSet | None = None) -> Path:
    """One-sided mode spectra as CSV ``mode,freq_hz,power``."""
    mode_set = mode_set or _with_meta(decompose(signal, vmd_cfg), signal)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{signal.source_id or 'signal'}_spectra.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["mode", "freq_hz", "power"])
        for k, psd in enumerate(mode_spectra(mode_set)):
            for f, p in zip(psd.freqs_hz, psd.powers):
                writer.writerow([k, repr(float(f)), repr(float(p))])
    return path


def dump_sodp(
    signal: Signal,
    lag: int,
    vmd_cfg: VmdConfig,
    out_dir,
    variant: str = "standard",
    mode_set: ModeSet | None = None,
) -> Path:
    """Difference-plot points (``mode,n,x,y``) plus an ellipse summary file."""
    mode_set = mode_set or decompose(signal, vmd_cfg)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = "sodp" if lag == 1 else "fodp"
    stem = signal.source_id or "signal"
    path = out_dir / f"{stem}_{name}.csv"
    ellipses = write_point_cloud(mode_set, lag, path, variant)
    write_ellipses(ellipses, out_dir / f"{stem}_{name}_ellipses.csv")
    return path
