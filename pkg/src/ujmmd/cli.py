"""Command-line front end: ``ujmmd {run,shift,ablate,check}``.

Experiments are described by a small INI-style file::

    [experiment]
    preset = WC,WC*
    seed = 0-9
    dim = 4

    [synthetic]            # or one or more [task NAME] sections with file paths
    classes = 4
    per_class_source = 40
    ...

Every ``[experiment]`` key can be overridden by the command-line flag of the
same name; the flag wins. Without ``--config`` the bundled ``synthetic.ini``
is used; ``--config NAME`` also accepts the name of a bundled config.
"""

import argparse
import csv
import io
import json
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Dict, List, Tuple

import numpy as np

from ._validation import ValidationError
from .checks import run_checks
from .data import (
    DataFormatError,
    DomainPair,
    generate_synthetic,
    load_domain,
    normalize_features,
    simulate_label_shift,
)
from .kernels import KernelSpec
from .pipeline import (
    PRESET_NAMES,
    method_from_preset,
    run_da,
    run_label_shift_experiment,
)
from .solver import SolverError

CSV_FIELDS = ("task", "preset", "seed", "final_accuracy", "feature_distance", "hsi")
BUNDLED = ("synthetic", "synthetic_label_shift", "identical")


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# Config file
# --------------------------------------------------------------------------

_SECTION = re.compile(r"^\[\s*([^\]]+?)\s*\]$")


def parse_config_text(text, origin="<config>"):
    """Parse ``[section]`` / ``key = value`` text into ``{section: {key: (value, line)}}``."""
    sections: Dict[str, Dict[str, Tuple[str, int]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            current = sections.setdefault(m.group(1), {})
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        if current is None:
            raise ConfigError(f"{origin}:{lineno}: key outside of any [section]")
        key, value = (s.strip() for s in line.split("=", 1))
        current[key] = (value, lineno)
    return sections


def read_config(path):
    if path is None:
        path = "synthetic"
    if path in BUNDLED:
        text = resources.files("ujmmd").joinpath("configs", f"{path}.ini").read_text()
        return parse_config_text(text, f"<bundled {path}.ini>"), f"<bundled {path}.ini>"
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config_text(text, str(path)), str(path)


def parse_seeds(text):
    seeds = []
    for part in str(text).split(","):
        part = part.strip()
        if re.fullmatch(r"\d+-\d+", part):
            lo, hi = map(int, part.split("-"))
            seeds.extend(range(lo, hi + 1))
        else:
            seeds.append(int(part))
    return seeds


def _bool(text):
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int_list(text, n):
    vals = [int(v) for v in str(text).split(",")]
    if len(vals) == 1:
        vals = vals * n
    if len(vals) != n:
        raise ValueError(f"expected 1 or {n} comma-separated counts")
    return vals


# key -> (converter, default)
EXPERIMENT_KEYS = {
    "preset": (lambda s: [p.strip() for p in s.split(",") if p.strip()], None),
    "seed": (parse_seeds, [0]),
    "repeats": (int, 10),
    "out": (str, None),
    "format": (str, "csv"),
    "delta": (float, None),
    "lambda": (float, None),
    "dim": (int, None),
    "iters": (int, None),
    "kernel": (str, "linear"),
    "bandwidth": (float, None),
    "ridge": (float, None),
    "scale": (str, "small"),
    "knn_k": (int, 1),
    "normalize": (str, "none"),
    "normalize_mmd": (_bool, False),
    "label_shift": (_bool, False),
    "drop_fraction": (float, 0.5),
}


@dataclass
class Task:
    name: str
    make_pair: Callable[[int], DomainPair]


@dataclass
class ExperimentConfig:
    tasks: List[Task]
    settings: Dict[str, object] = field(default_factory=dict)

    def __getitem__(self, key):
        return self.settings[key]

    def method(self, preset):
        s = self.settings
        return method_from_preset(
            preset,
            scale=s["scale"],
            delta=s["delta"],
            lam=s["lambda"],
            n_components=s["dim"],
            n_iter=s["iters"],
            kernel=KernelSpec(family=s["kernel"], bandwidth=s["bandwidth"]),
            knn_k=s["knn_k"],
            ridge=s["ridge"],
            normalize_mmd=s["normalize_mmd"],
        )


def _convert(key, raw, where):
    conv, _ = EXPERIMENT_KEYS[key]
    try:
        return conv(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from None


def _synthetic_task(section, origin):
    def get(key, conv, default=None):
        if key not in section:
            if default is None:
                raise ConfigError(f"{origin}: [synthetic] is missing {key!r}")
            return default
        value, line = section[key]
        try:
            return conv(value)
        except ValueError as exc:
            raise ConfigError(f"{origin}:{line}: bad value for {key!r}: {exc}") from None

    C = get("classes", int)
    spec = dict(
        n_classes=C,
        per_class_source=get("per_class_source", lambda s: _int_list(s, C)),
        per_class_target=get("per_class_target", lambda s: _int_list(s, C)),
        dim=get("feature_dim", int),
        class_separation=get("separation", float),
        domain_shift=get("shift", float),
        class_shift=get("class_shift", float, 0.0),
    )
    identical = get("identical", _bool, False)

    def make(seed):
        pair = generate_synthetic(seed=seed, **spec)
        if identical:
            pair = DomainPair(
                pair.source_features, pair.source_labels, pair.source_features.copy(),
                pair.n_classes, target_truth=pair.source_labels.copy(),
            )
        return pair

    return Task("synthetic", make)


def _file_task(name, section, origin, normalize, base_dir):
    def path(key, required=True):
        if key not in section:
            if required:
                raise ConfigError(f"{origin}: [task {name}] is missing {key!r}")
            return None
        return os.path.join(base_dir, os.path.expanduser(section[key][0]))

    classes = int(section["classes"][0]) if "classes" in section else None
    Xs, ys = load_domain(path("source_features"), path("source_labels"), classes)
    Xt, yt = load_domain(path("target_features"), path("target_labels", False), classes)
    if classes is None:
        classes = int(max(ys.max(), -1 if yt is None else yt.max())) + 1
    pair = DomainPair(
        normalize_features(Xs, normalize), ys, normalize_features(Xt, normalize),
        classes, target_truth=yt,
    )
    return Task(name, lambda seed: pair)


def build_config(sections, origin, overrides, base_dir="."):
    exp = sections.get("experiment", {})
    settings = {}
    for key, (_, default) in EXPERIMENT_KEYS.items():
        if overrides.get(key) is not None:
            settings[key] = _convert(key, overrides[key], f"--{key}")
        elif key in exp:
            value, line = exp[key]
            settings[key] = _convert(key, value, f"{origin}:{line}")
        else:
            settings[key] = default
    unknown = set(exp) - set(EXPERIMENT_KEYS)
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"{origin}:{exp[key][1]}: unknown [experiment] key {key!r}")
    if settings["format"] not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {settings['format']!r}")
    if settings["normalize"] not in ("none", "l2", "zscore"):
        raise ConfigError(f"normalize must be none, l2 or zscore, got {settings['normalize']!r}")
    for p in settings["preset"] or []:
        if p not in PRESET_NAMES:
            raise ConfigError(
                f"unknown preset {p!r}; valid presets: {', '.join(PRESET_NAMES)}"
            )

    task_sections = {k: v for k, v in sections.items() if k.startswith("task ")}
    has_synth = "synthetic" in sections
    if has_synth == bool(task_sections):
        raise ConfigError(f"{origin}: give exactly one of [synthetic] or [task NAME] sections")
    if has_synth:
        tasks = [_synthetic_task(sections["synthetic"], origin)]
    else:
        tasks = [
            _file_task(k[5:].strip(), v, origin, settings["normalize"], base_dir)
            for k, v in task_sections.items()
        ]
    return ExperimentConfig(tasks=tasks, settings=settings)


# --------------------------------------------------------------------------
# Result tables
# --------------------------------------------------------------------------


def _preset_rank(preset):
    return PRESET_NAMES.index(preset) if preset in PRESET_NAMES else len(PRESET_NAMES)


def _aggregate(task, preset, results):
    acc = [r.final_accuracy for r in results if r.final_accuracy is not None]

    def stats(vals):
        if not vals:
            return None, None
        return float(np.mean(vals)), float(np.std(vals))

    return {
        "task": task,
        "preset": preset,
        "seed": "aggregate",
        "n_runs": len(results),
        "final_accuracy": stats(acc)[0],
        "final_accuracy_std": stats(acc)[1],
        "feature_distance": stats([r.feature_distance for r in results])[0],
        "feature_distance_std": stats([r.feature_distance for r in results])[1],
        "hsi": stats([r.hsi for r in results])[0],
        "hsi_std": stats([r.hsi for r in results])[1],
    }


def assemble_table(keyed):
    """Deterministic rows from ``{(task_index, task, preset, seed): RunResult}``."""
    groups = {}
    for (ti, task, preset, seed), res in keyed.items():
        groups.setdefault((ti, task, preset), []).append((seed, res))
    rows = []
    for ti, task, preset in sorted(groups, key=lambda k: (k[0], _preset_rank(k[2]), k[2])):
        runs = sorted(groups[(ti, task, preset)], key=lambda sr: sr[0])
        rows.extend(res.to_record(task) for _, res in runs)
        rows.append(_aggregate(task, preset, [r for _, r in runs]))
    return rows


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def table_to_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for row in rows:
        writer.writerow([_fmt(row.get(k)) for k in CSV_FIELDS])
        if row["seed"] == "aggregate":
            std = dict(row, seed="aggregate_std", final_accuracy=row["final_accuracy_std"],
                       feature_distance=row["feature_distance_std"], hsi=row["hsi_std"])
            writer.writerow([_fmt(std.get(k)) for k in CSV_FIELDS])
    return buf.getvalue()


def format_table(rows):
    """Fixed-width text table; aggregate rows show mean +/- std."""
    head = f"{'task':<16} {'preset':<12} {'seed':<10} {'accuracy':>16} {'feat_dist':>12} {'hsi':>12}"
    lines = [head, "-" * len(head)]
    for r in rows:
        acc = r["final_accuracy"]
        if r["seed"] == "aggregate" and acc is not None:
            acc_s = f"{acc:.4f}+/-{r['final_accuracy_std']:.4f}"
        else:
            acc_s = "" if acc is None else f"{acc:.4f}"
        lines.append(
            f"{r['task']:<16.16} {r['preset']:<12} {str(r['seed']):<10} {acc_s:>16} "
            f"{r['feature_distance']:>12.5g} {r['hsi']:>12.5g}"
        )
    return "\n".join(lines)


def write_output(rows, path, fmt):
    text = json.dumps(rows, indent=2) if fmt == "json" else table_to_csv(rows)
    with open(path, "w") as fh:
        fh.write(text)


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def _workers():
    try:
        return max(1, int(os.environ.get("UJMMD_THREADS", "1")))
    except ValueError:
        return 1


def _fan_out(jobs):
    """Run ``{key: thunk}`` with up to UJMMD_THREADS workers; returns ``{key: result}``."""
    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        futures = {key: pool.submit(fn) for key, fn in jobs.items()}
        return {key: fut.result() for key, fut in futures.items()}


def _prepared_pair(task, cfg, seed):
    pair = task.make_pair(seed)
    if cfg["label_shift"]:
        pair = simulate_label_shift(pair, cfg["drop_fraction"], seed)
    return pair


def cmd_run(cfg, presets=None):
    """One adaptation per (task, preset, seed)."""
    presets = presets or cfg["preset"] or ["KNN-baseline", "WC", "WC*"]
    jobs = {}
    for ti, task in enumerate(cfg.tasks):
        for seed in cfg["seed"]:
            pair = _prepared_pair(task, cfg, seed)
            for p in presets:
                method = cfg.method(p)
                jobs[(ti, task.name, p, seed)] = (
                    lambda pair=pair, method=method, seed=seed: run_da(pair, method, seed)
                )
    return assemble_table(_fan_out(jobs))


def cmd_ablate(cfg):
    """Accuracy, class-conditional distance and HSI per preset, scored with ground truth."""
    presets = cfg["preset"] or ["PCA", "WC", "WC*", "WWC"]
    for task in cfg.tasks:
        if task.make_pair(cfg["seed"][0]).target_truth is None:
            raise ConfigError(f"ablation needs target labels; task {task.name!r} has none")
    return cmd_run(cfg, presets)


FAMILY_STRIDE = 1000


def cmd_shift(cfg):
    """Repeated label-shift protocol per (task, seed family, preset).

    Seed family ``f`` builds its domains with seed ``f``; repeat ``r`` drops
    samples with seed ``FAMILY_STRIDE * f + r``, so families never share a
    drop seed.
    """
    presets = cfg["preset"] or ["KNN-baseline", "WC", "WWC", "WWC*"]
    repeats = cfg["repeats"]
    if repeats < 1:
        raise ConfigError("repeats must be >= 1")
    multi = len(cfg["seed"]) > 1
    jobs = {}
    for ti, task in enumerate(cfg.tasks):
        for family in cfg["seed"]:
            pair = task.make_pair(family)
            if pair.target_truth is None:
                raise ConfigError(f"label shift needs target labels; task {task.name!r} has none")
            name = f"{task.name}:{family}" if multi else task.name
            for p in presets:
                method = cfg.method(p)
                jobs[(ti, name, p, family)] = (
                    lambda pair=pair, method=method, family=family: run_label_shift_experiment(
                        pair, method, repeats, base_seed=FAMILY_STRIDE * family,
                        drop_fraction=cfg["drop_fraction"],
                    )
                )
    summaries = _fan_out(jobs)
    keyed = {}
    for (ti, name, p, family), summary in summaries.items():
        for r, res in enumerate(summary.results):
            keyed[(ti, name, p, FAMILY_STRIDE * family + r)] = res
    return assemble_table(keyed)


def cmd_check(seed=0, stream=None, marginal=None):
    """Run the property suite; returns True iff every property holds."""
    stream = stream or sys.stdout
    kwargs = {} if marginal is None else {"marginal": marginal}
    results = run_checks(seed=seed, **kwargs)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.name:<40} {r.detail}", file=stream)
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} properties passed", file=stream)
    return n_fail == 0


# --------------------------------------------------------------------------
# Entry point
# --------------------------------------------------------------------------


FLAG_HELP = {
    "preset": "comma-separated preset names",
    "seed": "seed list, e.g. 0-9 or 1,3,5",
    "repeats": "label-shift repeats per seed family (default 10)",
    "out": "output file",
    "format": "csv or json",
    "dim": "subspace dimension",
    "iters": "pseudo-label rounds",
    "kernel": "linear, rbf or poly",
    "bandwidth": "RBF bandwidth (default: median heuristic)",
    "ridge": "ridge added to the constraint matrix",
    "scale": "hyper-parameter preset: small or large",
    "normalize": "feature normalisation for file tasks: none, l2 or zscore",
    "label_shift": "apply the 50%% drop before run/ablate",
}


def build_parser():
    parser = argparse.ArgumentParser(prog="ujmmd", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("run", "standard domain adaptation, one row per (task, preset, seed)"),
        ("shift", "label-shift protocol: mean and std over repeated random drops"),
        ("ablate", "class-conditional distance and HSI of the learned embeddings"),
    ]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="config file or bundled config name")
        for key in EXPERIMENT_KEYS:
            flags = [f"--{key}"]
            if "_" in key:
                flags.append(f"--{key.replace('_', '-')}")
            p.add_argument(*flags, dest=f"opt_{key}", metavar=key.upper(),
                           help=FLAG_HELP.get(key))
    p = sub.add_parser("check", help="run the built-in property suite")
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "check":
        return 0 if cmd_check(args.seed) else 1

    overrides = {key: getattr(args, f"opt_{key}") for key in EXPERIMENT_KEYS}
    try:
        sections, origin = read_config(args.config)
        base_dir = os.path.dirname(os.path.abspath(args.config)) if args.config else "."
        cfg = build_config(sections, origin, overrides, base_dir)
        command = {"run": cmd_run, "shift": cmd_shift, "ablate": cmd_ablate}[args.command]
        rows = command(cfg)
        print(format_table(rows))
        if cfg["out"]:
            write_output(rows, cfg["out"], cfg["format"])
    except (ConfigError, ValidationError, DataFormatError, SolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
