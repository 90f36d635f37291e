"""Command-line front end: config-driven experiment execution with
delimited-text result emission.

Commands: synth-recovery, evaluate, ttest, fit, project. Configs are INI
files; every numeric output cell is written with 17 significant digits so
result tables can be compared byte-for-byte across runs.
"""

import argparse
import configparser
import csv
import sys
from pathlib import Path

import numpy as np

from . import evaluate as ev
from . import imagedata, p2dcca, synth

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INVALID = 2


class ConfigError(ValueError):
    pass


def _fmt(x):
    return f"{float(x):.17g}"


def _load_config(path, section):
    cfg = configparser.ConfigParser()
    if not Path(path).is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        cfg.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if section not in cfg:
        raise ConfigError(f"{path}: missing [{section}] section")
    return cfg[section]


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _int_list(text):
    items = [s for s in text.replace(",", " ").split() if s]
    if not items:
        raise ConfigError("empty grid")
    return [int(s) for s in items]


def _float_list(text):
    items = [s for s in text.replace(",", " ").split() if s]
    if not items:
        raise ConfigError("empty grid")
    return [float(s) for s in items]


def cmd_synth_recovery(args):
    sec = _load_config(args.config, "synth-recovery")
    n_grid = _int_list(sec.get("n_grid", "1000"))
    sigma_grid = _float_list(sec.get("sigma_grid", "0.1"))
    trials = sec.getint("trials", 20)
    seed = args.seed if args.seed is not None else sec.getint("seed", 0)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    trial_rows = []
    summary_rows = []
    for n in n_grid:
        for sigma in sigma_grid:
            cfg = synth.SyntheticConfig(
                n_samples=n, sigma1=sigma, sigma2=sigma, seed=seed)
            res = synth.recovery_experiment(cfg, trials)
            for method, loading, n_s, sg, trial, dist in res.rows:
                trial_rows.append(
                    [method, loading, n_s, _fmt(sg), trial, _fmt(dist)])
            for (method, loading), (mean, std) in sorted(res.summary().items()):
                summary_rows.append(
                    [method, loading, n, _fmt(sigma), _fmt(mean), _fmt(std)])
    _write_csv(out / "recovery_trials.csv",
               ["method", "loading", "N", "sigma", "trial", "distance"],
               trial_rows)
    _write_csv(out / "recovery_summary.csv",
               ["method", "loading", "N", "sigma", "mean", "std"],
               summary_rows)
    return EXIT_OK


def _build_plan(sec, seed):
    manifest = sec.get("manifest")
    root = sec.get("image_root", ".")
    if manifest is None:
        raise ConfigError("manifest is required")
    size = _int_list(sec.get("image_size", "50 50"))
    if len(size) != 2:
        raise ConfigError("image_size must give two integers")
    samples, errors = imagedata.load_image_dir(root, manifest, tuple(size))
    if errors:
        names = ", ".join(p for p, _ in errors[:5])
        raise ConfigError(f"{len(errors)} unreadable image(s): {names}")
    protocol = sec.get("protocol", "ar")
    if protocol == "ar":
        varying = [s.strip() for s in sec.get("varying_conditions", "").split(",")
                   if s.strip()]
        return imagedata.build_ar_folds(
            samples, sec.get("reference_condition", "neutral"), varying)
    if protocol == "umist":
        return imagedata.build_umist_splits(
            samples,
            frontal_condition=sec.get("frontal_condition", "frontal"),
            train_per_subject=sec.getint("train_per_subject", 8),
            repeats=sec.getint("repeats", 20),
            seed=seed)
    raise ConfigError(f"unknown protocol {protocol!r}")


def cmd_evaluate(args):
    sec = _load_config(args.config, "evaluate")
    seed = args.seed if args.seed is not None else sec.getint("seed", 0)
    methods = [m.strip() for m in sec.get("methods", "2dcca,p2dcca").split(",")
               if m.strip()]
    for m in methods:
        if m not in ev.METHODS:
            raise ConfigError(f"unknown method {m!r}")
    d_grid = _int_list(sec.get("d_grid", "5"))
    tmax_grid = _int_list(sec.get("tmax_grid", "1"))
    plan = _build_plan(sec, seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    for method in methods:
        for d in d_grid:
            for tmax in (tmax_grid if method == "p2dcca" else [1]):
                traces = []
                params = {"seed": seed}
                if method == "p2dcca":
                    params.update(Tmax=tmax, collect_trace=traces)
                result = ev.run_protocol(method, plan, d, params)
                for fold, acc in enumerate(result.fold_accuracies):
                    rows.append([method, plan.protocol, fold, d, tmax,
                                 _fmt(acc)])
                for fold, trace in enumerate(traces):
                    for side, passes in (("left", trace.left),
                                         ("right", trace.right)):
                        for t, seq in enumerate(passes):
                            _write_csv(
                                out / f"trace_{method}_d{d}_tmax{tmax}_"
                                      f"fold{fold}_pass{t}_{side}.csv",
                                ["iteration", "loglik"],
                                [[i, _fmt(v)] for i, v in enumerate(seq)])
    _write_csv(out / "accuracy.csv",
               ["method", "protocol", "fold", "d", "tmax", "accuracy"], rows)
    return EXIT_OK


def _read_accuracies(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "accuracy" not in reader.fieldnames:
            raise ConfigError(f"{path}: no accuracy column")
        vals = [float(row["accuracy"]) for row in reader]
    if not vals:
        raise ConfigError(f"{path}: empty accuracy table")
    return vals


def cmd_ttest(args):
    a = _read_accuracies(args.results_a)
    b = _read_accuracies(args.results_b)
    p = ev.independent_t_test(a, b)
    verdict = "reject" if p < 0.05 else "accept"
    print(f"p-value {_fmt(p)}")
    print(f"null hypothesis (no difference at 0.05): {verdict}")
    return EXIT_OK


def _paired_dataset(sec):
    manifest = sec.get("manifest")
    if manifest is None:
        raise ConfigError("manifest is required")
    root = sec.get("image_root", ".")
    size = _int_list(sec.get("image_size", "50 50"))
    samples, errors = imagedata.load_image_dir(root, manifest, tuple(size))
    if errors:
        raise ConfigError(f"{len(errors)} unreadable image(s)")
    left_cond = sec.get("left_condition")
    right_cond = sec.get("right_condition")
    if not left_cond or not right_cond:
        raise ConfigError("left_condition and right_condition are required")
    by_subject = {}
    for s in samples:
        by_subject.setdefault(s.subject_id, {})[s.condition] = s
    left, right = [], []
    for sid in sorted(by_subject):
        conds = by_subject[sid]
        if left_cond in conds and right_cond in conds:
            left.append(conds[left_cond].pixels)
            right.append(conds[right_cond].pixels)
    if len(left) < 2:
        raise ConfigError("fewer than two aligned subject pairs")
    return np.stack(left), np.stack(right)


def cmd_fit(args):
    sec = _load_config(args.config, "fit")
    seed = args.seed if args.seed is not None else sec.getint("seed", 0)
    data1, data2 = _paired_dataset(sec)
    d = sec.getint("d", 5)
    model, _ = p2dcca.fit_p2dcca(
        data1, data2, d, d,
        Tmax=sec.getint("tmax", 1), seed=seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    p2dcca.save_model(model, out / sec.get("model_file", "p2dcca_model.npz"))
    return EXIT_OK


def cmd_project(args):
    model = p2dcca.load_model(args.model)
    samples, errors = imagedata.load_image_dir(
        args.image_root, args.manifest,
        model.mu1.shape if args.view == 1 else model.mu2.shape)
    if errors:
        raise ConfigError(f"{len(errors)} unreadable image(s)")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for s in samples:
        feat = p2dcca.reduce_dimension(model, s.pixels, args.view)
        rows.append([s.subject_id, s.condition]
                    + [_fmt(v) for v in feat.ravel()])
    k = model.row_latent * model.col_latent
    _write_csv(out / "features.csv",
               ["subject", "condition"] + [f"f{i}" for i in range(k)], rows)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cca2d", description="CCA-family experiment runner")
    parser.add_argument("--threads", type=int, default=1,
                        help="reserved; library calls are single-threaded")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True)
        p.add_argument("--out-dir", default="out")
        p.add_argument("--seed", type=int, default=None)

    common(sub.add_parser("synth-recovery",
                          help="loading-recovery experiment"))
    common(sub.add_parser("evaluate", help="recognition protocol runs"))
    common(sub.add_parser("fit", help="fit and serialize a model"))

    p = sub.add_parser("ttest", help="two-sample t-test on accuracy tables")
    p.add_argument("results_a")
    p.add_argument("results_b")

    p = sub.add_parser("project", help="apply a serialized model to images")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--image-root", default=".")
    p.add_argument("--view", type=int, choices=(1, 2), default=1)
    p.add_argument("--out-dir", default="out")
    return parser


COMMANDS = {
    "synth-recovery": cmd_synth_recovery,
    "evaluate": cmd_evaluate,
    "ttest": cmd_ttest,
    "fit": cmd_fit,
    "project": cmd_project,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, imagedata.ManifestError, imagedata.ProtocolError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
