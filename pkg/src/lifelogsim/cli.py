"""Command-line entry point: ``lifelogsim <command> ...``.

Exit status is 0 on success, 2 for bad input (missing or malformed files,
invalid options) and 1 for anything unexpected.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings
from importlib import resources
from pathlib import Path

from .config import ConfigError, default_config, parse_config
from .environment import ScenarioError, parse_scenario
from .recorder import LogFormatError, export_csv, import_csv
from .simulator import Mode, PowerTrace, TraceFormatError, calibrate, run, zero_energy_rate

BUNDLED = ("default", "office_9h")


class InputError(Exception):
    """Bad user input; reported without a traceback, exit status 2."""


def _read(path, what):
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InputError(f"{what} not found: {path}") from None
    except OSError as exc:
        raise InputError(f"cannot read {what} {path}: {exc.strerror}") from None


def _load_scenario(arg, seed):
    """A file path, or the name of a bundled scenario."""
    if not Path(arg).exists() and arg in BUNDLED:
        text = resources.files("lifelogsim.data").joinpath(f"{arg}.scenario").read_text()
    else:
        text = _read(arg, "scenario")
    try:
        return parse_scenario(text, seed=seed)
    except ScenarioError as exc:
        raise InputError(f"{arg}: {exc}") from None


def _load_config(arg):
    if arg is None:
        return default_config()
    try:
        return parse_config(_read(arg, "config"))
    except ConfigError as exc:
        raise InputError(f"{arg}: {exc}") from None


def _write_all(outputs: dict):
    """Write every file or none: on failure, remove whatever was written."""
    done = []
    try:
        for path, text in outputs.items():
            if path is None:
                continue
            Path(path).write_text(text, encoding="utf-8", newline="\n")
            done.append(path)
    except OSError as exc:
        for p in done:
            try:
                os.remove(p)
            except OSError:
                pass
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


# commands --------------------------------------------------------------------


def cmd_simulate(a):
    cfg = _load_config(a.config)
    if a.seed is not None:
        cfg = cfg.replace(seed=a.seed)
    sc = _load_scenario(a.scenario, seed=a.seed or 0)
    res = run(sc, cfg, Mode(a.mode))
    outputs = {a.out_log: export_csv(res.log), a.out_trace: res.trace.to_csv()}
    if a.out_truth:
        from .pipeline.signals import write_truth

        outputs[a.out_truth] = write_truth(sc.truth_intervals(), offset_s=cfg.rtc_start_ms / 1000.0)
    _write_all(outputs)
    print(f"records: {res.n_records} ({res.log.n_samples} stored, {res.log.dropped} dropped: log full)")
    print(f"sessions: {len(res.log.sessions)}")
    print(f"mean sampling rate: {res.mean_rate_hz:.4f} Hz over {res.duration:g} s")
    return 0


def cmd_zero_energy(a):
    try:
        tr = PowerTrace.from_csv(_read(a.trace, "trace"))
        rep = zero_energy_rate(tr)
    except (TraceFormatError, ValueError) as exc:
        raise InputError(f"{a.trace}: {exc}") from None
    print(rep.summary())
    return 0


def _channels(text):
    from .pipeline.dataset import check_channels

    try:
        return check_channels(c.strip() for c in text.split(",") if c.strip())
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_features(a):
    from .pipeline.dataset import features_from_log, write_features
    from .pipeline.signals import read_truth

    channels = _channels(a.channels)
    try:
        log = import_csv(_read(a.log, "log"), capacity_bytes=1 << 40)
    except LogFormatError as exc:
        raise InputError(f"{a.log}: {exc}") from None
    try:
        truth = read_truth(_read(a.truth, "truth")) if a.truth else None
    except ValueError as exc:
        raise InputError(f"{a.truth}: {exc}") from None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        table = features_from_log(log, truth, channels, user=a.user)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _write_all({a.out: write_features(table)})
    print(f"windows: {len(table)}  features per window: {table.X.shape[1]}")
    return 0


def cmd_evaluate(a):
    from .pipeline.dataset import FeatureFormatError, read_features
    from .pipeline.evaluation import cross_validate, map_labels

    try:
        table = read_features(_read(a.features, "features"))
    except FeatureFormatError as exc:
        raise InputError(f"{a.features}: {exc}") from None
    if len(table) == 0:
        raise InputError(f"{a.features}: no feature rows")
    y = map_labels(a.target, table.place, table.activity)
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        try:
            rep = cross_validate(
                table.X, y, table.user, a.scheme, a.model, a.majority,
                order=table.time_rank(), seed=a.seed, vote_mode=a.vote_mode,
            )  # fmt: skip
        except ValueError as exc:
            raise InputError(str(exc)) from None
    print(f"target: {a.target}")
    print(rep.summary())
    _write_all({a.out_confusion: rep.confusion_csv()})
    return 0


def cmd_calibrate(a):
    from .config import format_config

    cfg = _load_config(a.config)
    try:
        cal = calibrate(cfg, target_hz=a.target_hz, lux=a.lux, duration=a.duration)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    print(f"sc1_l_sat = sc2_l_sat = {cal.sc1_l_sat:.1f} lux")
    if a.out:
        _write_all({a.out: format_config(cal)})
    return 0


def cmd_dataset(a):
    from .pipeline.dataset import simulate_users, write_features

    cfg = _load_config(a.config)
    sc = _load_scenario(a.scenario, seed=a.seed)
    table = simulate_users(sc, cfg, a.users, seed=a.seed, channels=_channels(a.channels))
    _write_all({a.out: write_features(table)})
    print(f"users: {a.users}  windows: {len(table)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lifelogsim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run the device over a scenario")
    s.add_argument("--scenario", required=True, help="scenario file, or a bundled name: " + ", ".join(BUNDLED))
    s.add_argument("--config", help="device config file (default: shipped defaults)")
    s.add_argument("--mode", choices=[m.value for m in Mode], default="proposed")
    s.add_argument("--out-log", required=True)
    s.add_argument("--out-trace", required=True)
    s.add_argument("--out-truth", help="also write the ground-truth intervals")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("zero-energy", help="zero-energy rate of a power trace")
    s.add_argument("--trace", required=True)
    s.set_defaults(func=cmd_zero_energy)

    s = sub.add_parser("features", help="windowed features from a record log")
    s.add_argument("--log", required=True)
    s.add_argument("--truth", help="ground-truth CSV (start_s,end_s,place,activity)")
    s.add_argument("--channels", default="sc1,sc2,piezo,sr")
    s.add_argument("--user", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_features)

    s = sub.add_parser("evaluate", help="cross-validated classification report")
    s.add_argument("--features", required=True)
    s.add_argument("--model", choices=["knn", "dtree", "logreg", "gnb"], default="knn")
    s.add_argument("--scheme", choices=["pd", "pi"], default="pd")
    s.add_argument("--majority", type=int, default=20)
    s.add_argument("--target", choices=["place8", "place14", "activity2", "activity5"], default="place8")
    s.add_argument("--vote-mode", choices=["sequence", "fold"], default="sequence")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-confusion", default="confusion.csv")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("calibrate", help="solve l_sat for a target record rate")
    s.add_argument("--config")
    s.add_argument("--target-hz", type=float, default=2.15)
    s.add_argument("--lux", type=float, default=500.0)
    s.add_argument("--duration", type=float, default=60.0)
    s.add_argument("--out", help="write the calibrated config here")
    s.set_defaults(func=cmd_calibrate)

    s = sub.add_parser("dataset", help="simulate several wearers and write their features")
    s.add_argument("--scenario", default="default")
    s.add_argument("--config")
    s.add_argument("--users", type=int, default=6)
    s.add_argument("--channels", default="sc1,sc2,piezo,sr")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_dataset)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
