"""Command-line front end.

Exit codes: 0 success, 2 usage/config, 3 domain, 4 degenerate data,
5 unsupported, 6 numeric failure, 7 experiment integrity.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import os
import sys
from pathlib import Path

import yaml

from . import __version__
from .errors import MumleError, UnsupportedOperationError, UsageError
from .estimators import EstimatorKind, PriorSpec, INV_SQRT_PSI_PRIOR, estimate
from .models import DataSet, Family, ParameterPoint, get_family
from .montecarlo import EstimatorSpec, ExperimentConfig, compare_estimators, run_experiment
from .pathology import check_pathology

SIMULATE_COLUMNS = ["estimator", "n", "replicates", "mean", "bias", "bias_se",
                    "variance", "variance_se", "mse", "failures"]
REPORT_COLUMNS = ["family", "estimator", "n", "bias", "bias_se", "variance", "mse"]
CONFIG_KEYS = {"family", "theta", "psi", "n", "m", "replicates", "seed", "estimators", "theta_known"}
MANIFEST_PREFIX = "# mumle-manifest "


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def read_data_file(path: str | Path) -> list[list[float]]:
    """Blocks of numbers; one value per line, blank lines separate blocks.

    Lines starting with ``#`` are ignored.
    """
    blocks: list[list[float]] = [[]]
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            continue
        if not line:
            if blocks[-1]:
                blocks.append([])
            continue
        try:
            blocks[-1].append(float(line))
        except ValueError:
            raise UsageError(f"{path}:{lineno}: cannot parse {line!r} as a number") from None
    blocks = [b for b in blocks if b]
    if not blocks:
        raise UsageError(f"{path}: no observations")
    return blocks


def dataset_for(family, blocks: list[list[float]]) -> DataSet:
    fam = get_family(family)
    if fam.grouped:
        return DataSet.grouped(blocks)
    if len(blocks) > 1:
        raise UsageError(f"{fam.id.value} takes flat data; found {len(blocks)} blank-line separated blocks")
    return DataSet.flat(blocks[0])


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _short(value) -> str:
    return "n/a" if value is None else f"{value:.6g}"


def _manifest(command: str, seed=None, config_hash=None, **extra) -> dict:
    out = {"tool": "mumle", "version": __version__, "command": command}
    if seed is not None:
        out["seed"] = seed
    if config_hash is not None:
        out["config_sha256"] = config_hash
    out.update(extra)
    return out


def _stamped(manifest: dict, outputs) -> dict:
    full = dict(manifest)
    full["outputs"] = [str(p) for p in outputs]
    full["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return full


def _write_csv(path, columns, rows, manifest: dict) -> str:
    """CSV text with the manifest on a leading comment line (no timestamp,
    so identical runs give identical bytes)."""
    buf = io.StringIO()
    buf.write(MANIFEST_PREFIX + json.dumps(manifest, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    text = buf.getvalue()
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
    return text


def _write_json(path, payload) -> None:
    text = json.dumps(payload, indent=2, sort_keys=False) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _parse_theta(text):
    if text is None:
        return None
    if isinstance(text, (int, float)):
        return (float(text),)
    if isinstance(text, (list, tuple)):
        return tuple(float(t) for t in text)
    try:
        return tuple(float(t) for t in str(text).split(","))
    except ValueError:
        raise UsageError(f"cannot parse theta {text!r}") from None


def _resolve_seed(flag, config_value=None):
    if flag is not None:
        return int(flag)
    env = os.environ.get("MU_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"MU_SEED={env!r} is not an integer") from None
    if config_value is None:
        raise UsageError("no seed: pass --seed, set MU_SEED or add 'seed' to the config")
    return int(config_value)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_estimate(args) -> int:
    fam = get_family(args.family)
    data = dataset_for(fam, read_data_file(args.data))
    theta = _parse_theta(args.theta)
    prior = PriorSpec.parse(args.prior) if args.prior else INV_SQRT_PSI_PRIOR

    kinds = []
    if args.all:
        kinds = [EstimatorKind.MLE, EstimatorKind.MUMLE, EstimatorKind.MML87, EstimatorKind.FIRTH]
        if not fam.closed_form:
            kinds = [EstimatorKind.MML87, EstimatorKind.FIRTH]
        if theta is not None:
            kinds = [k for k in kinds if k is not EstimatorKind.MUMLE]
    else:
        for flag, kind in (("mle", EstimatorKind.MLE), ("mumle", EstimatorKind.MUMLE),
                           ("mml87", EstimatorKind.MML87), ("firth", EstimatorKind.FIRTH)):
            if getattr(args, flag):
                kinds.append(kind)
        if not kinds:
            kinds = [EstimatorKind.MLE, EstimatorKind.MUMLE] if fam.closed_form else [EstimatorKind.MML87]

    reports = [estimate(fam, data, k, prior=prior, theta=theta, seed=args.seed).as_dict() for k in kinds]
    source = Path(args.data).read_bytes()
    payload = {
        "manifest": _stamped(
            _manifest("estimate", seed=args.seed, data_sha256=hashlib.sha256(source).hexdigest(),
                      family=fam.id.value),
            [args.out or "-"],
        ),
        "family": fam.id.value,
        "n": data.n,
        "m": data.m,
        "theta_known": theta is not None,
        "estimates": reports,
    }
    _write_json(args.out, payload)
    return 0


def load_config(path) -> dict:
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise UsageError(f"{path}: not valid key-value text ({exc})") from None
    if not isinstance(raw, dict):
        raise UsageError(f"{path}: expected 'key: value' lines")
    for key in raw:
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}: unknown config key {key!r}")
    for key, value in raw.items():
        if isinstance(value, dict):
            raise UsageError(f"{path}: config key {key!r} must be flat")
    for key in ("family", "psi", "n", "replicates", "theta"):
        if key not in raw:
            raise UsageError(f"{path}: missing config key {key!r}")
    return raw


def build_config(raw: dict, seed: int) -> ExperimentConfig:
    estimators = raw.get("estimators", ["mle", "mumle"])
    if isinstance(estimators, str):
        estimators = [e for e in estimators.replace(",", " ").split() if e]
    try:
        params = ParameterPoint(_parse_theta(raw["theta"]), float(raw["psi"]))
        return ExperimentConfig(
            family=str(raw["family"]),
            true_params=params,
            n=int(raw["n"]),
            m=int(raw.get("m", 2)),
            replicates=int(raw["replicates"]),
            seed=seed,
            estimators=tuple(EstimatorSpec.parse(str(e)) for e in estimators),
            theta_known=bool(raw.get("theta_known", False)),
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid config value: {exc}") from None


def simulation_rows(result) -> list[dict]:
    cfg = result.config
    return [
        {
            "estimator": s.name, "n": cfg.n, "replicates": cfg.replicates, "mean": s.mean,
            "bias": s.bias, "bias_se": s.bias_se, "variance": s.variance,
            "variance_se": s.variance_se, "mse": s.mse, "failures": s.failures,
        }
        for s in result.summaries
    ]


def cmd_simulate(args) -> int:
    raw = load_config(args.config)
    seed = _resolve_seed(args.seed, raw.get("seed"))
    config = build_config(raw, seed)
    prefix = Path(args.output) if args.output else Path(args.config).with_suffix("")
    csv_path, json_path = prefix.with_suffix(".csv"), prefix.with_suffix(".json")

    result = run_experiment(config, threads=args.threads)
    manifest = _manifest("simulate", seed=seed, config_hash=config.digest(), family=config.family.value)
    rows = simulation_rows(result)
    _write_csv(csv_path, SIMULATE_COLUMNS, rows, manifest)
    comparison = compare_estimators(result)
    _write_json(json_path, {
        "manifest": _stamped(dict(manifest, config_path=str(args.config), threads=args.threads),
                             [csv_path, json_path]),
        "config": config.to_dict(),
        "replicate_failures": result.replicate_failures,
        "results": rows,
        "comparison": {
            "by_abs_bias": list(comparison.by_abs_bias),
            "by_mse": list(comparison.by_mse),
            "dominance": [list(p) for p in comparison.dominance],
        },
    })
    if not args.quiet:
        for r in rows:
            print(f"{r['estimator']:>18}  bias={_short(r['bias'])} (se {_short(r['bias_se'])})  "
                  f"var={_short(r['variance'])}  mse={_short(r['mse'])}")
    return 0


def cmd_pathology(args) -> int:
    fam = get_family(args.family)
    if not fam.closed_form:
        raise UnsupportedOperationError(f"{fam.id.value}: pathology check needs a closed-form nuisance MLE")
    seed = _resolve_seed(args.seed, 0)
    params = ParameterPoint(_parse_theta(args.theta), args.psi)
    report = check_pathology(fam, params, args.n, args.replicates, seed, m=args.m, known_theta=args.known_theta)

    sign_word = {1: "positive", -1: "negative", 0: "zero"}
    print(f"regularity (score at true theta): mean={report.mean_score_at_true_theta:+.5f} "
          f"se={report.se_true_theta:.5f} -> {'PASS' if report.regularity_pass else 'FAIL'}")
    label = "known theta" if args.known_theta else "theta_hat"
    observed = sign_word[int(_sign(report.mean_score_at_theta_hat))]
    verdict = "DETECTED" if report.pathology_detected else "NOT DETECTED"
    print(f"pathology (score at {label}): mean={report.mean_score_at_theta_hat:+.5f} "
          f"se={report.se_theta_hat:.5f} -> {verdict} ({observed} mean, "
          f"expected {sign_word[report.predicted_sign]} when present)")
    if args.out:
        _write_json(args.out, {
            "manifest": _stamped(_manifest("pathology-check", seed=seed, family=fam.id.value), [args.out]),
            "params": {"theta": list(params.theta), "psi": params.psi, "n": args.n, "m": args.m},
            "report": report.as_dict(),
        })
    return 0


def _sign(x):
    return (x > 0) - (x < 0)


def _read_simulation(path: Path) -> tuple[str, list[dict]]:
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    if path.suffix == ".json":
        payload = json.loads(text)
        return payload["config"]["family"], payload["results"]
    family = None
    lines = []
    for line in text.splitlines():
        if line.startswith(MANIFEST_PREFIX):
            family = json.loads(line[len(MANIFEST_PREFIX):]).get("family")
        elif not line.startswith("#"):
            lines.append(line)
    if family is None:
        raise UsageError(f"{path}: no manifest line, cannot tell the family")
    rows = list(csv.DictReader(lines))
    missing = set(SIMULATE_COLUMNS) - set(rows[0] if rows else SIMULATE_COLUMNS)
    if missing:
        raise UsageError(f"{path}: missing columns {sorted(missing)}")
    return family, rows


def cmd_report(args) -> int:
    if not args.inputs:
        raise UsageError("report needs at least one simulate output")
    merged = []
    families = set()
    for name in args.inputs:
        family, rows = _read_simulation(Path(name))
        families.add(family)
        for r in rows:
            merged.append({
                "family": family,
                "estimator": r["estimator"],
                "n": int(r["n"]),
                **{c: (float(r[c]) if r[c] not in ("", None) else None)
                   for c in ("bias", "bias_se", "variance", "mse")},
            })
    if len(families) > 1 and not args.allow_mixed:
        raise UsageError(f"inputs mix families {sorted(families)}; pass --allow-mixed to merge them")
    merged.sort(key=lambda r: (r["family"], r["estimator"], r["n"]))
    digest = hashlib.sha256("\n".join(sorted(Path(p).read_text() for p in args.inputs)).encode()).hexdigest()
    _write_csv(args.out, REPORT_COLUMNS, merged,
               _manifest("report", config_hash=digest, families=sorted(families)))
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    families = [f.value for f in Family]
    p = argparse.ArgumentParser(prog="mumle", description="MLE, MUMLE and MML87 estimation and bias experiments")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("estimate", help="estimate psi from a data file")
    e.add_argument("data", help="one value per line; blank lines separate groups")
    e.add_argument("--family", required=True, choices=families)
    e.add_argument("--mle", action="store_true")
    e.add_argument("--mumle", action="store_true")
    e.add_argument("--mml87", action="store_true")
    e.add_argument("--firth", action="store_true")
    e.add_argument("--all", action="store_true", help="every estimator the family supports")
    e.add_argument("--prior", help="MML87 prior: flat, firth or power=<exponent> (default power=-0.5)")
    e.add_argument("--theta", help="known nuisance value(s), comma separated")
    e.add_argument("--seed", type=int, default=0, help="seed for finite-difference information")
    e.add_argument("--out", help="JSON report path (default stdout)")
    e.set_defaults(func=cmd_estimate)

    s = sub.add_parser("simulate", help="run a Monte Carlo experiment from a config file")
    s.add_argument("config", help="flat 'key: value' file")
    s.add_argument("--output", help="output prefix for .csv and .json (default: config path)")
    s.add_argument("--seed", type=int, help="overrides MU_SEED and the config seed")
    s.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    s.add_argument("--quiet", action="store_true")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("pathology-check", help="score-mean regularity and plug-in pathology checks")
    c.add_argument("--family", required=True, choices=families)
    c.add_argument("--theta", required=True, help="true nuisance value(s), comma separated")
    c.add_argument("--psi", required=True, type=float)
    c.add_argument("--n", required=True, type=int)
    c.add_argument("--m", type=int, default=2)
    c.add_argument("--replicates", type=int, default=100_000)
    c.add_argument("--seed", type=int)
    c.add_argument("--known-theta", action="store_true", help="use the true nuisance instead of its MLE")
    c.add_argument("--out", help="JSON report path")
    c.set_defaults(func=cmd_pathology)

    r = sub.add_parser("report", help="merge simulate outputs into a plot-ready CSV")
    r.add_argument("inputs", nargs="*", help="simulate .csv or .json files")
    r.add_argument("--out", help="CSV path (default stdout)")
    r.add_argument("--allow-mixed", action="store_true")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MumleError as exc:
        print(f"mumle {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
