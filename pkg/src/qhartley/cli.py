"""``qhartley`` command line: verification, training, sampling and model comparison.

Every command reads an INI or JSON config (``--config``), writes its artifacts
into ``--out`` and embeds the resolved config in each file. A ``config.json``
snapshot is written next to the artifacts; feeding it back through
``--config`` reproduces them byte for byte.

Exit codes: 0 success, 2 config or usage error, 3 numerical failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import sampling as smp
from . import verification as ver
from .circuits import PAIR_SCHEMES, SINGLE_SCHEMES
from .config import ConfigError
from .model import DomainError, GridModel, QuantumModel
from .statevector import RNG_ALGORITHM
from .targets import TargetSpec, de_solution
from .training import (
    NumericalError,
    TrainConfig,
    de_grid,
    default_grid,
    integer_grid,
    make_training_grid,
    train_bivariate,
    train_de,
    train_distribution,
)

log = logging.getLogger("qhartley")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_CHECK = 0, 2, 3, 4

TRAIN_DEFAULTS = {
    "epochs": 3000,
    "learning_rate": 0.01,
    "seed": 0,
    "loss_report_stride": 1,
    "init_scale": 0.1,
    "early_stop": 1e-8,
}

DEFAULTS = {
    "train": {
        "model": {"kind": "hartley", "n": 5, "depth": 4, "ansatz": "hera"},
        "target": {"kind": "ou"},
        "train": TRAIN_DEFAULTS,
    },
    "solve-de": {
        "model": {"kind": "hartley", "n": 4, "depth": 3, "ansatz": "hera"},
        "target": {"kind": "de1"},
        "train": TRAIN_DEFAULTS | {"epochs": 5000, "init_scale": 1.0},
    },
    "train2d": {
        "model": {"kind": "bivariate-hartley", "n": 4, "depth": 2, "ansatz": "hera", "correlation": True},
        "target": {"kind": "binormal"},
        "train": TRAIN_DEFAULTS,
    },
    "sample": {"sample": {"shots": 100000, "S": 0, "seed": 0, "tvd": False}},
    "sample2d": {"sample": {"shots": 1000000, "S": 1, "seed": 0, "tvd": False}},
    "compare": {
        "target": {"kind": "exponential"},
        "train": TRAIN_DEFAULTS,
        "compare": {
            "schemes": ["hera"] + list(PAIR_SCHEMES) + list(SINGLE_SCHEMES),
            "n_values": [2, 3, 4, 5],
            "depth": 1,
            "seeds": 1,
        },
    },
    "verify": {"verify": {"n_min": 1, "n_max": 5, "corrupt_qht": False}},
    "overlap-map": {"overlap": {"n": 5, "step": 0.1, "regularized": True}},
}

# sections each command accepts
SECTIONS = {
    "train": {"model", "target", "train", "output"},
    "solve-de": {"model", "target", "train", "output"},
    "train2d": {"model", "target", "train", "output"},
    "sample": {"sample", "output"},
    "sample2d": {"sample", "output"},
    "compare": {"target", "train", "compare", "output"},
    "verify": {"verify", "output"},
    "overlap-map": {"overlap", "output"},
}


# ---------------------------------------------------------------------------
# helpers


def resolve_config(command: str, args) -> dict:
    cfg = cfgmod.load(args.config, DEFAULTS[command])
    extra = set(cfg) - SECTIONS[command]
    if extra:
        raise ConfigError(f"sections {sorted(extra)} are not used by '{command}'")
    if args.seed is not None:
        for sec in ("train", "sample"):
            if sec in cfg:
                cfg[sec]["seed"] = args.seed
    if getattr(args, "shots", None) is not None:
        if "sample" not in cfg:
            raise ConfigError("--shots only applies to sampling commands")
        cfg["sample"]["shots"] = args.shots
    # the output location is not part of the experiment record
    cfg.pop("output", None)
    return cfg


def output_dir(args) -> Path:
    out = Path(args.out) if args.out else None
    if out is None and args.config:
        raw = cfgmod.coerce(cfgmod.read_config_file(args.config))
        d = raw.get("output", {}).get("directory")
        out = Path(d) if d else None
    if out is None:
        raise ConfigError("no output directory: pass --out or set [output] directory")
    out.mkdir(parents=True, exist_ok=True)
    return out


def csv_header(cfg: dict) -> list[str]:
    return [f"# config={cfgmod.canonical(cfg)}", f"# rng={RNG_ALGORITHM}"]


def write_csv(path: Path, cfg: dict, columns: list[str], rows) -> None:
    lines = csv_header(cfg) + [",".join(columns)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else f"{v:.17g}" for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_snapshot(out: Path, cfg: dict) -> None:
    write_json(out / "config.json", cfg)


def model_from_config(sec: dict) -> QuantumModel:
    try:
        return QuantumModel(
            kind=sec["kind"],
            n=sec["n"],
            depth=sec["depth"],
            ansatz=sec.get("ansatz", "hera"),
            scheme=sec.get("scheme"),
            correlation=sec.get("correlation", True),
        )
    except KeyError as e:
        raise ConfigError(f"[model] is missing {e.args[0]!r}") from e
    except ValueError as e:
        raise ConfigError(str(e)) from e


def target_from_config(sec: dict) -> TargetSpec:
    params = {k: v for k, v in sec.items() if k != "kind"}
    try:
        return TargetSpec(sec["kind"], params)
    except ValueError as e:
        raise ConfigError(str(e)) from e


def train_config(sec: dict) -> TrainConfig:
    try:
        return TrainConfig(**sec)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"[train]: {e}") from e


def save_training(out: Path, cfg: dict, report, grid_cols, grid_rows) -> None:
    extra = {"config": cfg, "final_loss": report.final_loss, "rng": RNG_ALGORITHM}
    (out / "model.json").write_text(report.model.to_json(extra))
    write_json(out / "report.json", report.to_dict() | {"config": cfg})
    (out / "loss.csv").write_text("\n".join(csv_header(cfg)) + "\n" + report.loss_csv())
    write_csv(out / "grid.csv", cfg, grid_cols, grid_rows)
    write_snapshot(out, cfg)


# ---------------------------------------------------------------------------
# commands


def cmd_train(args) -> int:
    cfg = resolve_config("train", args)
    model = model_from_config(cfg["model"])
    target = target_from_config(cfg["target"])
    tc = train_config(cfg["train"])
    if model.bivariate or target.bivariate or target.is_de:
        raise ConfigError("'train' fits univariate densities; use train2d or solve-de")
    out = output_dir(args)
    report = train_distribution(target, model, tc)
    grid = default_grid(model)
    f = GridModel(report.model, grid).evaluate(report.model.theta, report.model.alpha, report.model.beta)["f"]
    save_training(out, cfg, report, ["x", "p_model", "p_target"], zip(grid, f, target.grid_values(grid)))
    print(f"final loss {report.final_loss:.6e}")
    return EXIT_OK


def cmd_solve_de(args) -> int:
    cfg = resolve_config("solve-de", args)
    model = model_from_config(cfg["model"])
    target = target_from_config(cfg["target"])
    if not target.is_de:
        raise ConfigError("solve-de needs target kind de1 or de2")
    tc = train_config(cfg["train"])
    out = output_dir(args)
    report = train_de(target.kind, model, tc, target)
    grid = de_grid(target.kind, model.n)
    m = report.model
    r = GridModel(m, grid, order=2).evaluate(m.theta, m.alpha, m.beta)
    f, f1, f2 = de_solution(target.kind, grid, target.params["mu"], target.params["sigma"])
    cols = ["x", "f_model", "f_target", "df_model", "df_target", "d2f_model", "d2f_target"]
    save_training(out, cfg, report, cols, zip(grid, r["f"], f, r["f1"], f1, r["f2"], f2))
    print(f"final loss {report.final_loss:.6e}; max |f - f_analytic| = {np.abs(r['f'] - f).max():.3e}")
    return EXIT_OK


def cmd_train2d(args) -> int:
    cfg = resolve_config("train2d", args)
    model = model_from_config(cfg["model"])
    target = target_from_config(cfg["target"])
    if not (model.bivariate and target.bivariate):
        raise ConfigError("train2d needs a bivariate-hartley model and a binormal target")
    tc = train_config(cfg["train"])
    out = output_dir(args)
    report = train_bivariate(target, model, tc)
    grid = make_training_grid(model.n)
    m = report.model
    f = GridModel(m, grid, grid).evaluate(m.theta, m.alpha, m.beta)["f"]
    t = target.grid_values(grid, grid)
    rows = ((x, y, f[i, j], t[i, j]) for i, x in enumerate(grid) for j, y in enumerate(grid))
    save_training(out, cfg, report, ["x", "y", "p_model", "p_target"], rows)
    print(f"final loss {report.final_loss:.6e}")
    return EXIT_OK


def _load_model(cfg: dict) -> tuple[QuantumModel, str]:
    path = cfg["sample"].get("model")
    if not path:
        raise ConfigError("[sample] model (path to a trained model file) is required")
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"model file not found: {p}")
    data = p.read_bytes()
    try:
        model = QuantumModel.from_json(data.decode())
    except (ValueError, KeyError) as e:
        raise ConfigError(f"cannot read model file {p}: {e}") from e
    return model, hashlib.sha256(data).hexdigest()


def _sample_common(args, command: str, bivariate: bool) -> int:
    cfg = resolve_config(command, args)
    model, digest = _load_model(cfg)
    if model.bivariate != bivariate or (not bivariate and model.kind != "hartley"):
        raise ConfigError(f"'{command}' cannot sample a {model.kind!r} model")
    sc = cfg["sample"]
    S = sc.get("S", 0)
    variant = sc.get("variant") or ("plain" if S == 0 else "bitstring-network")
    sc["variant"] = variant
    out = output_dir(args)
    try:
        batch = smp.sample(model, sc["shots"], sc["seed"], S=S, variant=variant)
    except smp.UnsupportedSamplingError as e:
        raise ConfigError(str(e)) from e
    batch.model_hash = digest
    batch.meta = {"config": cfgmod.canonical(cfg)}
    (out / "raw.csv").write_text(smp.raw_csv(batch))
    (out / "decoded.csv").write_text(smp.decoded_csv(batch, model.x_max))
    write_snapshot(out, cfg)
    if sc.get("tvd"):
        print(f"TVD vs model distribution: {_tvd_vs_model(model, batch):.6f}")
    print(f"wrote {batch.shots} shots to {out}")
    return EXIT_OK


def _tvd_vs_model(model: QuantumModel, batch: smp.SampleBatch) -> float:
    """TVD between the decoded samples and the model normalized on the readout grid."""
    if batch.bivariate:
        h = smp.postprocess_bivariate(batch)
        inside = h.xs <= model.x_max
        xs = h.xs[inside]
        f = GridModel(model, xs, xs).evaluate(model.theta, model.alpha, model.beta)["q"]
        emp = h.probs[np.ix_(inside, inside)]
        return smp.tvd(emp / emp.sum(), f / f.sum())
    h = smp.histogram(batch)
    inside = h.coords <= model.x_max
    xs = h.coords[inside]
    f = GridModel(model, xs).evaluate(model.theta, model.alpha, model.beta)["q"]
    emp = h.probs[inside]
    return smp.tvd(emp / emp.sum(), f / f.sum())


def cmd_sample(args) -> int:
    return _sample_common(args, "sample", bivariate=False)


def cmd_sample2d(args) -> int:
    return _sample_common(args, "sample2d", bivariate=True)


def _compare_template(name: str, n: int, depth: int) -> QuantumModel:
    if name == "hera":
        return QuantumModel("hartley", n, depth)
    if name in PAIR_SCHEMES or name in SINGLE_SCHEMES:
        return QuantumModel("fourier", n, depth, ansatz="hea", scheme=name)
    raise ConfigError(f"unknown scheme {name!r}; expected hera or one of {PAIR_SCHEMES + SINGLE_SCHEMES}")


def cmd_compare(args) -> int:
    cfg = resolve_config("compare", args)
    cc = cfg["compare"]
    if not cc["schemes"]:
        raise ConfigError("[compare] schemes is empty")
    if not cc["n_values"]:
        raise ConfigError("[compare] n_values is empty")
    target = target_from_config(cfg["target"])
    if target.bivariate or target.is_de:
        raise ConfigError("compare needs a univariate density target")
    base = train_config(cfg["train"])
    for name in cc["schemes"]:
        _compare_template(name, 2, cc["depth"])
    out = output_dir(args)
    results, rows = [], []
    for n in cc["n_values"]:
        grid = integer_grid(n)
        t = target.grid_values(grid)
        for name in cc["schemes"]:
            tmpl = _compare_template(name, n, cc["depth"])
            best = None
            for s in range(cc["seeds"]):
                tc = TrainConfig(**(cfg["train"] | {"seed": base.seed + s}))
                rep = train_distribution(target, tmpl, tc, grid=grid)
                if best is None or rep.final_loss < best.final_loss:
                    best = rep
            m = best.model
            f = GridModel(m, grid).evaluate(m.theta, m.alpha, m.beta)["f"]
            rel = np.abs(f - t) / np.abs(t)
            results.append({
                "n": n,
                "scheme": name,
                "kind": tmpl.kind,
                "params": tmpl.n_params,
                "final_loss": best.final_loss,
                "seed": best.seed,
                "max_rel_error_interior": float(rel[1:-1].max()) if len(rel) > 2 else float(rel.max()),
            })
            rows += [(str(n), name, x, fv, tv, r) for x, fv, tv, r in zip(grid, f, t, rel)]
            log.info("n=%d %s: loss %.3e", n, name, best.final_loss)
    write_json(out / "compare.json", {"config": cfg, "rng": RNG_ALGORITHM, "results": results})
    write_csv(out / "profiles.csv", cfg, ["n", "scheme", "x", "p_model", "p_target", "rel_error"], rows)
    write_snapshot(out, cfg)
    for r in results:
        print(f"n={r['n']} {r['scheme']:>5} params={r['params']:3d} loss={r['final_loss']:.3e}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = resolve_config("verify", args)
    vc = cfg["verify"]
    if args.n_min is not None:
        vc["n_min"] = args.n_min
    if args.n_max is not None:
        vc["n_max"] = args.n_max
    if args.corrupt_qht:
        vc["corrupt_qht"] = True
    lo, hi = vc["n_min"], vc["n_max"]
    if lo < 1 or hi < lo:
        raise ConfigError(f"invalid qubit range {lo}..{hi} (need 1 <= n_min <= n_max)")
    if hi > 9:
        raise ConfigError("verify builds dense unitaries; n_max must be <= 9")
    checks = [c for n in range(lo, hi + 1) for c in ver.run_checks(n, vc["corrupt_qht"])]
    ok = all(c.passed for c in checks)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} n={c.n} {c.name}: {c.value:.3e} (tol {c.tol:g})")
    if args.out or (args.config and "output" in cfgmod.read_config_file(args.config)):
        out = output_dir(args)
        write_json(out / "verify.json", {"config": cfg, "passed": ok, "checks": [c.as_dict() for c in checks]})
        write_snapshot(out, cfg)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_overlap_map(args) -> int:
    cfg = resolve_config("overlap-map", args)
    oc = cfg["overlap"]
    if oc["n"] < 1 or not oc["step"] > 0:
        raise ConfigError("[overlap] needs n >= 1 and step > 0")
    out = output_dir(args)
    xs, ov = ver.overlap_map(oc["n"], oc["step"], oc["regularized"])
    rows = ((x, xp, ov[i, j]) for i, x in enumerate(xs) for j, xp in enumerate(xs))
    write_csv(out / "overlap.csv", cfg, ["x", "x_prime", "overlap_sq"], rows)
    write_snapshot(out, cfg)
    far = np.abs(xs[:, None] - xs[None, :]) >= 0.5 - 1e-9
    print(f"max squared overlap for |x - x'| >= 0.5: {ov[far].max():.4f}")
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "train": cmd_train,
    "solve-de": cmd_solve_de,
    "train2d": cmd_train2d,
    "sample": cmd_sample,
    "sample2d": cmd_sample2d,
    "compare": cmd_compare,
    "overlap-map": cmd_overlap_map,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qhartley", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="INI or JSON run configuration")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int, help="override the configured seed")
        if name in ("sample", "sample2d"):
            sp.add_argument("--shots", type=int)
        if name == "verify":
            sp.add_argument("--n-min", type=int)
            sp.add_argument("--n-max", type=int)
            sp.add_argument("--corrupt-qht", action="store_true",
                            help="drop the phase-fixing gate (negative control)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, FloatingPointError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DomainError as e:
        print(f"domain error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
