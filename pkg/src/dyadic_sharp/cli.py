"""Command-line front end.

Every subcommand reads a JSON config (validated against a schema, unknown
keys rejected) and writes its result atomically.  Exit codes: 0 ok,
1 a verification reported failure, 2 config or schema error, 3 domain or
precondition error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import jsonschema
import numpy as np

from . import experiments
from .core import DyadicCube, StepFunction
from .operators import (GeneralizedShiftSpec, HaarShiftSpec, VectorStepFunction, dyadic_hilbert,
                        dyadic_maximal, generalized_haar_shift, haar_multiplier, haar_shift,
                        maximal_haar_shift, orlicz_maximal, paraproduct, rubio_de_francia,
                        square_function, vector_maximal, weighted_dyadic_maximal)
from .oscillation import LernerDecomposition, lerner_decompose, verify_lerner_bound
from .weights import (Weight, YoungFunction, ap_constant, associate, bmo_dyadic_norm, bp_classify,
                      bump_constant)

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_DOMAIN = 0, 1, 2, 3

TRANSFORM_OPS = ["hilbert_d", "shift", "gshift", "maximal_shift", "paraproduct", "multiplier", "square",
                 "maximal", "wmaximal", "vmaximal", "orlicz_maximal", "rdf"]

_CUBE = {"type": "object", "additionalProperties": False, "required": ["level", "coords"],
         "properties": {"level": {"type": "integer", "minimum": 0},
                        "coords": {"type": "array", "items": {"type": "integer", "minimum": 0}}}}
_YOUNG = {"type": "object", "additionalProperties": False, "required": ["family", "r"],
          "properties": {"family": {"enum": ["power", "logbump"]}, "r": {"type": "number"},
                         "a": {"type": "number"}, "coef": {"type": "number"}}}
_NUM = {"type": "number"}

SCHEMAS = {
    "transform": {
        "type": "object", "additionalProperties": False, "required": ["operator"],
        "properties": {
            "operator": {"enum": TRANSFORM_OPS},
            "input": {"type": "string"},
            "inputs": {"type": "array", "items": {"type": "string"}, "minItems": 1},
            "spec": {"type": "string"},
            "kind": {"enum": ["haar", "hilbert", "paraproduct"]},
            "depth": {"type": "integer", "minimum": 0, "maximum": 20},
            "symbol": {"type": "string"},
            "alpha": {"oneOf": [_NUM, {"type": "array", "items": {
                "type": "object", "additionalProperties": False, "required": ["Q", "a"],
                "properties": {"Q": _CUBE, "a": _NUM}}}]},
            "sigma": {"type": "string"},
            "q": _NUM, "s": _NUM, "K": {"type": "integer"},
            "young": _YOUNG,
        },
    },
    "audit": {
        "type": "object", "additionalProperties": False, "required": ["p"],
        "properties": {"weight": {"type": "string"}, "u": {"type": "string"}, "v": {"type": "string"},
                       "p": _NUM, "A": _YOUNG, "B": _YOUNG, "bmo": {"type": "string"}},
    },
    "sweep": {
        "type": "object", "additionalProperties": False, "required": ["operator", "p", "epsilons"],
        "properties": {"operator": {"enum": list(experiments.OPERATORS)}, "p": _NUM,
                       "epsilons": {"type": "array", "items": _NUM, "minItems": 1},
                       "depth": {"type": "integer", "minimum": 1, "maximum": 62},
                       "q": _NUM, "n_random": {"type": "integer", "minimum": 0},
                       "seed": {"type": "integer", "minimum": 0}},
    },
    "extremal": {
        "type": "object", "additionalProperties": False, "required": ["J"],
        "properties": {"J": {"type": "integer"}, "ps": {"type": "array", "items": _NUM, "minItems": 2}},
    },
    "lerner_verify": {
        "type": "object", "additionalProperties": False, "required": ["input"],
        "properties": {"input": {"type": "string"}, "cube": _CUBE, "decomposition": {"type": "string"},
                       "constant": _NUM},
    },
}


class ConfigError(Exception):
    pass


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        _atomic_write(out, text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _resolve(base: Path, name: str) -> Path:
    p = Path(name)
    return p if p.is_absolute() else base / p


def _load_json(path: Path):
    try:
        return json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def _load_step(base: Path, name: str) -> StepFunction:
    obj = _load_json(_resolve(base, name))
    try:
        return StepFunction.from_json(obj)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{name} is not a step function file: {exc}") from exc


def load_config(command: str, path: str | None) -> tuple[dict, Path]:
    if path is None:
        raise ConfigError("--config is required")
    cfg = _load_json(Path(path))
    try:
        jsonschema.validate(cfg, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from exc
    return cfg, Path(path).resolve().parent


def _require(cfg: dict, *keys: str):
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise ConfigError(f"operator {cfg['operator']!r} needs config keys {missing}")


def _shift_spec(cfg: dict, base: Path, f: StepFunction) -> GeneralizedShiftSpec:
    _require(cfg, "kind")
    kind = cfg["kind"]
    if kind == "paraproduct":
        _require(cfg, "symbol")
        return GeneralizedShiftSpec.paraproduct(_load_step(base, cfg["symbol"]))
    depth = cfg.get("depth", int(f.depth))
    cubes = GeneralizedShiftSpec.complete(depth)
    return GeneralizedShiftSpec.haar(cubes) if kind == "haar" else GeneralizedShiftSpec.hilbert(cubes)


def cmd_transform(cfg: dict, base: Path, args) -> tuple[int, str]:
    op = cfg["operator"]
    if op == "vmaximal":
        _require(cfg, "inputs", "q")
        F = VectorStepFunction([_load_step(base, n) for n in cfg["inputs"]])
        return EXIT_OK, vector_maximal(cfg["q"], F).dumps() + "\n"
    _require(cfg, "input")
    f = _load_step(base, cfg["input"])
    if op == "hilbert_d":
        g = dyadic_hilbert(f)
    elif op == "shift":
        _require(cfg, "spec")
        g = haar_shift(HaarShiftSpec.from_json(_load_json(_resolve(base, cfg["spec"]))), f)
    elif op == "gshift":
        g = generalized_haar_shift(_shift_spec(cfg, base, f), f)
    elif op == "maximal_shift":
        g = maximal_haar_shift(_shift_spec(cfg, base, f), f)
    elif op == "paraproduct":
        _require(cfg, "symbol")
        g = paraproduct(_load_step(base, cfg["symbol"]), f)
    elif op == "multiplier":
        _require(cfg, "alpha")
        alpha = cfg["alpha"]
        if isinstance(alpha, list):
            alpha = {DyadicCube.from_json(e["Q"], f.dim): float(e["a"]) for e in alpha}
        g = haar_multiplier(alpha, f)
    elif op == "square":
        g = square_function(f)
    elif op == "maximal":
        g = dyadic_maximal(f)
    elif op == "wmaximal":
        _require(cfg, "sigma")
        g = weighted_dyadic_maximal(_load_step(base, cfg["sigma"]), f)
    elif op == "orlicz_maximal":
        _require(cfg, "young")
        g = orlicz_maximal(YoungFunction.from_config(cfg["young"]), f)
    else:  # rdf
        _require(cfg, "s", "K")
        g = rubio_de_francia(f, cfg["s"], cfg["K"])
    return EXIT_OK, g.dumps() + "\n"


def cmd_audit(cfg: dict, base: Path, args) -> tuple[int, str]:
    p = cfg["p"]
    if not p > 1:
        raise ValueError(f"audits need p > 1, got {p}")
    report = {}
    if "weight" in cfg:
        report["ap"] = ap_constant(Weight.of(_load_step(base, cfg["weight"])), p)
    if "u" in cfg or "v" in cfg or "A" in cfg or "B" in cfg:
        if not all(k in cfg for k in ("u", "v", "A", "B")):
            raise ConfigError("two-weight audits need u, v, A and B")
        A, B = YoungFunction.from_config(cfg["A"]), YoungFunction.from_config(cfg["B"])
        u, v = Weight.of(_load_step(base, cfg["u"])), Weight.of(_load_step(base, cfg["v"]))
        report["bump"] = bump_constant(u, v, p, A, B)
        report["A_bar_in_Bp_dual"] = bp_classify(associate(A), p / (p - 1.0))
        report["B_bar_in_Bp"] = bp_classify(associate(B), p)
    if "bmo" in cfg:
        report["bmo"] = bmo_dyadic_norm(_load_step(base, cfg["bmo"]))
    if not report:
        raise ConfigError("nothing to audit: give weight, u/v/A/B or bmo")
    return EXIT_OK, _dump(report)


def cmd_sweep(cfg: dict, base: Path, args) -> tuple[int, str]:
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    res = experiments.sharpness_sweep(cfg["operator"], cfg["p"], cfg["epsilons"],
                                      depth=cfg.get("depth", 40), q=cfg.get("q", 2.0), seed=seed,
                                      n_random=cfg.get("n_random", 50), threads=args.threads)
    if res.slope is None:
        raise ValueError("a fitted slope needs at least four sweep points")
    summary = _dump(res.summary())
    if args.out is None:
        return EXIT_OK, res.to_csv() + summary
    _atomic_write(args.out.with_name(args.out.stem + ".summary.json"), summary)
    return EXIT_OK, res.to_csv()


def cmd_extremal(cfg: dict, base: Path, args) -> tuple[int, str]:
    rep = experiments.extremal_sd(cfg["J"], cfg.get("ps", [4, 8, 16, 32, 64]))
    return EXIT_OK, _dump(rep.summary())


def cmd_lerner_verify(cfg: dict, base: Path, args) -> tuple[int, str]:
    f = _load_step(base, cfg["input"])
    Q0 = DyadicCube.from_json(cfg["cube"], f.dim) if "cube" in cfg else DyadicCube.root(f.dim)
    if "decomposition" in cfg:
        d = LernerDecomposition.from_json(_load_json(_resolve(base, cfg["decomposition"])), f.dim)
    else:
        d = lerner_decompose(f, Q0)
    rep = verify_lerner_bound(f, Q0, d, cfg.get("constant", 4.0))
    print(f"max residual {rep.max_residual:.6g}: {'pass' if rep.passed else 'FAIL'}", file=sys.stderr)
    return (EXIT_OK if rep.passed else EXIT_FAILED), _dump(rep.to_json())


COMMANDS = {"transform": cmd_transform, "audit": cmd_audit, "sweep": cmd_sweep,
            "extremal": cmd_extremal, "lerner_verify": cmd_lerner_verify}


def _threads(value: str | None) -> int:
    raw = value if value is not None else os.environ.get("DYADIC_SHARP_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"thread count must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError(f"thread count must be positive, got {n}")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dyadic-sharp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int, help="random seed (u64)")
        sp.add_argument("--out", type=Path, help="output path (stdout when omitted)")
        sp.add_argument("--threads", help="worker threads (default: $DYADIC_SHARP_THREADS or 1)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        args.threads = _threads(args.threads)
        if args.seed is not None and not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        cfg, base = load_config(args.command, args.config)
        code, text = COMMANDS[args.command](cfg, base, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, TypeError, ZeroDivisionError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    _emit(text, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
