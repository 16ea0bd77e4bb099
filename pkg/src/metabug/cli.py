"""Command-line surface tying the pipeline together.

One binary, five subcommands: `gen` synthesizes a labelled corpus,
`train` fits the ranking model on it, `detect` ranks candidate slices in
program files, `explain` turns ranked candidates into trace reports, and
`eval` scores a detect report (and optionally its traces) against
recorded ground truth.

Options resolve in three layers: built-in defaults, then a `key = value`
config file, then command-line flags.  The environment variable
`METABUG_SEED` acts as the seed when neither layer supplies one.  Every
command is deterministic under (inputs, seed).

Exit codes: 0 success, 1 usage error, 2 broken input data, 3 internal.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import random
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from .collectors import BUG_KINDS, TestSlice, collect
from .explain import evaluate_trace, find_feasible_path
from .meta.rank import rank_slices, score_slices
from .meta.train import TrainConfig, load_groups, train
from .minilang.ast import ParseError, ResolutionError
from .minilang.parser import parse_program
from .nn.gnn import graph_embed, graph_tensors
from .nn.params import ModelParams, ParamsError
from .synthgen.generator import GenConfig, InvalidConfig, generate_corpus

DETECT_SCHEMA = "detect-report/1"
TRACE_SCHEMA = "trace-report/1"
METRICS_SCHEMA = "eval-metrics/1"
BASELINE_TRIALS = 1000


class UsageError(Exception):
    """Bad flags or config values (exit 1)."""


class DataError(Exception):
    """An input file is missing, malformed, or inconsistent (exit 2)."""


class NotFound(DataError):
    """A requested slice id does not appear in the report."""


# --- configuration ------------------------------------------------------------


@dataclass(frozen=True)
class Config:
    """Resolved knobs shared by the pipeline commands.

    `steps` is message-passing depth in the encoder, `read_steps` the
    number of joint reading steps when a group is refined together, and
    `epsilon` the mean-loss improvement below which training counts an
    epoch as stale.  The three `no_*` switches are ablations: encode
    without summary-node attention, score without the joint refinement,
    or keep the refinement stage but run zero reading steps.
    """

    d: int = 24
    steps: int = 3
    read_steps: int = 3
    epsilon: float = 1e-4
    lr: float = 1e-3
    epochs: int = 60
    seed: int = 0
    cutoff: int = 10
    no_global_attention: bool = False
    no_relational_embedding: bool = False
    no_read_steps: bool = False


_CONFIG_TYPES = {f.name: f.type for f in fields(Config)}


def _coerce(key: str, raw: str, where: str, lineno: int):
    ty = _CONFIG_TYPES[key]
    try:
        if ty == "bool":
            low = raw.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if ty == "int":
            return int(raw)
        return float(raw)
    except ValueError as e:
        raise UsageError(f"{where}:{lineno}: bad value for {key}: {e}") from e


def parse_config_text(text: str, where: str = "<config>") -> dict:
    """Parse `key = value` lines; `#` starts a comment, blanks are skipped."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{where}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, val = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _CONFIG_TYPES:
            raise UsageError(f"{where}:{lineno}: unknown option {key!r}")
        values[key] = _coerce(key, val.strip().strip("\"'"), where, lineno)
    return values


def config_text(cfg: Config) -> str:
    """Render a config as the same `key = value` format the parser reads."""
    out = []
    for f in fields(Config):
        v = getattr(cfg, f.name)
        out.append(f"{f.name} = {str(v).lower() if isinstance(v, bool) else v}")
    return "\n".join(out) + "\n"


def _validate(cfg: Config) -> None:
    for name in ("d", "steps", "read_steps", "cutoff"):
        if getattr(cfg, name) < 1:
            raise UsageError(f"{name} must be at least 1, got {getattr(cfg, name)}")
    if cfg.lr <= 0:
        raise UsageError(f"lr must be positive, got {cfg.lr}")
    if cfg.epsilon <= 0:
        raise UsageError(f"epsilon must be positive, got {cfg.epsilon}")
    if cfg.epochs < 0 or cfg.seed < 0:
        raise UsageError("epochs and seed must be non-negative")


def resolve_config(args: argparse.Namespace) -> Config:
    """Defaults, overlaid by the config file, overlaid by explicit flags."""
    values: dict = {}
    path = getattr(args, "config", None)
    if path:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise UsageError(f"cannot read config file {path}: {e}") from e
        values.update(parse_config_text(text, where=str(path)))
    if "seed" not in values and getattr(args, "seed", None) is None:
        env = os.environ.get("METABUG_SEED")
        if env is not None:
            try:
                values["seed"] = int(env)
            except ValueError as e:
                raise UsageError(f"METABUG_SEED must be an integer, got {env!r}") from e
    for f in fields(Config):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    cfg = Config(**values)
    _validate(cfg)
    return cfg


# --- shared plumbing ----------------------------------------------------------


def _load_params(path: str) -> ModelParams:
    try:
        return ModelParams.load(path)
    except ParamsError as e:
        raise DataError(str(e)) from e


def _load_json(path: str, expect_schema: str | None = None) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise DataError(f"{path} is not valid JSON: {e}") from e
    if expect_schema is not None and doc.get("schema") != expect_schema:
        raise DataError(
            f"{path}: schema tag {doc.get('schema')!r} does not match {expect_schema!r}")
    return doc


def _parse_file(path: str):
    try:
        src = Path(path).read_text()
    except OSError as e:
        raise DataError(f"cannot read program {path}: {e}") from e
    try:
        return parse_program(src)
    except (ParseError, ResolutionError) as e:
        raise DataError(f"{path}: {e}") from e


def _write_json(path: str | Path, doc: dict) -> None:
    p = Path(path)
    if p.parent != Path(""):
        p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _canon(path: str | Path) -> str:
    return str(Path(path).resolve())


def _detect_params(params: ModelParams, cfg: Config) -> ModelParams:
    if cfg.no_read_steps and params.rel_steps != 0:
        return dataclasses.replace(params, rel_steps=0)
    return params


# --- gen ----------------------------------------------------------------------


def cmd_gen(args: argparse.Namespace, cfg: Config) -> int:
    kinds = tuple(k.strip().upper() for k in args.kinds.split(",")) if args.kinds else BUG_KINDS
    gen = GenConfig(
        seed=cfg.seed, kinds=kinds, groups_per_kind=args.groups,
        buggy_per_group=args.buggy, correct_ratio=args.ratio,
        noise=args.noise, battery_size=args.battery,
    )
    try:
        gen.validate()
    except InvalidConfig as e:
        raise UsageError(str(e)) from e
    try:
        manifest = generate_corpus(gen, args.out)
    except OSError as e:
        raise DataError(f"cannot write corpus under {args.out}: {e}") from e

    print(f"{'kind':<6} {'groups':>6} {'buggy':>6} {'correct':>8}")
    n_groups = 0
    for kind in kinds:
        groups = manifest["kinds"][kind]["groups"]
        buggy = sum(len(g["buggy"]) for g in groups)
        correct = sum(len(g["correct"]) for g in groups)
        n_groups += len(groups)
        print(f"{kind:<6} {len(groups):>6} {buggy:>6} {correct:>8}")
    print(f"{'total':<6} {n_groups:>6} {manifest['totals']['buggy']:>6} "
          f"{manifest['totals']['correct']:>8}")
    print(f"corpus written to {args.out}")
    return 0


# --- train --------------------------------------------------------------------


def _validate_corpus(root: Path) -> dict:
    """Read the manifest and fail early, naming the first broken file."""
    mpath = root / "manifest.json"
    manifest = _load_json(str(mpath), expect_schema="corpus-manifest/1")
    try:
        kinds = manifest["kinds"]
        for block in kinds.values():
            for entry in block["groups"]:
                for rel in list(entry["buggy"]) + list(entry["correct"]):
                    _parse_file(str(root / rel))
                for rel in entry["buggy"]:
                    tpath = (root / rel).with_suffix("").with_suffix(".truth.json")
                    truth = _load_json(str(tpath))
                    if "bug_point" not in truth:
                        raise DataError(f"{tpath}: missing bug_point")
    except (KeyError, TypeError) as e:
        raise DataError(f"{mpath}: manifest structure is broken near {e!r}") from e
    return manifest


def cmd_train(args: argparse.Namespace, cfg: Config) -> int:
    root = Path(args.corpus)
    _validate_corpus(root)
    groups, skipped = load_groups(root)
    if not groups:
        raise DataError(f"corpus {root} yielded no trainable groups")

    resume = _load_params(args.resume) if args.resume else None
    tc = TrainConfig(
        seed=cfg.seed, d=cfg.d, gnn_steps=cfg.steps,
        rel_steps=0 if cfg.no_read_steps else cfg.read_steps,
        lr=cfg.lr, epochs=cfg.epochs, min_delta=cfg.epsilon,
        attended=not cfg.no_global_attention,
        relational=not cfg.no_relational_embedding,
    )
    out = Path(args.out)
    loss_path = Path(args.log) if args.log else out.with_suffix(".loss.csv")
    res = train(
        groups, tc, log_path=loss_path,
        checkpoint_dir=args.checkpoint_dir, checkpoint_every=args.checkpoint_every,
        resume=resume,
    )
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    res.params.save(out)
    snap = out.with_suffix(".config")
    snap.write_text(config_text(cfg))

    print(f"trained on {len(groups)} groups ({len(skipped)} skipped"
          + (f": {', '.join(skipped)}" if skipped else "") + ")")
    if res.history:
        print(f"epochs run: {res.stopped_epoch}  final mean loss: "
              f"{res.history[-1]['mean_loss']:.6f}")
    else:
        print("epochs run: 0 (initial weights)")
    print(f"weights: {out}\nconfig snapshot: {snap}\nloss log: {loss_path}")
    return 0


# --- detect -------------------------------------------------------------------


def _collect_pools(paths: list[str], kinds: tuple[str, ...]) -> dict[str, list[TestSlice]]:
    pools: dict[str, list[TestSlice]] = {k: [] for k in kinds}
    for path in paths:
        program = _parse_file(path)
        for kind in kinds:
            for ts in collect(kind, program):
                ts.origin = path
                pools[kind].append(ts)
    return pools


def cmd_detect(args: argparse.Namespace, cfg: Config) -> int:
    params = _detect_params(_load_params(args.model), cfg)
    if args.kind:
        kind = args.kind.upper()
        if kind not in BUG_KINDS:
            raise UsageError(f"unknown bug kind {args.kind!r}; expected one of {BUG_KINDS}")
        kinds: tuple[str, ...] = (kind,)
    else:
        kinds = BUG_KINDS

    pools = _collect_pools(args.files, kinds)
    report: dict = {
        "schema": DETECT_SCHEMA,
        "model": str(args.model),
        "cutoff": cfg.cutoff,
        "seed": cfg.seed,
        "ablations": {
            "no_global_attention": cfg.no_global_attention,
            "no_relational_embedding": cfg.no_relational_embedding,
            "no_read_steps": cfg.no_read_steps,
        },
        "files": list(args.files),
        "kinds": {},
        "skipped": {},
    }
    for kind in kinds:
        pool = pools[kind]
        if len(pool) < 2:
            reason = f"{len(pool)} candidate slice(s); ranking needs at least 2"
            report["skipped"][kind] = reason
            print(f"warning: skipping {kind}: {reason}", file=sys.stderr)
            continue
        ranked = rank_slices(score_slices(
            pool, params,
            attended=not cfg.no_global_attention,
            relational=not cfg.no_relational_embedding,
        ))
        report["kinds"][kind] = {
            "n_slices": len(pool),
            "ranked": [
                {
                    "slice_id": r.slice.slice_id,
                    "origin": r.slice.origin,
                    "key": list(r.slice.key),
                    "bug_point": r.slice.bug_point,
                    "score": r.score,
                    "rank": i + 1,
                    "within_cutoff": i + 1 <= cfg.cutoff,
                }
                for i, r in enumerate(ranked)
            ],
        }
        shown = min(cfg.cutoff, len(ranked))
        print(f"{kind}: {len(pool)} candidates, top {shown}:")
        for entry in report["kinds"][kind]["ranked"][:shown]:
            print(f"  {entry['rank']:3d}. {entry['score']:10.4f}  {entry['slice_id']}"
                  f"  (bug point {entry['bug_point']})")
    _write_json(args.out, report)
    print(f"report written to {args.out}")
    return 0


# --- explain ------------------------------------------------------------------


def _rebuild_slice(entry: dict, kind: str, programs: dict) -> TestSlice:
    origin = entry["origin"]
    if origin not in programs:
        programs[origin] = _parse_file(origin)
    for ts in collect(kind, programs[origin]):
        ts.origin = origin
        if ts.slice_id == entry["slice_id"]:
            return ts
    raise DataError(
        f"slice {entry['slice_id']} no longer matches {origin}; program changed?")


def cmd_explain(args: argparse.Namespace, cfg: Config) -> int:
    params = _load_params(args.model)
    report = _load_json(args.report, expect_schema=DETECT_SCHEMA)

    targets: list[tuple[str, dict]] = []
    for kind in sorted(report["kinds"]):
        for entry in report["kinds"][kind]["ranked"]:
            targets.append((kind, entry))
    if args.slice:
        targets = [(k, e) for k, e in targets if e["slice_id"] == args.slice]
        if not targets:
            raise NotFound(f"slice id {args.slice!r} not found in {args.report}")
    else:
        targets = [(k, e) for k, e in targets if e["within_cutoff"]]

    programs: dict = {}
    traces = []
    for kind, entry in targets:
        ts = _rebuild_slice(entry, kind, programs)
        gt = graph_tensors(ts.build_graph())
        _, amap = graph_embed(gt, params, attended=not cfg.no_global_attention)
        rep = find_feasible_path(ts, amap, seed=cfg.seed, tensors=gt)
        print(rep.render_text())
        doc = rep.to_json(rank=entry["rank"], distance=entry["score"])
        doc["origin"] = entry["origin"]
        doc["bug_kind"] = kind
        doc["statements"] = list(rep.statements)
        traces.append(doc)
    if args.out:
        _write_json(args.out, {
            "schema": TRACE_SCHEMA,
            "model": str(args.model),
            "detect_report": str(args.report),
            "seed": cfg.seed,
            "traces": traces,
        })
        print(f"traces written to {args.out}")
    return 0


# --- eval ---------------------------------------------------------------------


def _load_truths(truth_dir: str, scanned: set[str]) -> dict[str, dict]:
    """Ground truth by canonical program path, limited to scanned files."""
    root = Path(truth_dir)
    if not root.is_dir():
        raise DataError(f"truth directory {truth_dir} does not exist")
    truths: dict[str, dict] = {}
    for tpath in sorted(root.rglob("*.truth.json")):
        doc = _load_json(str(tpath))
        prog = tpath.with_name(tpath.name[: -len(".truth.json")] + ".mbl")
        if not prog.exists():
            raise DataError(f"truth file {tpath} has no program next to it ({prog})")
        if _canon(prog) in scanned:
            truths[_canon(prog)] = doc
    return truths


def _match(entry: dict, kind: str, truths: dict[str, dict]) -> str | None:
    """Canonical path of the bug this entry covers, if any."""
    canon = _canon(entry["origin"])
    truth = truths.get(canon)
    if truth and truth["bug_kind"] == kind and truth["bug_point"] == entry["bug_point"]:
        return canon
    return None


def _baseline_tp(matches: list[str | None], n_cut: int, trials: int,
                 rng: random.Random) -> float:
    """Expected bugs covered when the same pool is ranked at random."""
    total = 0
    pool = list(matches)
    for _ in range(trials):
        rng.shuffle(pool)
        total += len({m for m in pool[:n_cut] if m is not None})
    return total / trials


def _eval_traces(traces_path: str, truths: dict[str, dict]) -> dict:
    doc = _load_json(traces_path, expect_schema=TRACE_SCHEMA)
    n_eval = n_correct = n_skipped = 0
    programs: dict = {}
    for t in doc["traces"]:
        canon = _canon(t["origin"])
        truth = truths.get(canon)
        if (truth is None or truth["bug_kind"] != t["bug_kind"]
                or truth["bug_point"] != t["bug_point"]):
            n_skipped += 1
            continue
        if canon not in programs:
            programs[canon] = _parse_file(t["origin"])
        n_eval += 1
        n_correct += evaluate_trace(t["statements"], truth, programs[canon])
    return {
        "n_evaluated": n_eval,
        "n_correct": n_correct,
        "n_skipped": n_skipped,
        "correctness_rate": (n_correct / n_eval) if n_eval else None,
    }


def cmd_eval(args: argparse.Namespace, cfg: Config) -> int:
    report = _load_json(args.report, expect_schema=DETECT_SCHEMA)
    cutoff = report["cutoff"]
    scanned = {_canon(p) for p in report["files"]}
    truths = _load_truths(args.truth, scanned)
    rng = random.Random(cfg.seed)

    per_kind = {}
    totals = {"n_bugs": 0, "tp": 0, "fp": 0, "fn": 0}
    for kind in sorted(report["kinds"]):
        ranked = report["kinds"][kind]["ranked"]
        matches = [_match(e, kind, truths) for e in ranked]
        n_bugs = sum(1 for t in truths.values() if t["bug_kind"] == kind)
        cut = [m for e, m in zip(ranked, matches) if e["within_cutoff"]]
        tp = len({m for m in cut if m is not None})
        fp = sum(1 for m in cut if m is None)
        fn = n_bugs - tp
        expected = _baseline_tp(matches, min(cutoff, len(matches)),
                                BASELINE_TRIALS, rng)
        per_kind[kind] = {
            "n_bugs": n_bugs,
            "n_slices": len(ranked),
            "tp": tp,
            "fp": fp,
            "fn": fn,
            "tp_rate": (tp / n_bugs) if n_bugs else None,
            "random_tp_expected": expected,
            "random_tp_rate": (expected / n_bugs) if n_bugs else None,
        }
        totals["n_bugs"] += n_bugs
        totals["tp"] += tp
        totals["fp"] += fp
        totals["fn"] += fn

    metrics = {
        "schema": METRICS_SCHEMA,
        "detect_report": str(args.report),
        "cutoff": cutoff,
        "baseline_trials": BASELINE_TRIALS,
        "per_kind": per_kind,
        "totals": totals,
        "traces": _eval_traces(args.traces, truths) if args.traces else None,
    }
    if args.out:
        _write_json(args.out, metrics)
        for kind, row in per_kind.items():
            print(f"{kind}: TP {row['tp']}/{row['n_bugs']}  FP {row['fp']}  FN {row['fn']}"
                  f"  (random expectation {row['random_tp_expected']:.2f})")
        if metrics["traces"]:
            tr = metrics["traces"]
            print(f"traces: {tr['n_correct']}/{tr['n_evaluated']} correct")
        print(f"metrics written to {args.out}")
    else:
        print(json.dumps(metrics, indent=2, sort_keys=True))
    return 0


# --- argument parsing ---------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad flags; the contract reserves 2 for data."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_config_flags(p: argparse.ArgumentParser, *names: str) -> None:
    p.add_argument("--config", metavar="FILE",
                   help="key = value option file (flags win)")
    if "seed" in names:
        p.add_argument("--seed", type=int, default=None,
                       help="RNG seed (falls back to METABUG_SEED)")
    if "train" in names:
        p.add_argument("--d", type=int, default=None, help="embedding width")
        p.add_argument("--steps", type=int, default=None,
                       help="message-passing steps")
        p.add_argument("--read-steps", dest="read_steps", type=int, default=None,
                       help="joint refinement reading steps")
        p.add_argument("--epsilon", type=float, default=None,
                       help="early-stop improvement threshold")
        p.add_argument("--lr", type=float, default=None, help="learning rate")
        p.add_argument("--epochs", type=int, default=None)
    if "cutoff" in names:
        p.add_argument("--cutoff", type=int, default=None,
                       help="report the top N candidates per kind")
    if "ablations" in names:
        p.add_argument("--no-global-attention", dest="no_global_attention",
                       action="store_const", const=True, default=None,
                       help="encode without summary-node attention")
        p.add_argument("--no-relational-embedding", dest="no_relational_embedding",
                       action="store_const", const=True, default=None,
                       help="score raw embeddings without joint refinement")
        p.add_argument("--no-read-steps", dest="no_read_steps",
                       action="store_const", const=True, default=None,
                       help="keep refinement but run zero reading steps")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="metabug", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command",
                                parser_class=_Parser)

    p = sub.add_parser("gen",
                       help="synthesize a labelled corpus")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--kinds", help="comma-separated subset of "
                                   + ",".join(BUG_KINDS))
    p.add_argument("--groups", type=int, default=GenConfig.groups_per_kind,
                   help="groups per kind")
    p.add_argument("--buggy", type=int, default=GenConfig.buggy_per_group,
                   help="buggy programs per group")
    p.add_argument("--ratio", type=int, default=GenConfig.correct_ratio,
                   help="correct programs per buggy one")
    p.add_argument("--noise", type=float, default=GenConfig.noise,
                   help="fraction of correct-labelled files that are buggy")
    p.add_argument("--battery", type=int, default=GenConfig.battery_size,
                   help="inputs per validation battery")
    _add_config_flags(p, "seed")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train",
                       help="fit the ranking model on a corpus")
    p.add_argument("--corpus", required=True, metavar="DIR")
    p.add_argument("--out", required=True, metavar="FILE",
                   help="where to write the weights")
    p.add_argument("--log", metavar="FILE",
                   help="loss CSV (default: next to the weights)")
    p.add_argument("--resume", metavar="FILE",
                   help="continue from a checkpoint; --epochs counts the remainder")
    p.add_argument("--checkpoint-dir", metavar="DIR")
    p.add_argument("--checkpoint-every", type=int, default=0, metavar="N",
                   help="write a checkpoint every N epochs")
    _add_config_flags(p, "seed", "train", "ablations")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("detect",
                       help="rank candidate slices in program files")
    p.add_argument("files", nargs="+", metavar="FILE")
    p.add_argument("--model", required=True, metavar="FILE")
    p.add_argument("--out", required=True, metavar="FILE",
                   help="where to write the JSON report")
    p.add_argument("--kind", help="restrict to one bug kind")
    _add_config_flags(p, "seed", "cutoff", "ablations")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("explain",
                       help="trace reports for ranked candidates")
    p.add_argument("--model", required=True, metavar="FILE")
    p.add_argument("--report", required=True, metavar="FILE",
                   help="detect report to explain")
    p.add_argument("--slice", metavar="ID",
                   help="explain one slice instead of everything within cutoff")
    p.add_argument("--out", metavar="FILE", help="also write traces as JSON")
    _add_config_flags(p, "seed", "ablations")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("eval",
                       help="score a report against recorded ground truth")
    p.add_argument("--report", required=True, metavar="FILE")
    p.add_argument("--truth", required=True, metavar="DIR",
                   help="directory holding *.truth.json next to programs")
    p.add_argument("--traces", metavar="FILE",
                   help="trace report to judge for correctness")
    p.add_argument("--out", metavar="FILE",
                   help="write metrics JSON here instead of stdout")
    _add_config_flags(p, "seed")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        cfg = resolve_config(args)
        return args.func(args, cfg)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except DataError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001 — last-resort barrier for exit code 3
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
