"""Command-line entry point: ``sigagent <verb> [options]``.

Exit codes: 0 success, 1 runtime error, 2 configuration or usage error,
3 data-integrity error (corrupt compressed data).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import shutil
import sys
from collections import Counter
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, corpus, detector
from .codec import (PredictorRegistry, compression_efficiency, decode, encode, pack_archive,
                    unpack_archive)
from .codec.container import ARCHIVE_MAGIC, MAGIC as BLOB_MAGIC, CompressedBlob
from .config import RunConfig, load_config, parse_assignments
from .errors import ConfigError, CorruptPayload, OptimizationAborted, PipelineAborted, SigAgentError
from .optimizer import SurrogateProposer, get_objective, run_de, run_hybrid, run_sa
from .planner import AgentMemory, Planner, PlannerConfig, SpRequest
from .provider import NgramPredictor, RemoteConfig, RemoteProvider, ScriptedProvider, train_from_texts
from .retrieval import VectorIndex, retrieve

log = logging.getLogger("sigagent")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG, EXIT_INTEGRITY = 0, 1, 2, 3
FEWSHOT_QUERY = "sea clutter target detection Doppler spectrum features"


# ---- shared helpers ------------------------------------------------------------------

def dump_json(obj) -> str:
    def clean(x):
        if isinstance(x, float) and not math.isfinite(x):
            return None
        if isinstance(x, dict):
            return {str(k): clean(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [clean(v) for v in x]
        if isinstance(x, np.generic):
            return clean(x.item())
        return x
    return json.dumps(clean(obj), indent=2, sort_keys=True) + "\n"


def _rel(cfg: RunConfig, p: Path) -> str:
    try:
        return os.path.relpath(p, cfg.base_dir)
    except ValueError:
        return str(p)


def experiment_report(kind: str, cfg: RunConfig, metrics: dict, artifacts: dict | None = None,
                      ledger: dict | None = None, **extra) -> dict:
    rep = {"kind": kind, "version": __version__, "config": cfg.echo(), "metrics": metrics,
           "artifacts": {k: _rel(cfg, Path(v)) for k, v in (artifacts or {}).items()},
           "ledger": dict(sorted((ledger or {}).items()))}
    rep.update(extra)
    return rep


def write_report(path: Path, report: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_json(report))
    return path


def output_dir(cfg: RunConfig) -> Path:
    return cfg.path("paths", "output")


def knowledge_index(cfg: RunConfig) -> VectorIndex:
    path = cfg.path("paths", "knowledge") or resources.files("sigagent.data").joinpath("knowledge.jsonl")
    return VectorIndex.from_jsonl(path)


def chat_provider(cfg: RunConfig, seed: int | None = None):
    p = cfg["provider"]
    kind = p["kind"]
    if kind == "scripted":
        fixture = cfg.path("provider", "fixture")
        if fixture is None:
            raise ConfigError("provider.kind=scripted needs provider.fixture")
        return ScriptedProvider.from_file(fixture)
    if kind == "remote":
        if not p["endpoint"] or not p["model"]:
            raise ConfigError("provider.kind=remote needs provider.endpoint and provider.model")
        return RemoteProvider(RemoteConfig(p["endpoint"], p["model"], p["api_key_env"], float(p["timeout"])))
    if kind == "surrogate":
        return SurrogateProposer(cfg.seed if seed is None else seed)
    raise ConfigError(f"provider.kind={kind} cannot answer chat prompts for this command")


class CountingProvider:
    def __init__(self, inner, ledger: Counter):
        self.inner, self.ledger = inner, ledger

    def chat(self, request):
        self.ledger[f"provider.{request.tag or 'untagged'}"] += 1
        return self.inner.chat(request)


def model_path(cfg: RunConfig) -> Path:
    return cfg.path("codec", "model") or cfg.path("paths", "models") / f"ngram-order{cfg['codec']['order']}.slpm"


def load_predictor(cfg: RunConfig) -> NgramPredictor:
    path = model_path(cfg)
    if not path.exists():
        raise ConfigError(f"predictor {path} not found; run 'sigagent gen-data' first or set codec.model")
    return NgramPredictor.load(path)


def split_blocks(data: bytes, lines_per_block: int) -> list[bytes]:
    if not data:
        return [b""]
    lines = data.splitlines(keepends=True)
    return [b"".join(lines[i:i + lines_per_block]) for i in range(0, len(lines), lines_per_block)]


# ---- verbs ------------------------------------------------------------------------------

def cmd_plan(cfg: RunConfig, args) -> int:
    try:
        request = SpRequest.from_dict(json.loads(Path(args.request).read_text()))
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot read request {args.request}: {exc}") from exc
    pc = cfg["planner"]
    pconf = PlannerConfig(top_k=int(pc["top_k"]), max_hops=int(pc["max_hops"]),
                          simple_threshold=float(pc["simple_threshold"]),
                          moderate_threshold=float(pc["moderate_threshold"]))
    planner = Planner(chat_provider(cfg), knowledge_index(cfg), AgentMemory(), pconf)
    out = Path(args.out) if args.out else output_dir(cfg) / "plan_report.json"
    try:
        result = planner.run_pipeline(request)
        code = EXIT_OK
    except PipelineAborted as exc:
        result, code = exc.report, EXIT_RUNTIME
        log.error("planning aborted: %s", exc)
    ledger = result.pop("ledger", {})
    tiers = Counter(s.get("complexity") for s in result.get("chain", []))
    report = experiment_report("plan", cfg, {"subtasks": len(result.get("chain", [])),
                                             "tiers": {k: v for k, v in tiers.items() if k}},
                               ledger=ledger, plan=result)
    write_report(out, report)
    print(f"plan: {result.get('status')} with {len(result.get('chain', []))} subtasks -> {out}")
    return code


def cmd_compress(cfg: RunConfig, args) -> int:
    predictor = load_predictor(cfg)
    data = Path(args.input).read_bytes()
    ks = [int(args.K)] if args.K else [int(k) for k in cfg["codec"]["context_lengths"]]
    blocks = split_blocks(data, int(cfg["codec"]["block_lines"]))
    rows, archive = [], None
    for K in ks:
        blobs, sizes, verified = [], [], 0
        for b in blocks:
            blob = encode(b, K, predictor)
            if decode(blob, predictor) != b:
                raise CorruptPayload(f"round trip failed for a block at K={K}")
            verified += 1
            blobs.append(blob)
            sizes.append(len(blob))
        original = sum(len(b) for b in blocks)
        compressed = sum(sizes)
        block_ce = [compression_efficiency(len(b), s) for b, s in zip(blocks, sizes) if len(b)]
        rows.append({"K": K, "original_bytes": original, "compressed_bytes": compressed,
                     "ce": compression_efficiency(original, compressed) if original else "n/a",
                     "mean_block_ce": float(np.mean(block_ce)) if block_ce else "n/a",
                     "blocks": len(blocks), "verified": verified})
        if archive is None:
            archive = pack_archive(blobs)
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(archive)
    report = experiment_report("compress", cfg, {"table": rows, "archive_bytes": len(archive),
                                                 "archive_K": ks[0]},
                               artifacts={"archive": out, "model": model_path(cfg)},
                               model_id=predictor.model_id)
    rpath = write_report(Path(args.report) if args.report else output_dir(cfg) / "compress_report.json", report)
    print(format_compress_table(rows))
    print(f"wrote {out} ({len(archive)} bytes), report {rpath}")
    return EXIT_OK


def format_compress_table(rows) -> str:
    lines = [f"{'K':>3} {'bytes':>10} {'compressed':>11} {'CE':>8} {'mean CE':>8} {'verified':>9}"]
    for r in rows:
        ce = r["ce"] if isinstance(r["ce"], str) else f"{r['ce']:.3f}"
        mce = r["mean_block_ce"] if isinstance(r["mean_block_ce"], str) else f"{r['mean_block_ce']:.3f}"
        lines.append(f"{r['K']:>3} {r['original_bytes']:>10} {r['compressed_bytes']:>11} {ce:>8} {mce:>8} "
                     f"{r['verified']:>4}/{r['blocks']:<4}")
    return "\n".join(lines)


def cmd_decompress(cfg: RunConfig, args) -> int:
    data = Path(args.input).read_bytes()
    registry = PredictorRegistry(model_dir=cfg.path("paths", "models"))
    if cfg.path("codec", "model"):
        registry.add(NgramPredictor.load(cfg.path("codec", "model")))
    if data[:4] == ARCHIVE_MAGIC:
        blobs = unpack_archive(data)
    elif data[:4] == BLOB_MAGIC:
        blobs = [CompressedBlob.from_bytes(data)]
    else:
        raise CorruptPayload("input is neither a compressed block nor an archive")
    text = b"".join(decode(b, registry) for b in blobs)
    Path(args.output).write_bytes(text)
    print(f"decoded {len(blobs)} block(s), {len(text)} bytes -> {args.output}")
    return EXIT_OK


def _objective(cfg: RunConfig, name: str):
    if name == "detection":
        det = cfg["detector"]
        return get_objective("detection", seed=cfg.seed, n_frames=int(det["n_frames"]),
                             frame_length=int(det["frame_length"]), scr_db=float(det["objective_scr_db"]),
                             shape=float(det["shape"]), alpha=float(cfg["optimizer"]["alpha"]),
                             train_fraction=float(det["train_fraction"]))
    try:
        return get_objective(name)
    except KeyError as exc:
        raise ConfigError(str(exc)) from None


def run_comparison(cfg: RunConfig, objective, methods, runs: int, ledger: Counter) -> dict:
    opt = cfg["optimizer"]
    budget, n_init = int(opt["budget"]), int(opt["n_init"])
    F, CR = float(opt["F"]), float(opt["CR"])
    results = {}
    for method in methods:
        reports = []
        for r in range(runs):
            seed = cfg.seed + r
            if method == "hybrid":
                inner = SurrogateProposer(seed) if opt["proposer"] == "surrogate" else chat_provider(cfg, seed)
                prov = CountingProvider(inner, ledger)
                rep = run_hybrid(objective, provider=prov, budget=budget, seed=seed, n_init=n_init, F=F, CR=CR)
            elif method == "de":
                rep = run_de(objective, budget=budget, seed=seed, population=n_init, F=F, CR=CR)
            elif method == "sa":
                rep = run_sa(objective, budget=budget, seed=seed)
            else:
                raise ConfigError(f"unknown optimizer method {method!r}")
            ledger[f"evaluations.{method}"] += rep.evaluations
            reports.append(rep)
        best = [rep.best_score for rep in reports]
        results[method] = {"mean": float(np.mean(best)), "std": float(np.std(best)), "best_scores": best,
                           "runs": [rep.to_dict() for rep in reports]}
    return results


def cmd_optimize(cfg: RunConfig, args) -> int:
    name = args.objective or cfg["optimizer"]["objective"]
    objective = _objective(cfg, name)
    runs = int(args.runs or cfg["optimizer"]["runs"])
    ledger: Counter = Counter()
    try:
        results = run_comparison(cfg, objective, cfg["optimizer"]["methods"], runs, ledger)
    except OptimizationAborted as exc:
        report = experiment_report("optimize", cfg, {"objective": name, "aborted": str(exc)}, ledger=ledger,
                                   partial=exc.report.to_dict())
        write_report(output_dir(cfg) / f"optimize_{name}.json", report)
        raise
    table = {m: {"mean": r["mean"], "std": r["std"]} for m, r in results.items()}
    best_method = max(results, key=lambda m: max(results[m]["best_scores"]))
    best_run = max(results[best_method]["runs"], key=lambda d: d["best_score"] if d["best_score"] is not None
                   else -math.inf)
    metrics = {"objective": name, "runs": runs, "budget": int(cfg["optimizer"]["budget"]), "table": table,
               "best": {"method": best_method, "theta": best_run["best_theta"], "score": best_run["best_score"],
                        "names": objective.space.names}}
    out = Path(args.out) if args.out else output_dir(cfg) / f"optimize_{name}.json"
    report = experiment_report("optimize", cfg, metrics, ledger=ledger,
                               trajectories={m: r["runs"] for m, r in results.items()})
    write_report(out, report)
    print(format_optimize_table(metrics))
    print(f"report -> {out}")
    return EXIT_OK


def format_optimize_table(metrics) -> str:
    lines = [f"objective={metrics['objective']} runs={metrics['runs']} budget={metrics['budget']}",
             f"{'method':<8} {'mean best':>12} {'std':>10}"]
    for m, row in metrics["table"].items():
        lines.append(f"{m:<8} {row['mean']:>12.6g} {row['std']:>10.4g}")
    return "\n".join(lines)


def load_scene(path: Path) -> list[detector.LabeledFrame]:
    from .dsp import read_signal
    manifest = json.loads(path.read_text())
    frames = []
    for item in manifest["frames"]:
        frame, label = read_signal(path.parent / item["signal"])
        frames.append(detector.LabeledFrame(frame, item.get("label") or label))
    return frames


def scene_from_config(cfg: RunConfig) -> list[detector.LabeledFrame]:
    det = cfg["detector"]
    if cfg.path("detector", "scene"):
        return load_scene(cfg.path("detector", "scene"))
    return detector.synth_scene(cfg.seed, int(det["n_frames"]), int(det["frame_length"]), float(det["scr_db"]),
                                float(det["shape"]))


def cmd_detect(cfg: RunConfig, args) -> int:
    frames = scene_from_config(cfg)
    det = cfg["detector"]
    theta = [float(v) for v in det["theta"]]
    ledger: Counter = Counter()
    if args.mode == "supervised":
        m = detector.supervised_run(frames, theta, float(det["train_fraction"]))
        metrics = {"mode": "supervised", "theta": theta, **m.to_dict()}
    else:
        train, test = detector.split_scene(frames, float(det["train_fraction"]))
        tgt = next(f for f in train if f.label == detector.TARGET)
        clu = next(f for f in train if f.label == detector.CLUTTER)
        hits = retrieve(FEWSHOT_QUERY, knowledge_index(cfg), top_k=2)
        ledger["retrieval.fewshot"] += 1
        knowledge = "\n".join(h.doc.text for h in hits)
        provider = CountingProvider(chat_provider(cfg), ledger)
        predicted, unparsed = [], 0
        for prompt in detector.fewshot_prompts(tgt, clu, test, knowledge):
            label = detector.parse_label(provider.chat(prompt.to_request()))
            if label is None:
                unparsed += 1
                label = detector.CLUTTER
            predicted.append(label)
        m = detector.confusion([f.label for f in test], predicted)
        metrics = {"mode": "fewshot", "questions": len(test), "unparsed_replies": unparsed, **m.to_dict()}
    out = Path(args.out) if args.out else output_dir(cfg) / f"detect_{args.mode}.json"
    write_report(out, experiment_report("detect", cfg, metrics, ledger=ledger))
    print(f"detect ({args.mode}): ACC={metrics['acc']:.4f} F1={metrics['f1']:.4f} Pd={metrics['pd']:.4f} "
          f"Pfa={metrics['pfa']:.4f} -> {out}")
    return EXIT_OK


def cmd_gen_data(cfg: RunConfig, args) -> int:
    from .dsp import write_signal
    models = cfg.path("paths", "models")
    datasets = cfg.path("paths", "datasets")
    models.mkdir(parents=True, exist_ok=True)
    datasets.mkdir(parents=True, exist_ok=True)
    artifacts = {}

    corpus_path = cfg.path("paths", "corpus")
    sentences = ([s for s in corpus_path.read_text(encoding="utf-8").splitlines() if s.strip()]
                 if corpus_path else corpus.bundled_sentences())
    train_blocks, test_blocks = corpus.split_corpus(sentences)
    cdir = datasets / "corpus"
    cdir.mkdir(exist_ok=True)
    (cdir / "train.txt").write_bytes(b"\n".join(train_blocks) + b"\n")
    (cdir / "test.txt").write_bytes(b"\n".join(test_blocks) + b"\n")
    c = cfg["codec"]
    predictor = train_from_texts(train_blocks, int(c["order"]), float(c["smoothing"]))
    mpath = model_path(cfg)
    predictor.save(mpath)
    artifacts.update(corpus_train=cdir / "train.txt", corpus_test=cdir / "test.txt", model=mpath)

    det = cfg["detector"]
    frames = detector.synth_scene(cfg.seed, int(det["n_frames"]), int(det["frame_length"]),
                                  float(det["scr_db"]), float(det["shape"]))
    sdir = datasets / "scene"
    if sdir.exists():
        shutil.rmtree(sdir)
    sdir.mkdir()
    entries = []
    for i, f in enumerate(frames):
        meta, _ = write_signal(sdir / f"frame_{i:04d}", f.frame, f.label)
        entries.append({"signal": meta.name, "label": f.label})
    stored = load_scene_entries(sdir, entries)
    sanity = detector.supervised_run(stored, [float(v) for v in det["theta"]], float(det["train_fraction"]))
    manifest = {"seed": cfg.seed, "scr_db": float(det["scr_db"]), "shape": float(det["shape"]),
                "sample_rate": frames[0].frame.sample_rate, "frames": entries,
                "sanity": {"theta": det["theta"], **sanity.to_dict()}}
    (sdir / "manifest.json").write_text(dump_json(manifest))
    artifacts["scene"] = sdir / "manifest.json"

    kb = datasets / "knowledge.jsonl"
    src = cfg.path("paths", "knowledge") or resources.files("sigagent.data").joinpath("knowledge.jsonl")
    kb.write_bytes(Path(str(src)).read_bytes())
    artifacts["knowledge"] = kb

    metrics = {"model_id": predictor.model_id, "vocabulary": len(predictor.vocabulary),
               "train_blocks": len(train_blocks), "test_blocks": len(test_blocks), "scene_frames": len(frames),
               "scene_sanity_f1": sanity.f1}
    out = write_report(output_dir(cfg) / "gen_data_report.json",
                       experiment_report("gen-data", cfg, metrics, artifacts=artifacts))
    print(f"model {predictor.model_id[:16]}... -> {mpath}; scene F1 sanity {sanity.f1:.3f}; report {out}")
    return EXIT_OK


def load_scene_entries(directory: Path, entries) -> list[detector.LabeledFrame]:
    from .dsp import read_signal
    return [detector.LabeledFrame(read_signal(directory / e["signal"])[0], e["label"]) for e in entries]


def render_report(report: dict) -> str:
    kind = report.get("kind", "?")
    m = report.get("metrics", {})
    lines = [f"# {kind} report (sigagent {report.get('version', '?')})"]
    if kind == "compress":
        lines.append(format_compress_table(m["table"]))
    elif kind == "optimize" and "table" in m:
        lines.append(format_optimize_table(m))
        b = m["best"]
        lines.append("best: " + ", ".join(f"{n}={v:.6g}" for n, v in zip(b["names"], b["theta"]))
                     + f" score={b['score']:.6g} ({b['method']})")
    elif kind == "plan":
        for s in report["plan"].get("chain", []):
            sol = s.get("solution") or {}
            lines.append(f"[{s['id']}] {s.get('complexity')}: {s['description']}")
            if sol:
                lines.append(f"    paradigm={sol['paradigm']} retrievals={sol['retrieval_calls']} "
                             f"stop={sol['stop_reason'] or '-'}")
    else:
        for k, v in m.items():
            lines.append(f"{k}: {v:.6g}" if isinstance(v, float) else f"{k}: {v}")
    if report.get("ledger"):
        lines.append("ledger: " + ", ".join(f"{k}={v}" for k, v in report["ledger"].items()))
    return "\n".join(lines) + "\n"


def cmd_report(cfg: RunConfig, args) -> int:
    try:
        report = json.loads(Path(args.input).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read report {args.input}: {exc}") from exc
    text = render_report(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---- argument parsing ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="YAML run configuration")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a configuration value, e.g. optimizer.budget=50")
    common.add_argument("--seed", type=int, help="override the run seed")
    common.add_argument("--output-dir", help="override paths.output")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="sigagent", description="Signal-processing agent toolkit.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("plan", parents=[common], help="decompose and plan a request")
    p.add_argument("request", help="JSON request file with goal, constraints, artifacts")
    p.add_argument("--out")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("compress", parents=[common], help="compress a text file block by block")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("-K", type=int, help="context length (default: sweep codec.context_lengths)")
    p.add_argument("--report")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", parents=[common], help="restore a compressed file")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("optimize", parents=[common], help="compare hybrid, DE and SA on an objective")
    p.add_argument("--objective", help="sphere, rastrigin or detection")
    p.add_argument("--runs", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("detect", parents=[common], help="target-vs-clutter detection on a scene")
    p.add_argument("--mode", choices=("supervised", "fewshot"), default="supervised")
    p.add_argument("--out")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("gen-data", parents=[common], help="write corpus, predictor, scene and knowledge base")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("report", parents=[common], help="render a JSON report as text")
    p.add_argument("input")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        overrides = parse_assignments(args.set)
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.output_dir:
            overrides["paths.output"] = args.output_dir
        cfg = load_config(args.config, overrides)
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CorruptPayload as exc:
        print(f"data integrity error: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except (SigAgentError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
