"""
Command-line front end.

Subcommands: ``synth``, ``extract``, ``train``, ``eval``, ``xval`` and
``dump-config``. Every PipelineConfig key is also a kebab-case flag
(``--vad-threshold 0.1``); flags override the config file, which defaults
to ``$ZTWEMO_CONFIG``. Per-item failures are reported on stderr as JSON
lines and make the command exit with status 1 after the batch finishes.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from .classifier import cross_validate, evaluate
from .config import ENV_VAR, PipelineConfig, load_config
from .errors import ConfigError, FormatError, InsufficientSpeakers, ZtwError
from .features import add_deltas, cmvn, combine
from .io import (
    read_features,
    read_manifest,
    read_model,
    read_wav,
    write_csv,
    write_features,
    write_features_csv,
    write_manifest,
    write_model,
    write_wav,
)
from .pipeline import RawFeatures, analyze, train_model
from .synth import CONTOURS, PRESETS, SyntheticSpec, corpus_specs, preset_spec, synthesize

log = logging.getLogger("ztwemo")

FEATURE_SUFFIXES = ("mfcc13", "mfcc39", "epoch30", "combined69")


class Reporter:
    """Collects per-item failures and prints them as JSON lines on stderr."""

    def __init__(self):
        self.errors = 0

    def error(self, item, exc: BaseException | str):
        self.errors += 1
        kind = type(exc).__name__ if isinstance(exc, BaseException) else "Error"
        rec = {"level": "error", "item": str(item), "type": kind, "message": str(exc)}
        print(json.dumps(rec, sort_keys=True), file=sys.stderr, flush=True)

    def warning(self, item, message: str):
        rec = {"level": "warning", "item": str(item), "message": message}
        print(json.dumps(rec, sort_keys=True), file=sys.stderr, flush=True)


# config plumbing -------------------------------------------------------------

def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def add_config_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("pipeline configuration")
    g.add_argument("--config", default=None, help=f"JSON config file (default: ${ENV_VAR})")
    for f in fields(PipelineConfig):
        if f.name == "jobs":
            continue
        kw = dict(dest=f"cfg_{f.name}", default=argparse.SUPPRESS)
        if f.type == "bool":
            g.add_argument(_flag(f.name), action=argparse.BooleanOptionalAction, **kw)
        elif f.type == "int":
            g.add_argument(_flag(f.name), type=int, **kw)
        elif f.type == "float":
            g.add_argument(_flag(f.name), type=float, **kw)
        elif f.type == "str":
            g.add_argument(_flag(f.name), **kw)
        else:
            item = int if f.name == "mlp_hidden" else str
            g.add_argument(_flag(f.name), nargs="+", type=item, **kw)
    g.add_argument("--jobs", dest="cfg_jobs", type=int, default=argparse.SUPPRESS,
                   help="worker processes for per-file work (default 1, deterministic)")


def effective_config(args) -> PipelineConfig:
    cfg = load_config(args.config)
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("cfg_")}
    return cfg.updated(**overrides) if overrides else cfg


def _pool_map(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


# synth -----------------------------------------------------------------------

def _write_synth(path: Path, spec: SyntheticSpec):
    w, gcis = synthesize(spec)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_wav(path, w)
    gci_path = path.with_suffix(".gci.csv")
    write_csv(gci_path, ["sample_index", "time_sec"], [(int(g), f"{g / w.sample_rate:.6f}") for g in gcis])
    return gci_path


def cmd_synth(args, rep: Reporter) -> int:
    out = Path(args.out)
    if args.corpus:
        items = corpus_specs(args.speakers, args.per_emotion, duration=args.duration, seed=args.seed)
        rows = []
        for it in items:
            wav = out / it.speaker / f"{it.speaker}_{it.emotion}_{it.index:03d}.wav"
            try:
                _write_synth(wav, it.spec)
                rows.append({"path": wav.relative_to(out), "emotion": it.emotion, "speaker": it.speaker})
            except (OSError, ZtwError) as exc:
                rep.error(wav, exc)
        write_manifest(out / "manifest.csv", rows)
        print(f"wrote {len(rows)} utterances and {out / 'manifest.csv'}")
        return 0
    overrides = {}
    for name in ("f0_start", "f0_end", "contour", "jitter", "shimmer", "tilt", "level",
                 "lead_silence", "trail_silence", "noise_db"):
        v = getattr(args, name)
        if v is not None:
            overrides[name] = v
    if args.formants:
        overrides["formants"] = tuple(args.formants)
    if args.bandwidths:
        overrides["bandwidths"] = tuple(args.bandwidths)
    overrides["duration"] = args.duration
    if args.preset:
        spec = preset_spec(args.preset, seed=args.seed, **overrides)
    else:
        overrides.setdefault("f0_end", overrides.get("f0_start", 120.0))
        spec = SyntheticSpec(seed=args.seed, **overrides)
    gci = _write_synth(out, spec)
    print(f"wrote {out} and {gci}")
    return 0


# extract ---------------------------------------------------------------------

def _collect_wavs(inputs) -> list[Path]:
    out = []
    for s in inputs:
        p = Path(s)
        if p.is_dir():
            out.extend(sorted(q for q in p.rglob("*") if q.suffix.lower() == ".wav"))
        else:
            out.append(p)
    return out


def _extract_one(job):
    wav, out_dir, cfg, plots = job
    try:
        w = read_wav(wav)
        a = analyze(w, cfg)
        stem = out_dir / wav.stem
        m39 = add_deltas(cmvn(a.mfcc13))
        write_features(f"{stem}.mfcc13.epfm", a.mfcc13)
        write_features(f"{stem}.mfcc39.epfm", m39)
        write_features(f"{stem}.epoch30.epfm", a.epoch30)
        write_features(f"{stem}.combined69.epfm", combine(m39, a.epoch30))
        fs = w.sample_rate
        rows = []
        for t in a.trains:
            rows.extend((int(l), f"{l / fs:.6f}", repr(float(s))) for l, s in zip(t.locations, t.strengths))
        write_csv(f"{stem}.epochs.csv", ["sample_index", "time_sec", "strength"], rows)
        write_csv(f"{stem}.vad.csv", ["start_sample", "end_sample", "start_sec", "end_sec"],
                  [(r.start, r.end, f"{r.start / fs:.6f}", f"{r.end / fs:.6f}") for r in a.regions])
        if plots:
            _write_plots(stem, a, fs)
            write_features_csv(f"{stem}.combined69.csv", combine(m39, a.epoch30))
        return str(wav), None, a.mfcc13.frames
    except (OSError, ZtwError) as exc:
        return str(wav), (type(exc).__name__, str(exc)), 0


def _write_plots(stem, a, fs):
    ev_rows = []
    for t in a.trains:
        x = (np.arange(t.evidence.size) + t.region.start) / fs
        ev_rows.extend((f"{xi:.6f}", repr(float(yi))) for xi, yi in zip(x, t.evidence))
    write_csv(f"{stem}.evidence.csv", ["x", "y"], ev_rows)
    c = a.contour
    write_csv(f"{stem}.sph.csv", ["x", "y"],
              [(f"{x / fs:.6f}", repr(float(y))) for x, y in zip(c.frame_centers(), c.values)])
    e = a.epochs
    write_csv(f"{stem}.pitch.csv", ["x", "y"],
              [(f"{l / fs:.6f}", repr(float(p))) for l, p, ok in zip(e.locations, e.pitch_hz, e.pair_mask) if ok])


def cmd_extract(args, rep: Reporter) -> int:
    cfg = effective_config(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    labels = {}
    wavs = []
    if args.manifest:
        for r in read_manifest(args.manifest):
            wavs.append(r["path"])
            labels[str(r["path"])] = r
    wavs.extend(_collect_wavs(args.inputs))
    if not wavs:
        rep.warning(",".join(args.inputs) or "-", "no WAV files found")
        return 0
    stems = [w.stem for w in wavs]
    if len(set(stems)) != len(stems):
        raise ConfigError("input WAV files must have distinct names (outputs are keyed by file stem)")
    results = _pool_map(_extract_one, [(w, out_dir, cfg, args.plots) for w in wavs], cfg.jobs)
    rows = []
    for path, err, frames in results:
        if err:
            rep.error(path, f"{err[0]}: {err[1]}")
            continue
        if path in labels:
            r = labels[path]
            rows.append({"path": f"{Path(path).stem}.combined69.epfm", "emotion": r["emotion"],
                         "speaker": r["speaker"]})
    if args.manifest:
        write_manifest(out_dir / "features.csv", rows)
    print(f"extracted {len(results) - rep.errors} of {len(results)} files into {out_dir}")
    return 0


# train / eval / xval -----------------------------------------------------------

def feature_stem(path: Path) -> Path:
    """Strip ``.epfm`` and a known layout suffix: ``a/b.mfcc39.epfm`` -> ``a/b``."""
    p = Path(path)
    name = p.name
    if name.endswith(".epfm"):
        name = name[:-5]
        for suf in FEATURE_SUFFIXES:
            if name.endswith("." + suf):
                name = name[:-len(suf) - 1]
                break
    return p.with_name(name)


def load_raw(path) -> RawFeatures:
    stem = feature_stem(path)
    m13 = read_features(f"{stem}.mfcc13.epfm")
    e30 = read_features(f"{stem}.epoch30.epfm")
    if m13.layout != "MFCC13" or e30.layout != "EPOCH30":
        raise FormatError(f"{stem}: unexpected layouts {m13.layout}/{e30.layout}")
    return RawFeatures(m13, e30)


def load_manifest_features(path, rep: Reporter):
    rows = read_manifest(path)
    raws, emos, spks, names = [], [], [], []
    for r in rows:
        try:
            raws.append(load_raw(r["path"]))
        except ZtwError as exc:
            rep.error(r["path"], exc)
            continue
        emos.append(r["emotion"])
        spks.append(r["speaker"])
        names.append(str(r["path"]))
    return raws, emos, spks, names


def cmd_train(args, rep: Reporter) -> int:
    cfg = effective_config(args)
    raws, emos, spks, _ = load_manifest_features(args.manifest, rep)
    if rep.errors:
        return 1
    model = train_model(raws, emos, spks, cfg)
    write_model(args.model, model)
    log_path = Path(str(args.model) + ".log.csv")
    write_csv(log_path, ["stage", "emotion", "mixtures", "iteration", "value"],
              [(s, e, k, it, repr(float(v))) for s, e, k, it, v in model.log])
    print(f"wrote {args.model} and {log_path}")
    return 0


def _metrics_lines(names, truths, preds, scores, metrics) -> list[str]:
    lines = []
    for n, t, p, s in zip(names, truths, preds, scores):
        lines.append(json.dumps({"item": n, "truth": t, "predicted": p,
                                 "logliks": {k: float(v) for k, v in s.items()}}, sort_keys=True))
    lines.append(json.dumps({"aggregate": metrics.as_dict()}, sort_keys=True))
    return lines


def cmd_eval(args, rep: Reporter) -> int:
    model = read_model(args.model)
    raws, emos, spks, names = load_manifest_features(args.manifest, rep)
    if not raws:
        rep.error(args.manifest, FormatError("manifest lists no usable utterances"))
        return 1
    preds, scores, truths, kept = [], [], [], []
    for n, m, e in zip(names, model.features(raws, spks), emos):
        try:
            p, s = model.decode(m)
        except ZtwError as exc:
            rep.error(n, exc)
            continue
        preds.append(p)
        scores.append(s)
        truths.append(e)
        kept.append(n)
    metrics = evaluate(preds, truths, model.topology.emotions)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{out}.jsonl").write_text("\n".join(_metrics_lines(kept, truths, preds, scores, metrics)) + "\n",
                                    encoding="utf-8")
    labels = list(metrics.labels)
    write_csv(f"{out}.confusion.csv", ["truth", *labels],
              [(l, *[f"{v:.4f}" for v in row]) for l, row in zip(labels, metrics.confusion)])
    print(f"WA {metrics.wa:.2f}  UWA {metrics.uwa:.2f}  ({len(preds)} utterances)")
    return 0


def _xval_fold(job):
    raws, emos, spks, cfg, test_spk = job
    tr = [i for i, s in enumerate(spks) if s != test_spk]
    te = [i for i, s in enumerate(spks) if s == test_spk]
    model = train_model([raws[i] for i in tr], [emos[i] for i in tr], [spks[i] for i in tr], cfg)
    return [p for p, _ in model.predict([raws[i] for i in te], [spks[i] for i in te])]


def run_xval(raws, emos, spks, cfg: PipelineConfig):
    """Leave-one-speaker-out evaluation; folds run in ``cfg.jobs`` processes."""
    speakers = sorted(set(spks))
    if len(speakers) < 2:
        raise InsufficientSpeakers(f"cross-validation needs at least 2 speakers, got {len(speakers)}")
    if cfg.jobs > 1:
        done = dict(zip(speakers, _pool_map(_xval_fold, [(raws, emos, spks, cfg, s) for s in speakers],
                                            cfg.jobs)))
        predict = lambda model, items, s: done[s[0]]  # noqa: E731
        train = lambda items, e, s: None  # noqa: E731
    else:
        train = lambda items, e, s: train_model(items, e, s, cfg)  # noqa: E731
        predict = lambda model, items, s: [p for p, _ in model.predict(items, s)]  # noqa: E731
    return cross_validate(raws, spks, emos, train, predict, labels=tuple(cfg.emotions))


def cmd_xval(args, rep: Reporter) -> int:
    cfg = effective_config(args)
    raws, emos, spks, _ = load_manifest_features(args.manifest, rep)
    if rep.errors:
        return 1
    cv = run_xval(raws, emos, spks, cfg)
    rows = [(f.speaker, f.n_train, f.n_test, f"{f.metrics.wa:.4f}", f"{f.metrics.uwa:.4f}") for f in cv.folds]
    rows.append(("mean", "", "", f"{cv.wa_mean:.4f}", f"{cv.uwa_mean:.4f}"))
    rows.append(("std", "", "", f"{cv.wa_std:.4f}", f"{cv.uwa_std:.4f}"))
    write_csv(args.out, ["held_out_speaker", "n_train", "n_test", "WA", "UWA"], rows)
    print(f"{len(cv.folds)} folds: WA {cv.wa_mean:.2f} +- {cv.wa_std:.2f}  UWA {cv.uwa_mean:.2f} +- {cv.uwa_std:.2f}")
    return 0


def cmd_dump_config(args, rep: Reporter) -> int:
    text = effective_config(args).dumps()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


# parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ztwemo", description="Excitation-source features and emotion classification.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="render a synthetic vowel (or a whole corpus) with true GCIs")
    s.add_argument("--out", required=True, help="WAV path, or output folder with --corpus")
    s.add_argument("--preset", choices=sorted(PRESETS))
    s.add_argument("--f0-start", type=float)
    s.add_argument("--f0-end", type=float)
    s.add_argument("--contour", choices=CONTOURS)
    s.add_argument("--formants", type=float, nargs="+")
    s.add_argument("--bandwidths", type=float, nargs="+")
    s.add_argument("--duration", type=float, default=1.0)
    s.add_argument("--jitter", type=float)
    s.add_argument("--shimmer", type=float)
    s.add_argument("--tilt", type=float)
    s.add_argument("--level", type=float)
    s.add_argument("--lead-silence", type=float)
    s.add_argument("--trail-silence", type=float)
    s.add_argument("--noise-db", type=float)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--corpus", action="store_true", help="write a 4-emotion corpus and manifest.csv")
    s.add_argument("--speakers", type=int, default=4)
    s.add_argument("--per-emotion", type=int, default=10)
    s.set_defaults(func=cmd_synth)

    e = sub.add_parser("extract", help="VAD, epochs and feature files for WAV inputs")
    e.add_argument("inputs", nargs="*", help="WAV files or folders")
    e.add_argument("--manifest", help="WAV manifest (path,emotion,speaker); also writes features.csv")
    e.add_argument("--out-dir", required=True)
    e.add_argument("--plots", action="store_true", help="also write evidence/SPH/pitch x,y CSVs")
    add_config_flags(e)
    e.set_defaults(func=cmd_extract)

    t = sub.add_parser("train", help="train a classifier from a feature manifest")
    t.add_argument("--manifest", required=True)
    t.add_argument("--model", required=True)
    add_config_flags(t)
    t.set_defaults(func=cmd_train)

    v = sub.add_parser("eval", help="decode a feature manifest with a trained model")
    v.add_argument("--manifest", required=True)
    v.add_argument("--model", required=True)
    v.add_argument("--out", required=True, help="output prefix for .jsonl metrics and .confusion.csv")
    v.set_defaults(func=cmd_eval)

    x = sub.add_parser("xval", help="leave-one-speaker-out cross-validation")
    x.add_argument("--manifest", required=True)
    x.add_argument("--out", required=True, help="per-fold CSV")
    add_config_flags(x)
    x.set_defaults(func=cmd_xval)

    d = sub.add_parser("dump-config", help="print the effective configuration as JSON")
    d.add_argument("--out")
    add_config_flags(d)
    d.set_defaults(func=cmd_dump_config)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    rep = Reporter()
    try:
        status = args.func(args, rep)
    except ConfigError as exc:
        rep.error(getattr(args, "config", None) or "-", exc)
        return 2
    except (ZtwError, OSError) as exc:
        rep.error(getattr(args, "manifest", None) or "-", exc)
        return 1
    return 1 if rep.errors else status
