"""
File formats: 16-bit PCM WAV, the EPFM feature container, the EMHM model
container, manifests and CSV exports.

Both binary containers are little-endian. EPFM is a fixed header followed
by row-major float64 values::

    b"EPFM" | u32 version | u32 layout code | u32 frames | u32 dims | f64[frames * dims]

EMHM is a header followed by named records::

    b"EMHM" | u32 version | u32 record count |
    { u32 name length | name (UTF-8) | u8 kind | u32 ndim | u32[ndim] shape | payload }*

``kind`` 0 is a float64 array, 1 a UTF-8 JSON document (shape = [bytes]).
"""

from __future__ import annotations

import csv
import json
import struct
import wave
from pathlib import Path

import numpy as np

from .classifier import EmotionHmm, GmmHmmSet, GmmState, HmmTopology, MlpModel, StatePriors
from .errors import FormatError
from .features import CmvnStats, FeatureMatrix, LdaTransform
from .pipeline import HybridModel
from .signal_core import Waveform

EPFM_MAGIC = b"EPFM"
EPFM_VERSION = 1
LAYOUT_CODES = {"MFCC13": 1, "MFCC39": 2, "EPOCH30": 3, "COMBINED69": 4, "SPLICED": 5, "LDA": 6}
_CODE_LAYOUTS = {v: k for k, v in LAYOUT_CODES.items()}

EMHM_MAGIC = b"EMHM"
EMHM_VERSION = 1


# WAV -----------------------------------------------------------------------

def read_wav(path) -> Waveform:
    """Read a 16-bit PCM mono 16 kHz WAV file; anything else raises FormatError."""
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as f:
            channels, width, rate, n = f.getnchannels(), f.getsampwidth(), f.getframerate(), f.getnframes()
            if channels != 1:
                raise FormatError(f"{path}: {channels} channels; only mono input is supported")
            if width != 2:
                raise FormatError(f"{path}: {8 * width}-bit samples; only 16-bit PCM is supported")
            if rate != 16000:
                raise FormatError(f"{path}: sample rate {rate} Hz; only 16000 Hz is supported (no resampling)")
            raw = f.readframes(n)
    except (wave.Error, EOFError) as exc:
        raise FormatError(f"{path}: not a readable PCM WAV file ({exc})") from exc
    data = np.frombuffer(raw, dtype="<i2").astype(float) / 32768.0
    return Waveform(data, rate)


def write_wav(path, w: Waveform) -> None:
    pcm = np.clip(np.round(w.samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as f:
        f.setnchannels(1)
        f.setsampwidth(2)
        f.setframerate(w.sample_rate)
        f.writeframes(pcm.tobytes())


# EPFM ----------------------------------------------------------------------

def feature_bytes(m: FeatureMatrix) -> bytes:
    head = EPFM_MAGIC + struct.pack("<IIII", EPFM_VERSION, LAYOUT_CODES[m.layout], m.frames, m.dims)
    return head + np.ascontiguousarray(m.values, dtype="<f8").tobytes()


def write_features(path, m: FeatureMatrix) -> None:
    Path(path).write_bytes(feature_bytes(m))


def read_features(path) -> FeatureMatrix:
    path = Path(path)
    try:
        data = path.read_bytes()
    except FileNotFoundError as exc:
        raise FormatError(f"feature file not found: {path}") from exc
    if len(data) < 20 or data[:4] != EPFM_MAGIC:
        raise FormatError(f"{path}: not an EPFM feature file")
    version, code, frames, dims = struct.unpack("<IIII", data[4:20])
    if version != EPFM_VERSION:
        raise FormatError(f"{path}: unsupported EPFM version {version}")
    if code not in _CODE_LAYOUTS:
        raise FormatError(f"{path}: unknown layout code {code}")
    if len(data) != 20 + 8 * frames * dims:
        raise FormatError(f"{path}: payload size does not match {frames}x{dims}")
    values = np.frombuffer(data, dtype="<f8", offset=20).reshape(frames, dims).astype(float)
    return FeatureMatrix(values, _CODE_LAYOUTS[code])


def write_features_csv(path, m: FeatureMatrix) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        wr = csv.writer(f)
        wr.writerow([f"d{i}" for i in range(m.dims)])
        wr.writerows([repr(float(v)) for v in row] for row in m.values)


# EMHM ----------------------------------------------------------------------

def _record(name: str, value) -> bytes:
    nb = name.encode("utf-8")
    if isinstance(value, np.ndarray):
        arr = np.ascontiguousarray(value, dtype="<f8")
        head = struct.pack("<I", len(nb)) + nb + struct.pack("<BI", 0, arr.ndim)
        return head + struct.pack(f"<{arr.ndim}I", *arr.shape) + arr.tobytes()
    payload = json.dumps(value, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return struct.pack("<I", len(nb)) + nb + struct.pack("<BII", 1, 1, len(payload)) + payload


def model_records(model: HybridModel) -> dict:
    topo = model.topology
    meta = {
        "feature_set": model.feature_set,
        "cmvn_scope": model.cmvn_scope,
        "splice_context": model.splice_context,
        "scorer": model.scorer,
        "emotions": list(topo.emotions),
        "states_per_emotion": topo.states_per_emotion,
        "has_gmm": model.gmm is not None,
        "has_lda": model.lda is not None,
        "has_mlp": model.mlp is not None,
        "has_epoch_stats": model.epoch_stats is not None,
        "mlp_layers": len(model.mlp.weights) if model.mlp is not None else 0,
        "lda_class_count": model.lda.class_count if model.lda is not None else 0,
    }
    rec = {"meta": meta, "transitions": topo.transitions}
    if model.gmm is not None:
        for e in topo.emotions:
            g = model.gmm[e].gmm
            rec[f"gmm/{e}/weights"] = g.weights
            rec[f"gmm/{e}/means"] = g.means
            rec[f"gmm/{e}/variances"] = g.variances
            rec[f"gmm/{e}/transitions"] = model.gmm[e].transitions
    if model.epoch_stats is not None:
        rec["cmvn/epoch/mean"] = model.epoch_stats.mean
        rec["cmvn/epoch/std"] = model.epoch_stats.std
    if model.lda is not None:
        rec["lda/matrix"] = model.lda.matrix
        rec["lda/mean"] = model.lda.mean
        rec["lda/eigenvalues"] = model.lda.eigenvalues
    if model.mlp is not None:
        for i, (w, b) in enumerate(zip(model.mlp.weights, model.mlp.biases)):
            rec[f"mlp/w{i}"] = w
            rec[f"mlp/b{i}"] = b
    if model.priors is not None:
        rec["priors"] = model.priors.p
    return rec


def model_bytes(model: HybridModel) -> bytes:
    rec = model_records(model)
    out = [EMHM_MAGIC, struct.pack("<II", EMHM_VERSION, len(rec))]
    out.extend(_record(k, v) for k, v in rec.items())
    return b"".join(out)


def write_model(path, model: HybridModel) -> None:
    Path(path).write_bytes(model_bytes(model))


def _parse_records(data: bytes, path) -> dict:
    if len(data) < 12 or data[:4] != EMHM_MAGIC:
        raise FormatError(f"{path}: not an EMHM model file")
    version, count = struct.unpack_from("<II", data, 4)
    if version != EMHM_VERSION:
        raise FormatError(f"{path}: unsupported EMHM version {version}")
    pos = 12
    rec = {}
    try:
        for _ in range(count):
            (nlen,) = struct.unpack_from("<I", data, pos)
            pos += 4
            name = data[pos:pos + nlen].decode("utf-8")
            pos += nlen
            kind, ndim = struct.unpack_from("<BI", data, pos)
            pos += 5
            shape = struct.unpack_from(f"<{ndim}I", data, pos)
            pos += 4 * ndim
            size = int(np.prod(shape)) if ndim else 1
            if kind == 0:
                rec[name] = np.frombuffer(data, dtype="<f8", count=size, offset=pos).reshape(shape).astype(float)
                pos += 8 * size
            elif kind == 1:
                rec[name] = json.loads(data[pos:pos + size].decode("utf-8"))
                pos += size
            else:
                raise FormatError(f"{path}: unknown record kind {kind}")
    except (struct.error, ValueError, UnicodeDecodeError) as exc:
        raise FormatError(f"{path}: truncated or corrupt model file ({exc})") from exc
    if pos != len(data):
        raise FormatError(f"{path}: trailing bytes after the last record")
    return rec


def read_model(path) -> HybridModel:
    path = Path(path)
    try:
        data = path.read_bytes()
    except FileNotFoundError as exc:
        raise FormatError(f"model file not found: {path}") from exc
    rec = _parse_records(data, path)
    meta = rec["meta"]
    topo = HmmTopology(tuple(meta["emotions"]), meta["states_per_emotion"], rec["transitions"])
    gmm = None
    if meta["has_gmm"]:
        models = {e: EmotionHmm(GmmState(rec[f"gmm/{e}/weights"], rec[f"gmm/{e}/means"],
                                         rec[f"gmm/{e}/variances"]), rec[f"gmm/{e}/transitions"])
                  for e in topo.emotions}
        gmm = GmmHmmSet(topo, models, [])
    stats = CmvnStats(rec["cmvn/epoch/mean"], rec["cmvn/epoch/std"]) if meta["has_epoch_stats"] else None
    lda = None
    if meta["has_lda"]:
        lda = LdaTransform(rec["lda/matrix"], rec["lda/mean"], meta["lda_class_count"], rec["lda/eigenvalues"])
    mlp = None
    if meta["has_mlp"]:
        n = meta["mlp_layers"]
        mlp = MlpModel([rec[f"mlp/w{i}"] for i in range(n)], [rec[f"mlp/b{i}"] for i in range(n)])
    priors = StatePriors(rec["priors"]) if "priors" in rec else None
    return HybridModel(meta["feature_set"], meta["cmvn_scope"], meta["splice_context"], meta["scorer"],
                       topo, gmm, stats, lda, mlp, priors)


# manifests and CSV ---------------------------------------------------------

def read_manifest(path) -> list[dict]:
    """``path,emotion,speaker`` rows; relative paths resolve against the manifest's folder."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise FormatError(f"manifest not found: {path}") from exc
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines or [c.strip() for c in lines[0].split(",")] != ["path", "emotion", "speaker"]:
        raise FormatError(f"{path}: manifest header must be 'path,emotion,speaker'")
    rows = []
    for n, line in enumerate(lines[1:], start=2):
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != 3:
            raise FormatError(f"{path}:{n}: expected 3 fields, got {len(cells)} (commas in paths are not allowed)")
        p = Path(cells[0])
        if not p.is_absolute():
            p = path.parent / p
        rows.append({"path": p, "emotion": cells[1], "speaker": cells[2]})
    return rows


def write_manifest(path, rows) -> None:
    lines = ["path,emotion,speaker"]
    for r in rows:
        p = str(r["path"])
        if "," in p:
            raise FormatError(f"manifest paths may not contain commas: {p}")
        lines.append(f"{p},{r['emotion']},{r['speaker']}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        wr = csv.writer(f, lineterminator="\n")
        wr.writerow(header)
        wr.writerows(rows)


def read_int_column(path, column: int = 0) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    return np.array([int(r[column]) for r in rows[1:]], dtype=np.int64)
