import json

import pytest

from ztwemo.config import ENV_VAR, PipelineConfig, load_config
from ztwemo.errors import ConfigError


def test_round_trip(tmp_path):
    cfg = PipelineConfig(lda_dim=40, mlp_hidden=[32, 16], cmvn_scope="speaker")
    p = tmp_path / "c.json"
    p.write_text(cfg.dumps())
    assert load_config(p) == cfg


def test_unknown_key(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"lda_dimm": 3}))
    with pytest.raises(ConfigError, match="lda_dimm"):
        load_config(p)


def test_env_override(tmp_path, monkeypatch):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"seed": 17}))
    monkeypatch.setenv(ENV_VAR, str(p))
    assert load_config().seed == 17
    monkeypatch.delenv(ENV_VAR)
    assert load_config() == PipelineConfig()


@pytest.mark.parametrize("bad", [dict(sample_rate=8000), dict(feature_set="MFCC13"), dict(cmvn_scope="corpus"),
                                 dict(lda_dim=0), dict(seed="x"), dict(ztw_segment_ms=-1.0)])
def test_validation(bad):
    with pytest.raises(ConfigError):
        PipelineConfig(**bad)


def test_missing_and_invalid_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.json")
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "bad.json")


def test_dumps_is_sorted():
    keys = list(json.loads(PipelineConfig().dumps()))
    assert keys == sorted(keys)
