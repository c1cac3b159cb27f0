import json

import pytest

from sabia.config import ConfigError, load_config


def write_config(tmp_path, payload):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def test_defaults_without_file():
    cfg = load_config(None)
    assert cfg.k == 4
    assert cfg.temperature == 0.7
    assert cfg.api_key_env == "SABIA_API_KEY"
    assert cfg.embedder.kind == "local_hash"
    assert cfg.embedder.dim == 768
    assert cfg.models == []


def test_file_values(tmp_path):
    path = write_config(
        tmp_path,
        {
            "gateway_url": "http://gw.local/v1",
            "store_path": "store.jsonl",
            "template_path": "template.txt",
            "k": 6,
            "temperature": 0.2,
            "embedder": {"kind": "local_hash", "dim": 128},
            "models": [{"model_id": "x/extra"}],
        },
    )
    cfg = load_config(path)
    assert cfg.gateway_url == "http://gw.local/v1"
    assert cfg.k == 6
    assert cfg.temperature == 0.2
    assert cfg.embedder.dim == 128
    assert cfg.models == [{"model_id": "x/extra"}]


def test_env_overrides_file(tmp_path, monkeypatch):
    path = write_config(tmp_path, {"gateway_url": "http://file.local", "k": 3})
    monkeypatch.setenv("SABIA_GATEWAY_URL", "http://env.local")
    monkeypatch.setenv("SABIA_K", "9")
    cfg = load_config(path)
    assert cfg.gateway_url == "http://env.local"
    assert cfg.k == 9


def test_bad_json(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{nope", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path)


def test_bad_embedder(tmp_path):
    path = write_config(tmp_path, {"embedder": {"kind": "remote", "dim": 8}})
    with pytest.raises(ConfigError):
        load_config(path)


def test_k_validated(tmp_path):
    path = write_config(tmp_path, {"k": 0})
    with pytest.raises(ConfigError):
        load_config(path)
