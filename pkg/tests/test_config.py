"""Tests for configuration loading."""
import json
from pathlib import Path

import pytest

from ragforge.chunking import ChunkingStrategy
from ragforge.config import PipelineConfig, ProviderKind, interpolate_env
from ragforge.errors import ConfigError
from ragforge.fixtures import fixture_config


@pytest.fixture(autouse=True)
def no_api_keys(monkeypatch):
    for name in ("RAGFORGE_API_KEY", "RAGFORGE_CHAT_API_KEY", "RAGFORGE_EMBED_API_KEY", "RAGFORGE_RERANK_API_KEY"):
        monkeypatch.delenv(name, raising=False)


def write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_defaults():
    config = PipelineConfig.load()
    assert config.general.parallelism == 4
    assert config.embedding.dimension == 1536
    assert config.evaluation.tau == 0.8
    assert config.evaluation.pool_size == 50
    assert config.retrieval.k_values == [1, 5, 10]
    assert config.metadata.provider == ProviderKind.MOCK
    assert config.evaluation.judged_view == "content"


def test_json_config_resolves_paths_against_its_directory(tmp_path):
    path = write_config(tmp_path, fixture_config())
    config = PipelineConfig.load(path)
    assert config.get_workspace_dir() == tmp_path.resolve() / "workspace"
    assert config.resolve_path(config.corpus.sources[0].path) == tmp_path.resolve() / "corpus" / "user-guide"


def test_toml_config(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text(
        '[general]\nworkspace_dir = "ws"\n\n'
        "[embedding]\ndimension = 64\n\n"
        '[[corpus.sources]]\npath = "docs"\nsource_tag = "guide"\n',
        encoding="utf-8",
    )
    config = PipelineConfig.load(path)
    assert config.embedding.dimension == 64
    assert config.corpus.sources[0].source_tag == "guide"
    assert config.get_workspace_dir().name == "ws"


def test_strategy_sections_become_chunking_configs(tmp_path):
    config = PipelineConfig.load(write_config(tmp_path, fixture_config()))
    recursive = config.chunking_config(ChunkingStrategy.RECURSIVE)
    assert (recursive.max_tokens, recursive.overlap_tokens) == (64, 16)
    assert config.chunking_config(ChunkingStrategy.SEMANTIC).min_tokens == 16


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        PipelineConfig.load(tmp_path / "absent.json")


def test_unparseable_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="Cannot parse"):
        PipelineConfig.load(path)


@pytest.mark.parametrize(
    "section",
    [
        {"embedding": {"content_weight": 0.6, "metadata_weight": 0.3}},
        {"retrieval": {"k_values": [0, 5]}},
        {"evaluation": {"tau": 1.5}},
        {"general": {"parallelism": 0}},
    ],
)
def test_invalid_values(tmp_path, section):
    with pytest.raises(ConfigError, match="Invalid config"):
        PipelineConfig.load(write_config(tmp_path, section))


def test_k_values_are_sorted_and_unique(tmp_path):
    config = PipelineConfig.load(write_config(tmp_path, {"retrieval": {"k_values": [10, 1, 5, 10]}}))
    assert config.retrieval.k_values == [1, 5, 10]


def test_environment_references_are_interpolated(tmp_path, monkeypatch):
    monkeypatch.setenv("RAGFORGE_TEST_MODEL", "small-embedder")
    config = PipelineConfig.load(write_config(tmp_path, {"embedding": {"model": "${RAGFORGE_TEST_MODEL}"}}))
    assert config.embedding.model == "small-embedder"
    assert interpolate_env({"a": ["${RAGFORGE_UNSET_VARIABLE}x"]}) == {"a": ["x"]}


def test_remote_provider_needs_a_key(tmp_path, monkeypatch):
    config = PipelineConfig.load(write_config(tmp_path, {"metadata": {"provider": "http"}}))
    with pytest.raises(ConfigError, match="Missing API key for metadata"):
        config.check_credentials()

    monkeypatch.setenv("RAGFORGE_CHAT_API_KEY", "sk-chat")
    config.check_credentials()
    assert config.api_key_for("metadata") == "sk-chat"


def test_mock_providers_need_no_key():
    PipelineConfig.load().check_credentials()


def test_secrets_are_masked(tmp_path):
    config = PipelineConfig.load(write_config(tmp_path, {"evaluation": {"provider": "http", "api_key": "secret"}}))
    config.check_credentials()
    assert config.masked_dump()["evaluation"]["api_key"] == "***"
    assert "secret" not in json.dumps(config.masked_dump())


def test_example_config_is_valid():
    config = PipelineConfig.load(Path(__file__).parent.parent / "config.example.toml")
    assert [s.source_tag for s in config.corpus.sources] == ["user-guide", "api-reference"]
    assert config.evaluation.judged_view == "content"
    config.check_credentials()
