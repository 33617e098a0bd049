"""
Bundled synthetic corpus.

Every document covers two topics written in the register of its source
category: user guides are step lists, API references are signature
lines, CLI references are worked examples and troubleshooting pages are
warnings. Each sentence of a section repeats its topic's own terms (topic
name, service, entity), so consecutive sentences only drift apart where
the document switches topic.

Queries name a topic together with the words of its source category,
content type or intent ("user guide", "API reference", "CLI example",
"troubleshooting"), which is the vocabulary the metadata header carries.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from ragforge.jsonl import write_json, write_jsonl


logger = logging.getLogger(__name__)

FIXTURE_SEED = 20240611
SOURCE_TAGS = ("user-guide", "api-reference", "cli-reference", "troubleshooting")

# (topic, service noun, CamelCase entity, api function, cli verb)
TOPICS: tuple[tuple[str, str, str, str, str], ...] = (
    ("backup", "snapshot", "BackupPolicy", "create_backup", "backup"),
    ("authentication", "identity", "TokenIssuer", "issue_token", "login"),
    ("caching", "cache", "CacheRegion", "evict_entries", "cache"),
    ("replication", "mirror", "ReplicaSet", "promote_replica", "replicate"),
    ("logging", "audit", "LogSink", "rotate_logs", "logs"),
    ("scheduling", "scheduler", "CronTrigger", "schedule_job", "schedule"),
    ("networking", "gateway", "RouteTable", "open_port", "route"),
    ("storage", "volume", "BlockVolume", "resize_volume", "volume"),
    ("monitoring", "metrics", "AlertRule", "register_alert", "monitor"),
    ("encryption", "keystore", "KeyRing", "rotate_key", "encrypt"),
    ("deployment", "release", "RolloutPlan", "deploy_release", "deploy"),
    ("billing", "invoice", "UsageMeter", "export_usage", "billing"),
)

# Closing sentence variants per source category, picked by the seeded generator.
_CLOSINGS = {
    "user-guide": (
        "- Verify that {service} reports the {entity} and {name} as healthy.",
        "- Check that {service} lists the {entity} under {name}.",
        "- Ensure that {name} appears in {service} with the {entity}.",
    ),
    "api-reference": (
        "`list_{name}_events(limit)` returns recent {name} events of the {entity} from {service}.",
        "`delete_{name}({name}_id)` removes the {entity} from {service} and stops {name}.",
    ),
    "cli-reference": (
        "The --dry-run flag shows the {name} plan for the {entity} without touching {service}.",
        "The --watch flag follows {name} events for the {entity} in {service}.",
    ),
    "troubleshooting": (
        "Caution: deleting a {entity} while {name} runs in {service} loses pending changes.",
        "Caution: a restart of {service} drops the {entity} queue that {name} holds.",
    ),
}


@dataclass
class FixtureSummary:
    root: Path
    documents: int
    queries: int
    config_path: Path


def _fields(topic: tuple) -> dict[str, str]:
    name, service, entity, function, verb = topic
    return {
        "name": name,
        "service": service,
        "entity": entity,
        "function": function,
        "verb": verb,
        "code": f"{name.upper()}_TIMEOUT",
    }


def _closing(tag: str, fields: dict[str, str], rng: np.random.Generator) -> str:
    options = _CLOSINGS[tag]
    return options[int(rng.integers(len(options)))].format(**fields)


def _user_guide(topic: tuple, rng: np.random.Generator) -> str:
    f = _fields(topic)
    steps = [
        "- Open the {name} page and select {service} for the {entity}.",
        "- Click Configure and edit the {entity} that {name} sends to {service}.",
        "- Set the {entity} fields that {name} reads from {service}.",
        "- Enable {name} and save the {service} {entity}.",
    ]
    body = "\n".join(step.format(**f) for step in steps)
    return (
        "## User guide: set up {name} with {service} and {entity}\n\n".format(**f)
        + f"{body}\n{_closing('user-guide', f, rng)}"
    )


def _api_reference(topic: tuple, rng: np.random.Generator) -> str:
    f = _fields(topic)
    lines = [
        "`{function}({name}_id)` returns the {entity} that {name} stores in {service}.",
        "`{function}_async({name}_id, timeout)` returns a pending {entity} from {service} for {name}.",
        "`get_{name}_status({name}_id)` returns the {name} state of the {entity} in {service}.",
    ]
    body = "\n".join(line.format(**f) for line in lines)
    return (
        "## {entity} API reference for {name} in {service}\n\n".format(**f)
        + f"{body}\n{_closing('api-reference', f, rng)}"
    )


def _cli_reference(topic: tuple, rng: np.random.Generator) -> str:
    f = _fields(topic)
    lines = [
        "The opsctl {verb} command manages {name} and the {entity} in {service}.",
        "For example, `opsctl {verb} status` prints the {name} state of {service} and the {entity}.",
        "For example, `opsctl {verb} apply {entity}.yaml` applies the {entity} to {name} in {service}.",
    ]
    body = "\n".join(line.format(**f) for line in lines)
    return (
        "## CLI reference: opsctl {verb} for {name} in {service}\n\n".format(**f)
        + f"{body}\n{_closing('cli-reference', f, rng)}"
    )


def _troubleshooting(topic: tuple, rng: np.random.Generator) -> str:
    f = _fields(topic)
    lines = [
        "Warning: when {service} fails, {name} stops and the {entity} is locked.",
        "The error {code} means {name} could not reach {service} for the {entity}.",
        "To fix {code}, check the network between {name} and {service}, then retry the {entity}.",
    ]
    body = "\n".join(line.format(**f) for line in lines)
    return (
        "## Troubleshooting {name} errors in {service} and {entity}\n\n".format(**f)
        + f"{body}\n{_closing('troubleshooting', f, rng)}"
    )


_WRITERS = {
    "user-guide": _user_guide,
    "api-reference": _api_reference,
    "cli-reference": _cli_reference,
    "troubleshooting": _troubleshooting,
}

# Offset of the second topic per source tag, so topic pairs differ across tags.
_SECOND_TOPIC_OFFSET = {"user-guide": 1, "api-reference": 3, "cli-reference": 5, "troubleshooting": 7}


def build_documents(per_tag: int = 12, seed: int = FIXTURE_SEED) -> dict[str, list[tuple[str, str]]]:
    """(file name, body) pairs per source tag."""
    rng = np.random.default_rng(seed)
    writer_docs: dict[str, list[tuple[str, str]]] = {}
    for tag in SOURCE_TAGS:
        writer = _WRITERS[tag]
        docs = []
        for i in range(per_tag):
            first = TOPICS[i % len(TOPICS)]
            second = TOPICS[(i + _SECOND_TOPIC_OFFSET[tag]) % len(TOPICS)]
            body = f"{writer(first, rng)}\n\n{writer(second, rng)}\n"
            docs.append((f"{i:02d}-{first[0]}-{second[0]}.md", body))
        writer_docs[tag] = docs
    return writer_docs


_QUERIES = {
    "user-guide": "User guide: how do I set up {name} with {service} and the {entity}?",
    "troubleshooting": "Troubleshooting {code}: {name} fails to reach {service} for the {entity}",
    "cli-reference": "CLI example: which opsctl {verb} command prints the {name} state of the {entity}?",
    "api-reference": "API reference: what does {function} return for the {entity} in {name}?",
}


def build_queries() -> list[dict[str, str]]:
    """Two queries per topic, each aimed at one source category's section."""
    queries = []
    for i, topic in enumerate(TOPICS):
        f = _fields(topic)
        tags = ("user-guide", "troubleshooting") if i % 2 == 0 else ("cli-reference", "api-reference")
        for j, tag in enumerate(tags):
            queries.append({"query_id": f"q{2 * i + j + 1:02d}", "text": _QUERIES[tag].format(**f)})
    return queries


def fixture_config(workspace_dir: str = "./workspace") -> dict[str, Any]:
    """Mock-provider config with paths relative to the fixture directory."""
    return {
        "general": {"workspace_dir": workspace_dir, "log_level": "INFO", "parallelism": 2},
        "corpus": {
            "corpus_id": "synthetic",
            "sources": [{"path": f"corpus/{tag}", "source_tag": tag} for tag in SOURCE_TAGS],
            "queries_path": "queries.jsonl",
        },
        "chunking": {
            "recursive": {"max_tokens": 64, "overlap_tokens": 16},
            # a naive window holds a whole two-topic document
            "naive": {"max_tokens": 256},
            "semantic": {"max_tokens": 128, "min_tokens": 16, "breakpoint_percentile": 25.0},
        },
        "metadata": {"provider": "mock", "batch_size": 16},
        "embedding": {"provider": "mock", "dimension": 256, "batch_size": 64},
        "retrieval": {"k_values": [1, 5, 10]},
        "evaluation": {"provider": "mock", "pool_size": 50, "tau": 0.8},
        "seeds": {"projection": 13, "mock": 7},
    }


def write_fixture(directory: Path, per_tag: int = 12, seed: int = FIXTURE_SEED) -> FixtureSummary:
    """Write corpus/, queries.jsonl and config.json under ``directory``."""
    root = Path(directory)
    documents = build_documents(per_tag, seed)
    count = 0
    for tag, docs in documents.items():
        tag_dir = root / "corpus" / tag
        tag_dir.mkdir(parents=True, exist_ok=True)
        for file_name, body in docs:
            (tag_dir / file_name).write_text(body, encoding="utf-8")
            count += 1

    queries = build_queries()
    write_jsonl(root / "queries.jsonl", queries)
    config_path = root / "config.json"
    write_json(config_path, fixture_config())
    logger.info(f"Wrote {count} documents and {len(queries)} queries to {root}")
    return FixtureSummary(root=root, documents=count, queries=len(queries), config_path=config_path)
