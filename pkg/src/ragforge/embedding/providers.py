"""Embedding providers."""
import hashlib
import logging
from abc import ABC, abstractmethod
from functools import lru_cache
from typing import Optional, Sequence

import httpx
import numpy as np
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt, wait_exponential

from ragforge.chunking.tokenizer import word_tokens
from ragforge.config import PipelineConfig, ProviderKind, get_config
from ragforge.errors import EmbeddingError, ProviderError, ProviderUnavailableError


logger = logging.getLogger(__name__)


class BaseEmbedder(ABC):
    """Abstract base class for embedding providers. Same text, same vector."""

    @abstractmethod
    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        """Embed texts; returns an array of shape (len(texts), dimension)."""
        pass

    @property
    @abstractmethod
    def dimension(self) -> int:
        """Embedding dimension."""
        pass

    def embed(self, text: str) -> np.ndarray:
        """Generate embedding for single text."""
        return self.embed_batch([text])[0]

    def __call__(self, texts: Sequence[str]) -> np.ndarray:
        return self.embed_batch(texts)


class HttpEmbedder(BaseEmbedder):
    """OpenAI-style embeddings endpoint: {model, input} -> {data: [{embedding}]}."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        dimension: int,
        api_key: Optional[str] = None,
        batch_size: int = 32,
        max_retries: int = 3,
        retry_wait: float = 1.0,
        timeout: float = 60.0,
        client: Optional[httpx.Client] = None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.batch_size = batch_size
        self._dimension = dimension
        self._retrying = dict(
            stop=stop_after_attempt(max_retries + 1),
            wait=wait_exponential(multiplier=retry_wait, max=max(retry_wait * 8, 0)),
            retry=retry_if_exception_type(ProviderError),
            reraise=True,
        )
        headers = {"content-type": "application/json"}
        if api_key:
            headers["authorization"] = f"Bearer {api_key}"
        self._client = client or httpx.Client(timeout=timeout, headers=headers)

    @property
    def dimension(self) -> int:
        return self._dimension

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        rows = []
        for start in range(0, len(texts), self.batch_size):
            batch = list(texts[start:start + self.batch_size])
            for attempt in Retrying(**self._retrying):
                with attempt:
                    vectors = self._request(batch)
            rows.extend(vectors)
        return np.asarray(rows, dtype=np.float64).reshape(len(texts), self._dimension)

    def _request(self, batch: list[str]) -> list[list[float]]:
        try:
            response = self._client.post(self.endpoint, json={"model": self.model, "input": batch})
            response.raise_for_status()
            data = response.json()["data"]
        except (httpx.ConnectError, httpx.ConnectTimeout) as e:
            raise ProviderUnavailableError(f"Embedding endpoint unreachable: {self.endpoint}: {e}") from e
        except httpx.HTTPStatusError as e:
            raise ProviderError(f"Embedding endpoint returned HTTP {e.response.status_code}") from e
        except httpx.HTTPError as e:
            raise ProviderError(f"Embedding request failed: {e}") from e
        except (KeyError, TypeError, ValueError) as e:
            raise ProviderError(f"Unexpected embedding response shape: {e}") from e

        if len(data) != len(batch):
            raise ProviderError(f"Expected {len(batch)} embeddings, got {len(data)}")
        data = sorted(data, key=lambda item: item.get("index", 0)) if "index" in data[0] else data
        vectors = [item["embedding"] for item in data]
        for vector in vectors:
            if len(vector) != self._dimension:
                raise EmbeddingError(
                    f"Provider returned dimension {len(vector)}, expected {self._dimension}"
                )
        return vectors

    def close(self) -> None:
        self._client.close()


class MockEmbedder(BaseEmbedder):
    """Deterministic bag-of-words embeddings for offline runs and tests."""

    def __init__(self, dimension: int = 1536, seed: int = 7):
        if dimension < 8:
            raise ValueError(f"dimension must be >= 8, got {dimension}")
        self._dimension = dimension
        self.seed = seed

    @property
    def dimension(self) -> int:
        return self._dimension

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        if not len(texts):
            return np.zeros((0, self._dimension))
        return np.vstack([mock_embed(text, self._dimension, self.seed) for text in texts])


def _seed_for(key: str, seed: int) -> int:
    digest = hashlib.blake2b(f"{seed}\x1f{key}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@lru_cache(maxsize=65536)
def _token_vector(token: str, dimension: int, seed: int) -> np.ndarray:
    vector = np.random.default_rng(_seed_for(token, seed)).standard_normal(dimension)
    vector /= np.linalg.norm(vector)
    vector.setflags(write=False)
    return vector


def mock_embed(text: str, dimension: int, seed: int) -> np.ndarray:
    """Frequency-weighted sum of per-token pseudo-random unit vectors, normalized."""
    if dimension < 8:
        raise ValueError(f"dimension must be >= 8, got {dimension}")
    tokens = word_tokens(text)
    if not tokens:
        # Empty text gets a fixed vector of its own.
        return _token_vector("\x00empty", dimension, seed).copy()

    counts: dict[str, int] = {}
    for token in tokens:
        counts[token] = counts.get(token, 0) + 1
    total = np.zeros(dimension)
    for token, count in sorted(counts.items()):
        total += count * _token_vector(token, dimension, seed)
    norm = np.linalg.norm(total)
    return total / norm if norm > 0 else _token_vector("\x00empty", dimension, seed).copy()


def get_embedder(config: Optional[PipelineConfig] = None) -> BaseEmbedder:
    """Get embedder based on configuration."""
    config = config or get_config()
    section = config.embedding
    if section.provider == ProviderKind.HTTP:
        logger.info(f"Using embedding model {section.model} at {section.endpoint}")
        return HttpEmbedder(
            endpoint=section.endpoint,
            model=section.model,
            dimension=section.dimension,
            api_key=config.api_key_for("embedding"),
            batch_size=section.batch_size,
            max_retries=section.max_retries,
            retry_wait=section.retry_wait_seconds,
            timeout=section.timeout_seconds,
        )
    return MockEmbedder(dimension=section.dimension, seed=config.seeds.mock)
