"""Cross-encoder rerank providers used to build ground truth."""
import logging
from abc import ABC, abstractmethod
from typing import Optional, Sequence

import httpx
import numpy as np

from ragforge.config import PipelineConfig, ProviderKind, get_config
from ragforge.embedding.providers import mock_embed
from ragforge.errors import ProviderError, ProviderUnavailableError


logger = logging.getLogger(__name__)

MOCK_SCORE_SCALE = 10.0


class BaseReranker(ABC):
    """Abstract base class for rerankers. Scores are raw and unbounded."""

    @abstractmethod
    def score(self, query: str, documents: Sequence[str]) -> list[float]:
        """One raw relevance score per document, in input order."""
        pass


class HttpReranker(BaseReranker):
    """Rerank endpoint: {model, query, documents} -> {results: [{index, relevance_score}]}."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: Optional[str] = None,
        timeout: float = 60.0,
        client: Optional[httpx.Client] = None,
    ):
        self.endpoint = endpoint
        self.model = model
        headers = {"content-type": "application/json"}
        if api_key:
            headers["authorization"] = f"Bearer {api_key}"
        self._client = client or httpx.Client(timeout=timeout, headers=headers)

    def score(self, query: str, documents: Sequence[str]) -> list[float]:
        if not documents:
            return []
        try:
            response = self._client.post(
                self.endpoint,
                json={"model": self.model, "query": query, "documents": list(documents)},
            )
            response.raise_for_status()
            results = response.json()["results"]
            scores: list[Optional[float]] = [None] * len(documents)
            for item in results:
                scores[int(item["index"])] = float(item["relevance_score"])
        except (httpx.ConnectError, httpx.ConnectTimeout) as e:
            raise ProviderUnavailableError(f"Rerank endpoint unreachable: {self.endpoint}: {e}") from e
        except httpx.HTTPStatusError as e:
            raise ProviderError(f"Rerank endpoint returned HTTP {e.response.status_code}") from e
        except httpx.HTTPError as e:
            raise ProviderError(f"Rerank request failed: {e}") from e
        except (KeyError, IndexError, TypeError, ValueError) as e:
            raise ProviderError(f"Unexpected rerank response shape: {e}") from e

        missing = [i for i, s in enumerate(scores) if s is None]
        if missing:
            raise ProviderError(f"Rerank response has no score for documents {missing[:5]}")
        return scores

    def close(self) -> None:
        self._client.close()


def mock_rerank(query: str, document: str, seed: int = 7, dimension: int = 1536) -> float:
    """Cosine of the mock embeddings stretched to [-10, 10]."""
    cosine = float(np.dot(mock_embed(query, dimension, seed), mock_embed(document, dimension, seed)))
    return MOCK_SCORE_SCALE * max(-1.0, min(1.0, cosine))


class MockReranker(BaseReranker):
    """Deterministic offline reranker."""

    def __init__(self, seed: int = 7, dimension: int = 1536):
        self.seed = seed
        self.dimension = dimension

    def score(self, query: str, documents: Sequence[str]) -> list[float]:
        return [mock_rerank(query, document, self.seed, self.dimension) for document in documents]


def get_reranker(config: Optional[PipelineConfig] = None) -> BaseReranker:
    """Get reranker based on configuration."""
    config = config or get_config()
    section = config.evaluation
    if section.provider == ProviderKind.HTTP:
        logger.info(f"Using reranker {section.model} at {section.endpoint}")
        return HttpReranker(
            endpoint=section.endpoint,
            model=section.model,
            api_key=config.api_key_for("evaluation"),
            timeout=section.timeout_seconds,
        )
    return MockReranker(seed=config.seeds.mock, dimension=config.embedding.dimension)
