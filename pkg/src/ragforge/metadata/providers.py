"""Chat-completion providers for metadata generation."""
import json
import logging
from abc import ABC, abstractmethod
from typing import Optional

import httpx

from ragforge.config import PipelineConfig, ProviderKind, get_config
from ragforge.errors import ProviderError, ProviderUnavailableError
from .mock import mock_metadata
from .prompts import split_user_prompt


logger = logging.getLogger(__name__)


class BaseChatProvider(ABC):
    """Abstract base class for chat providers. Instances are shared across threads."""

    #: recorded as EnrichedChunk.generator_tag
    name: str = "base"

    @abstractmethod
    def complete(
        self,
        system: str,
        user: str,
        temperature: float = 0.5,
        max_tokens: int = 800,
    ) -> str:
        """Return the response text for one system/user prompt pair."""
        pass


class HttpChatProvider(BaseChatProvider):
    """OpenAI-style JSON chat-completion endpoint."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: Optional[str] = None,
        timeout: float = 120.0,
        client: Optional[httpx.Client] = None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.name = model
        headers = {"content-type": "application/json"}
        if api_key:
            headers["authorization"] = f"Bearer {api_key}"
        self._client = client or httpx.Client(timeout=timeout, headers=headers)

    def complete(self, system: str, user: str, temperature: float = 0.5, max_tokens: int = 800) -> str:
        body = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
            "temperature": temperature,
            "max_tokens": max_tokens,
        }
        try:
            response = self._client.post(self.endpoint, json=body)
            response.raise_for_status()
            return response.json()["choices"][0]["message"]["content"]
        except (httpx.ConnectError, httpx.ConnectTimeout) as e:
            raise ProviderUnavailableError(f"Chat endpoint unreachable: {self.endpoint}: {e}") from e
        except httpx.HTTPStatusError as e:
            raise ProviderError(f"Chat endpoint returned HTTP {e.response.status_code}") from e
        except httpx.HTTPError as e:
            raise ProviderError(f"Chat request failed: {e}") from e
        except (KeyError, IndexError, TypeError, ValueError) as e:
            raise ProviderError(f"Unexpected chat response shape: {e}") from e

    def close(self) -> None:
        self._client.close()


class MockChatProvider(BaseChatProvider):
    """Answers with heuristic metadata for the chunk embedded in the user prompt."""

    name = "mock"

    def complete(self, system: str, user: str, temperature: float = 0.5, max_tokens: int = 800) -> str:
        source_tag, text = split_user_prompt(user)
        return json.dumps(mock_metadata(text, source_tag).to_dict())


def get_chat_provider(config: Optional[PipelineConfig] = None) -> BaseChatProvider:
    """Get chat provider based on configuration."""
    config = config or get_config()
    section = config.metadata
    if section.provider == ProviderKind.HTTP:
        logger.info(f"Using chat model {section.model} at {section.endpoint}")
        return HttpChatProvider(
            endpoint=section.endpoint,
            model=section.model,
            api_key=config.api_key_for("metadata"),
            timeout=section.timeout_seconds,
        )
    return MockChatProvider()
