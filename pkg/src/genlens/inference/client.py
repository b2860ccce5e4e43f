"""Async client for OpenAI-compatible chat-completions endpoints.

Retries transient failures (connection errors, 429, 5xx) with exponential
backoff; 401/403 fail immediately. A custom httpx transport can be
injected for testing.
"""

from __future__ import annotations

import asyncio
import json
from dataclasses import dataclass
from typing import Any, AsyncIterator

import httpx

from ..errors import AuthError, CompletionTimeout, EndpointError, ValidationFailure
from .config import EndpointConfig, SamplingParams


@dataclass
class Completion:
    text: str
    finish_reason: str | None
    usage: dict[str, Any] | None
    attempts: int = 1


def _messages_for(prompt: str | None, messages: list[dict] | None) -> list[dict]:
    if (prompt is None) == (messages is None):
        raise ValidationFailure("provide exactly one of prompt or messages")
    if prompt is not None:
        return [{"role": "user", "content": prompt}]
    return messages


class InferenceClient:
    def __init__(self, config: EndpointConfig, transport: httpx.AsyncBaseTransport | None = None):
        self.config = config
        self._client = httpx.AsyncClient(
            timeout=config.timeout_s, transport=transport
        )

    @property
    def _url(self) -> str:
        return self.config.base_url.rstrip("/") + "/chat/completions"

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = self.config.resolve_api_key()
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _body(
        self, prompt: str | None, messages: list[dict] | None, params: SamplingParams, stream: bool
    ) -> dict[str, Any]:
        body: dict[str, Any] = {
            "model": self.config.model,
            "messages": _messages_for(prompt, messages),
            **params.request_fields(),
        }
        if stream:
            body["stream"] = True
        return body

    async def _send(self, body: dict[str, Any], stream: bool = False) -> tuple[httpx.Response, int]:
        """One request with the retry policy applied; returns (response, attempts)."""
        attempts = self.config.max_retries + 1
        last_status: int | None = None
        last_error = ""
        timed_out = False
        for attempt in range(attempts):
            if attempt:
                await asyncio.sleep(self.config.backoff_base_s * 2 ** (attempt - 1))
            try:
                request = self._client.build_request(
                    "POST", self._url, json=body, headers=self._headers()
                )
                response = await self._client.send(request, stream=stream)
            except httpx.TimeoutException as e:
                timed_out, last_error = True, str(e)
                continue
            except httpx.TransportError as e:
                timed_out, last_error = False, str(e)
                last_status = None
                continue
            if response.status_code in (401, 403):
                await response.aclose()
                raise AuthError(response.status_code)
            if response.status_code == 429 or response.status_code >= 500:
                timed_out = False
                last_status = response.status_code
                last_error = await self._drain(response)
                continue
            if response.status_code >= 400:
                detail = await self._drain(response)
                raise EndpointError(response.status_code, detail, attempt + 1)
            return response, attempt + 1
        if timed_out:
            raise CompletionTimeout(self.config.timeout_s, attempts)
        raise EndpointError(last_status, last_error, attempts)

    @staticmethod
    async def _drain(response: httpx.Response) -> str:
        try:
            await response.aread()
            return response.text[:500]
        finally:
            await response.aclose()

    async def complete(
        self,
        prompt: str | None = None,
        messages: list[dict] | None = None,
        params: SamplingParams | None = None,
    ) -> Completion:
        """First-choice text of one chat completion."""
        params = params or SamplingParams()
        response, attempts = await self._send(self._body(prompt, messages, params, stream=False))
        try:
            await response.aread()
            payload = response.json()
        finally:
            await response.aclose()
        choice = payload["choices"][0]
        return Completion(
            text=choice["message"]["content"] or "",
            finish_reason=choice.get("finish_reason"),
            usage=payload.get("usage"),
            attempts=attempts,
        )

    async def stream(
        self,
        prompt: str | None = None,
        messages: list[dict] | None = None,
        params: SamplingParams | None = None,
    ) -> AsyncIterator[str]:
        """Incremental response text; closing the iterator aborts the request.

        Servers that answer with plain JSON instead of an event stream
        deliver their whole text as a single chunk.
        """
        params = params or SamplingParams()
        response, _ = await self._send(self._body(prompt, messages, params, stream=True), stream=True)
        try:
            content_type = response.headers.get("content-type", "")
            if "text/event-stream" not in content_type:
                await response.aread()
                payload = response.json()
                text = payload["choices"][0]["message"]["content"] or ""
                if text:
                    yield text
                return
            async for line in response.aiter_lines():
                if not line.startswith("data:"):
                    continue
                data = line[len("data:") :].strip()
                if data == "[DONE]":
                    break
                chunk = json.loads(data)
                choice = chunk["choices"][0]
                delta = choice.get("delta") or {}
                piece = delta.get("content")
                if piece is None and "message" in choice:
                    piece = choice["message"].get("content")
                if piece:
                    yield piece
        finally:
            await response.aclose()

    async def aclose(self) -> None:
        await self._client.aclose()

    async def __aenter__(self) -> "InferenceClient":
        return self

    async def __aexit__(self, *exc) -> None:
        await self.aclose()
