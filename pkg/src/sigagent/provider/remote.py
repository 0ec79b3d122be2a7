"""Chat-completions HTTP provider with bounded exponential retry."""

from __future__ import annotations

import base64
import logging
import os
import time
from dataclasses import dataclass

import httpx

from ..errors import RemoteUnavailable
from .base import ChatRequest

logger = logging.getLogger(__name__)

RETRY_STATUS = {408, 429, 500, 502, 503, 504}


@dataclass
class RemoteConfig:
    endpoint: str
    model: str
    api_key_env: str = "SIGAGENT_API_KEY"
    timeout: float = 60.0
    attempts: int = 3
    backoff: float = 0.5


def _wire_message(msg) -> dict:
    if not msg.attachments:
        return {"role": msg.role, "content": msg.text}
    parts = [{"type": "text", "text": msg.text}]
    for att in msg.attachments:
        uri = f"data:{att.media_type};base64,{base64.b64encode(att.data).decode('ascii')}"
        parts.append({"type": "image_url", "image_url": {"url": uri}})
    return {"role": msg.role, "content": parts}


class RemoteProvider:
    def __init__(self, config: RemoteConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(config.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        self._client = httpx.Client(headers=headers, timeout=config.timeout, transport=transport)

    def payload(self, request: ChatRequest) -> dict:
        return {
            "model": self.config.model,
            "messages": [_wire_message(m) for m in request.messages],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }

    def chat(self, request: ChatRequest) -> str:
        url = self.config.endpoint.rstrip("/") + "/chat/completions"
        body = self.payload(request)
        last_err: Exception | None = None
        for attempt in range(self.config.attempts):
            if attempt:
                time.sleep(self.config.backoff * 2 ** (attempt - 1))
            try:
                resp = self._client.post(url, json=body)
            except httpx.HTTPError as exc:
                last_err = exc
                logger.warning("chat attempt %d failed: %s", attempt + 1, exc)
                continue
            if resp.status_code in RETRY_STATUS:
                last_err = RuntimeError(f"HTTP {resp.status_code}")
                logger.warning("chat attempt %d got HTTP %d", attempt + 1, resp.status_code)
                continue
            if resp.status_code >= 400:
                raise RemoteUnavailable(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise RemoteUnavailable(f"malformed completion response: {exc}") from exc
        raise RemoteUnavailable(f"{self.config.attempts} attempts failed: {last_err}")
