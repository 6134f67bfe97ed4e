"""Agents that answer prompts: scripted strategy bots and remote chat services."""

from __future__ import annotations

import os
import re
import string
import threading
import time
from dataclasses import dataclass, field
from typing import Optional

import httpx
import numpy as np

from ..game import DomainError, parse_strategy
from .prompts import PromptSpec

_STRIP = string.whitespace + string.punctuation
_TOKEN = re.compile(r"(?<![A-Za-z])([LR])(?![A-Za-z])")


def parse_action(text: Optional[str], lenient: bool = True):
    """('L' | 'R' | None, rule used).

    Strict: the reply trimmed of whitespace and punctuation is L or R (any
    case).  Lenient fallback: the first standalone capital L or R token.
    """
    if text is None:
        return None, None
    core = text.strip(_STRIP).upper()
    if core in ("L", "R"):
        return core, "strict"
    if lenient:
        m = _TOKEN.search(text)
        if m:
            return m.group(1), "lenient"
    return None, None


class TokenBucket:
    """Thread-safe token bucket; the default allows one request per 0.5 s."""

    def __init__(self, interval: float = 0.5, burst: int = 1, clock=time.monotonic, sleep=time.sleep):
        if interval < 0 or burst < 1:
            raise DomainError("interval must be >= 0 and burst >= 1")
        self.interval = interval
        self.burst = burst
        self._clock = clock
        self._sleep = sleep
        self._tokens = float(burst)
        self._last = clock()
        self._lock = threading.Lock()

    def acquire(self):
        if self.interval == 0:
            return
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self.burst, self._tokens + (now - self._last) / self.interval)
                self._last = now
                if self._tokens >= 1:
                    self._tokens -= 1
                    return
                wait = (1 - self._tokens) * self.interval
            self._sleep(wait)


class TransportError(RuntimeError):
    pass


class ScriptedAgent:
    """Answers by sampling a bounded-memory strategy.

    A memory-1 strategy reacts to the last outcome it is shown.  A memory-2
    strategy uses its round-two entry when only one past round is known and
    its history entry otherwise.
    """

    kind = "scripted"

    def __init__(self, strategy, name: Optional[str] = None):
        if isinstance(strategy, str):
            name = name or strategy
            strategy = parse_strategy(strategy)
        self.strategy = strategy
        self.name = name or f"scripted-m{strategy.memory}"

    def coop_probability(self, spec: PromptSpec) -> float:
        s, h = self.strategy, spec.history
        if not h:
            return s.p0
        if s.memory == 1:
            return s.entries[h[-1]]
        if len(h) == 1:
            return s.r2[h[-1]]
        return s.h2[4 * h[-1] + h[-2]]

    def respond(self, spec: PromptSpec, rng: np.random.Generator) -> str:
        return "L" if rng.random() < self.coop_probability(spec) else "R"


@dataclass
class RemoteConfig:
    endpoint: str
    model: str
    api_key_env: Optional[str] = None       # name of the environment variable holding the key
    temperature: Optional[float] = None
    top_p: Optional[float] = None
    max_tokens: Optional[int] = 5
    seed: Optional[int] = None
    timeout: float = 60.0
    retries: int = 3
    backoff: float = 1.0
    headers: dict = field(default_factory=dict)


class RemoteAgent:
    """Single-turn chat-completion client (system + user message, JSON over HTTPS)."""

    kind = "remote"

    def __init__(self, config: RemoteConfig, limiter: Optional[TokenBucket] = None,
                 client: Optional[httpx.Client] = None, sleep=time.sleep):
        self.config = config
        self.name = config.model
        self.limiter = limiter or TokenBucket()
        self._client = client
        self._sleep = sleep

    def _headers(self) -> dict:
        h = {"Content-Type": "application/json", **self.config.headers}
        if self.config.api_key_env:
            key = os.environ.get(self.config.api_key_env)
            if not key:
                raise TransportError(f"environment variable {self.config.api_key_env} is not set")
            h["Authorization"] = f"Bearer {key}"
        return h

    def request_body(self, spec: PromptSpec) -> dict:
        c = self.config
        body = {"model": c.model,
                "messages": [{"role": "system", "content": spec.system},
                             {"role": "user", "content": spec.rendered}]}
        for k in ("temperature", "top_p", "max_tokens", "seed"):
            v = getattr(c, k)
            if v is not None:
                body[k] = v
        return body

    def respond(self, spec: PromptSpec, rng=None) -> str:
        client = self._client or httpx.Client(timeout=self.config.timeout)
        last = None
        try:
            for attempt in range(self.config.retries + 1):
                if attempt:
                    self._sleep(self.config.backoff * 2 ** (attempt - 1))
                self.limiter.acquire()
                try:
                    r = client.post(self.config.endpoint, json=self.request_body(spec), headers=self._headers())
                    if r.status_code == 429 or r.status_code >= 500:
                        last = f"HTTP {r.status_code}"
                        continue
                    r.raise_for_status()
                    return r.json()["choices"][0]["message"]["content"]
                except httpx.HTTPStatusError as e:
                    raise TransportError(f"HTTP {e.response.status_code}") from e
                except (httpx.TransportError, KeyError, IndexError, ValueError) as e:
                    last = f"{type(e).__name__}: {e}"
        finally:
            if self._client is None:
                client.close()
        raise TransportError(f"gave up after {self.config.retries + 1} attempts ({last})")


def agent_from_config(cfg: dict):
    """{"kind": "scripted", "strategy": ...} or {"kind": "remote", "endpoint": ..., ...}."""
    kind = cfg.get("kind", "scripted")
    if kind == "scripted":
        return ScriptedAgent(cfg["strategy"], cfg.get("name"))
    if kind == "remote":
        rate = cfg.get("rate_limit", {})
        fields = {k: v for k, v in cfg.items() if k in RemoteConfig.__dataclass_fields__}
        return RemoteAgent(RemoteConfig(**fields),
                           TokenBucket(rate.get("interval", 0.5), rate.get("burst", 1)))
    raise DomainError(f"unknown agent kind {kind!r}")
