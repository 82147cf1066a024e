"""Service configuration."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ServiceConfig:
    """Settings for the scoring server and the fine-tuning script.

    `model` is a Hugging Face model id or a local directory; it must be a
    fill-mask model, the service refuses to start otherwise. `max_batch`
    bounds how many sequences go through the model in one forward pass.
    `max_candidate_pieces` caps how many subword pieces a scoring candidate
    may occupy; longer candidates are rejected as bad requests.
    """

    model: str
    host: str = "127.0.0.1"
    port: int = 8311
    max_batch: int = 32
    device: str = "cpu"
    max_candidate_pieces: int = 8

    def __post_init__(self) -> None:
        if not self.model:
            raise ValueError("model identifier or path is required")
        if not 1 <= self.port <= 65535:
            raise ValueError("port must be in 1..65535")
        if self.max_batch < 1:
            raise ValueError("max_batch must be positive")
        if self.max_candidate_pieces < 1:
            raise ValueError("max_candidate_pieces must be positive")
