"""Fill-mask model wrapper: candidate scoring and top-N suggestion.

A candidate occupies as many mask slots as its subword piece count, and its
score is the geometric mean of the per-piece probabilities, so scores stay
comparable across candidate lengths. Probabilities are the model's raw
softmax values, not renormalized over the candidate set; a client applying
an absolute threshold sees genuine model confidence. Candidates the
tokenizer cannot represent (any piece falls back to the unknown token)
score 0.0.

Model access is serialized with a lock; responses are deterministic for a
fixed model and request.
"""

from __future__ import annotations

import math
import threading
from typing import Sequence

import torch

from lm_service.config import ServiceConfig


class ModelError(Exception):
    """The model cannot be loaded or cannot serve at all."""


class RequestError(ValueError):
    """The request cannot be served as posed (a client error)."""


class NotReadyError(Exception):
    """Scoring was attempted before the model finished loading."""


class MaskedLanguageModel:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.load_error: str | None = None
        self._tokenizer = None
        self._model = None
        self._lock = threading.Lock()

    @property
    def ready(self) -> bool:
        return self._model is not None

    def load(self) -> None:
        """Load tokenizer and weights; idempotent; raises ModelError."""
        if self.ready:
            return
        try:
            from transformers import AutoModelForMaskedLM, AutoTokenizer

            tokenizer = AutoTokenizer.from_pretrained(self.config.model)
            if tokenizer.mask_token_id is None:
                raise ModelError(
                    f"model {self.config.model!r} has no mask token; "
                    "a fill-mask model is required"
                )
            model = AutoModelForMaskedLM.from_pretrained(self.config.model)
            model.to(self.config.device)
            model.eval()
        except ModelError as exc:
            self.load_error = str(exc)
            raise
        except Exception as exc:
            self.load_error = f"failed to load {self.config.model!r}: {exc}"
            raise ModelError(self.load_error) from exc
        self._tokenizer = tokenizer
        self._model = model

    def _require_ready(self) -> None:
        if not self.ready:
            raise NotReadyError(self.load_error or "model is still loading")

    def pieces(self, word: str) -> list[int]:
        return self._tokenizer.convert_tokens_to_ids(self._tokenizer.tokenize(word))

    def _candidate_pieces(self, candidate: str) -> list[int]:
        ids = self.pieces(candidate)
        if not ids:
            raise RequestError(f"candidate {candidate!r} tokenizes to nothing")
        if len(ids) > self.config.max_candidate_pieces:
            raise RequestError(
                f"candidate {candidate!r} needs {len(ids)} pieces, "
                f"limit is {self.config.max_candidate_pieces}"
            )
        return ids

    def _context(self, tokens: Sequence[str], mask_index: int) -> tuple[list[int], list[int]]:
        left: list[int] = []
        for word in tokens[:mask_index]:
            left.extend(self.pieces(word))
        right: list[int] = []
        for word in tokens[mask_index + 1 :]:
            right.extend(self.pieces(word))
        return left, right

    def _mask_log_probs(
        self, left: list[int], right: list[int], width: int
    ) -> torch.Tensor:
        """Log-probabilities at `width` mask slots, shape (width, vocab)."""
        tok = self._tokenizer
        ids = (
            [tok.cls_token_id]
            + left
            + [tok.mask_token_id] * width
            + right
            + [tok.sep_token_id]
        )
        limit = getattr(self._model.config, "max_position_embeddings", None)
        if limit is not None and len(ids) > limit:
            raise RequestError(
                f"request needs {len(ids)} positions, model allows {limit}"
            )
        first = 1 + len(left)
        batch = torch.tensor([ids], device=self.config.device)
        with torch.no_grad():
            logits = self._model(input_ids=batch).logits[0]
        return torch.log_softmax(logits[first : first + width], dim=-1)

    def score(
        self, tokens: Sequence[str], mask_index: int, candidates: Sequence[str]
    ) -> list[float]:
        """One raw probability per candidate, aligned, each in [0, 1]."""
        self._require_ready()
        piece_ids = [self._candidate_pieces(c) for c in candidates]
        unk = self._tokenizer.unk_token_id
        with self._lock:
            left, right = self._context(tokens, mask_index)
            by_width: dict[int, torch.Tensor] = {}
            scores: list[float] = []
            for ids in piece_ids:
                if unk is not None and unk in ids:
                    scores.append(0.0)
                    continue
                width = len(ids)
                if width not in by_width:
                    by_width[width] = self._mask_log_probs(left, right, width)
                rows = by_width[width]
                total = sum(float(rows[i, pid]) for i, pid in enumerate(ids))
                scores.append(min(1.0, max(0.0, math.exp(total / width))))
        return scores

    def topn(
        self, tokens: Sequence[str], mask_index: int, n: int
    ) -> tuple[list[str], list[float]]:
        """Best whole-piece fillers for a single mask slot.

        Special tokens and continuation pieces are excluded; at most n
        suggestions come back, fewer if the vocabulary runs out.
        """
        self._require_ready()
        tok = self._tokenizer
        with self._lock:
            left, right = self._context(tokens, mask_index)
            probs = self._mask_log_probs(left, right, 1)[0].exp()
        skip = set(tok.all_special_ids)
        ranked: list[tuple[str, float]] = []
        for token, idx in tok.get_vocab().items():
            if idx in skip or token.startswith("##"):
                continue
            ranked.append((token, min(1.0, max(0.0, float(probs[idx])))))
        ranked.sort(key=lambda pair: (-pair[1], pair[0]))
        top = ranked[:n]
        return [w for w, _ in top], [s for _, s in top]
