"""The pluggable masked-word scoring contract and its implementations.

A scorer maps a MaskedQuery (tokens, mask position, explicit candidate list)
to one score per candidate, in candidate order, each in [0, 1]. No
implementation may drop, reorder, or substitute candidates; unknown words get
a floor score instead.

Two score semantics coexist and are declared per scorer:
  candidate_normalized - scores sum to 1 over the candidate set (the n-gram
      and unigram baselines). Absolute thresholds then measure share of the
      candidate mass.
  absolute - scores are raw model probabilities (the remote service), so an
      absolute threshold K keeps its usual meaning.
Reports record which semantics produced them.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Iterable, Mapping, Protocol, Sequence

import requests

MASK = "[MASK]"

SEMANTICS_CANDIDATE_NORMALIZED = "candidate_normalized"
SEMANTICS_ABSOLUTE = "absolute"


class ScorerError(Exception):
    """Base class for scoring failures."""


class TransportError(ScorerError):
    """Remote backend unreachable or persistently failing; retryable class."""

    def __init__(self, message: str, kind: str):
        super().__init__(message)
        self.kind = kind  # timeout | connection | http_status


class ContractError(ScorerError):
    """The backend violated the scoring contract; not retryable."""


@dataclass(frozen=True)
class MaskedQuery:
    tokens: tuple[str, ...]
    mask_index: int
    candidates: tuple[str, ...]

    def __post_init__(self) -> None:
        if not 0 <= self.mask_index < len(self.tokens):
            raise ValueError(
                f"mask_index {self.mask_index} out of range for {len(self.tokens)} tokens"
            )
        if not self.candidates:
            raise ValueError("candidates must be non-empty")
        if len(set(self.candidates)) != len(self.candidates):
            raise ValueError("candidates must be duplicate-free")

    def masked_tokens(self) -> tuple[str, ...]:
        toks = list(self.tokens)
        toks[self.mask_index] = MASK
        return tuple(toks)


@dataclass(frozen=True)
class ScoredCandidate:
    word: str
    score: float


class Scorer(Protocol):
    semantics: str

    def score(self, query: MaskedQuery) -> list[ScoredCandidate]: ...


def validate_scores(query: MaskedQuery, scores: Sequence[float], source: str) -> None:
    if len(scores) != len(query.candidates):
        raise ContractError(
            f"{source}: got {len(scores)} scores for {len(query.candidates)} candidates"
        )
    for s in scores:
        if not isinstance(s, (int, float)) or isinstance(s, bool):
            raise ContractError(f"{source}: non-numeric score {s!r}")
        if math.isnan(s) or math.isinf(s):
            raise ContractError(f"{source}: non-finite score {s!r}")
        if not 0.0 <= s <= 1.0:
            raise ContractError(f"{source}: score {s} outside [0, 1]")


class UnigramScorer:
    """Raw word frequencies normalized over the candidate set.

    Candidates with a zero total fall back to a uniform distribution, so a
    single unknown candidate still scores 1.0.
    """

    semantics = SEMANTICS_CANDIDATE_NORMALIZED

    def __init__(self, frequencies: Mapping[str, int]):
        self._freq = dict(frequencies)

    def score(self, query: MaskedQuery) -> list[ScoredCandidate]:
        raw = [float(self._freq.get(c, 0)) for c in query.candidates]
        total = sum(raw)
        if total <= 0.0:
            uniform = 1.0 / len(raw)
            return [ScoredCandidate(c, uniform) for c in query.candidates]
        return [ScoredCandidate(c, r / total) for c, r in zip(query.candidates, raw)]


class OracleScorer:
    """Assigns 1.0 to one planted truth word and 0.0 to everything else."""

    semantics = SEMANTICS_ABSOLUTE

    def __init__(self, truth: str):
        self.truth = truth

    def score(self, query: MaskedQuery) -> list[ScoredCandidate]:
        return [
            ScoredCandidate(c, 1.0 if c == self.truth else 0.0)
            for c in query.candidates
        ]


class NgramScorer:
    """Bigram model with additive smoothing.

    score(c) is proportional to P(c | left) * P(right | c) where left/right
    are the tokens around the mask (sentence boundary markers at the edges),
    normalized over the candidate set. Words absent from the training corpus
    receive the smoothing floor rather than being dropped.
    """

    semantics = SEMANTICS_CANDIDATE_NORMALIZED

    BOS = "<s>"
    EOS = "</s>"

    def __init__(
        self,
        unigrams: Mapping[str, int],
        bigrams: Mapping[tuple[str, str], int],
        vocab: frozenset[str],
        alpha: float = 1.0,
    ):
        if not vocab:
            raise ValueError("n-gram model has an empty vocabulary")
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        self._unigrams = dict(unigrams)
        self._bigrams = dict(bigrams)
        self.vocab = vocab
        self.alpha = alpha
        # one extra type stands in for every unseen word
        self._v = len(vocab) + 1

    @classmethod
    def train(cls, sentences: Iterable[Sequence[str]], alpha: float = 1.0) -> NgramScorer:
        unigrams: dict[str, int] = {}
        bigrams: dict[tuple[str, str], int] = {}
        vocab: set[str] = set()
        n_sentences = 0
        for tokens in sentences:
            n_sentences += 1
            vocab.update(tokens)
            chain = [cls.BOS, *tokens, cls.EOS]
            for a, b in zip(chain, chain[1:]):
                unigrams[a] = unigrams.get(a, 0) + 1
                bigrams[(a, b)] = bigrams.get((a, b), 0) + 1
        if n_sentences == 0 or not vocab:
            raise ValueError("cannot train an n-gram model on an empty corpus")
        return cls(unigrams, bigrams, frozenset(vocab), alpha)

    @classmethod
    def train_file(cls, path: str, alpha: float = 1.0) -> NgramScorer:
        with open(path, encoding="utf-8") as fh:
            return cls.train(
                (line.split() for line in fh if line.strip()), alpha=alpha
            )

    def _cond(self, prev: str, word: str) -> float:
        num = self._bigrams.get((prev, word), 0) + self.alpha
        den = self._unigrams.get(prev, 0) + self.alpha * self._v
        return num / den

    def _context(self, tokens: Sequence[str], mask_index: int) -> tuple[str, str]:
        left = tokens[mask_index - 1] if mask_index > 0 else self.BOS
        right = tokens[mask_index + 1] if mask_index + 1 < len(tokens) else self.EOS
        return left, right

    def raw_score(self, tokens: Sequence[str], mask_index: int, word: str) -> float:
        left, right = self._context(tokens, mask_index)
        return self._cond(left, word) * self._cond(word, right)

    def score(self, query: MaskedQuery) -> list[ScoredCandidate]:
        raw = [
            self.raw_score(query.tokens, query.mask_index, c) for c in query.candidates
        ]
        total = sum(raw)
        return [ScoredCandidate(c, r / total) for c, r in zip(query.candidates, raw)]

    def top_candidates(
        self, tokens: Sequence[str], mask_index: int, n: int
    ) -> list[ScoredCandidate]:
        """Best n vocabulary words for the masked slot, by raw probability."""
        scored = [
            ScoredCandidate(w, self.raw_score(tokens, mask_index, w))
            for w in sorted(self.vocab)
        ]
        scored.sort(key=lambda sc: (-sc.score, sc.word))
        return scored[:n]


class RemoteScorer:
    """HTTP client for the scoring wire protocol.

    POST {endpoint}/v1/score with {"tokens": [...], "mask_index": i,
    "candidates": [...]} and expects {"scores": [...]} aligned to the
    candidates. Transport failures are retried with exponential backoff up to
    `retries` extra attempts; contract violations fail immediately.
    """

    semantics = SEMANTICS_ABSOLUTE

    def __init__(
        self,
        endpoint: str,
        timeout: float = 10.0,
        retries: int = 3,
        backoff: float = 0.25,
        session: requests.Session | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self._session = session or requests.Session()

    def _post(self, path: str, payload: dict) -> dict:
        last: TransportError | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff * (2 ** (attempt - 1)))
            try:
                resp = self._session.post(
                    self.endpoint + path, json=payload, timeout=self.timeout
                )
            except requests.Timeout:
                last = TransportError(f"{path}: request timed out", kind="timeout")
                continue
            except requests.ConnectionError as exc:
                last = TransportError(f"{path}: connection failed: {exc}", kind="connection")
                continue
            if resp.status_code == 200:
                try:
                    body = resp.json()
                except ValueError as exc:
                    raise ContractError(f"{path}: response is not JSON: {exc}") from exc
                if not isinstance(body, dict):
                    raise ContractError(f"{path}: response is not a JSON object")
                return body
            message = _error_message(resp)
            if 500 <= resp.status_code < 600:
                last = TransportError(
                    f"{path}: HTTP {resp.status_code}: {message}", kind="http_status"
                )
                continue
            raise ContractError(f"{path}: HTTP {resp.status_code}: {message}")
        assert last is not None
        raise last

    def score(self, query: MaskedQuery) -> list[ScoredCandidate]:
        body = self._post(
            "/v1/score",
            {
                "tokens": list(query.tokens),
                "mask_index": query.mask_index,
                "candidates": list(query.candidates),
            },
        )
        scores = body.get("scores")
        if not isinstance(scores, list):
            raise ContractError("/v1/score: response lacks a `scores` list")
        validate_scores(query, scores, "/v1/score")
        return [
            ScoredCandidate(c, float(s)) for c, s in zip(query.candidates, scores)
        ]

    def top_candidates(
        self, tokens: Sequence[str], mask_index: int, n: int
    ) -> list[ScoredCandidate]:
        body = self._post(
            "/v1/topn",
            {"tokens": list(tokens), "mask_index": mask_index, "topn": n},
        )
        cands = body.get("candidates")
        scores = body.get("scores")
        if not isinstance(cands, list) or not isinstance(scores, list):
            raise ContractError("/v1/topn: response lacks `candidates`/`scores` lists")
        if len(cands) != len(scores):
            raise ContractError(
                f"/v1/topn: {len(cands)} candidates but {len(scores)} scores"
            )
        out = []
        for c, s in zip(cands, scores):
            if not isinstance(c, str):
                raise ContractError(f"/v1/topn: non-string candidate {c!r}")
            if not isinstance(s, (int, float)) or isinstance(s, bool) or math.isnan(s) or not 0 <= s <= 1:
                raise ContractError(f"/v1/topn: invalid score {s!r}")
            out.append(ScoredCandidate(c, float(s)))
        return out

    def health(self) -> bool:
        try:
            resp = self._session.get(self.endpoint + "/v1/health", timeout=self.timeout)
        except requests.RequestException:
            return False
        return resp.status_code == 200


def _error_message(resp: requests.Response) -> str:
    try:
        body = resp.json()
        if isinstance(body, dict) and isinstance(body.get("error"), str):
            return body["error"]
    except ValueError:
        pass
    return resp.text[:200]
