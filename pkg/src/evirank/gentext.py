"""Stage 2: build the generation prompt from the query and evidence
passages, invoke a generation provider, and parse the cited paragraph it
returns into a validated GenText.

GenText is both the factuality yardstick for Stage 3 and the citation-rich
explanation shown next to search results. When generation keeps producing
text without resolvable citations, a deterministic extractive fallback
keeps the query alive.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyContext, GenerationFailed, NoValidSentences, ProviderFailure
from .evidence import ScoredPassage, split_sentences

DEFAULT_WORD_LIMIT = 64
DEFAULT_RETRIES = 2

# Accepted citation marker forms: (Reference: 123), (Reference: 123, 456),
# and several markers in one sentence.
_MARKER_RE = re.compile(r"\(Reference:\s*([^)]*)\)")
_ID_SPLIT_RE = re.compile(r"[,\s]+")

_DATA_DIR = Path(__file__).resolve().parent / "data"
_TEMPLATE_PATH = _DATA_DIR / "prompt_template.txt"


@dataclass(frozen=True)
class Prompt:
    """A fully rendered generation prompt."""

    query_text: str
    context_block: str
    instruction_block: str
    word_limit: int
    text: str


@dataclass(frozen=True)
class CitedSentence:
    """One sentence of GenText with the references it cites.

    valid means the sentence cites at least one reference and every cited
    id resolves to a context passage.
    """

    text: str
    citations: frozenset[str]
    valid: bool


@dataclass
class GenText:
    """The generated (or fallback) reference text with per-sentence citations."""

    sentences: list[CitedSentence]
    raw: str
    word_count: int
    origin: str = "generated"  # or "fallback"
    embedding: np.ndarray | None = None
    warnings: list[str] = field(default_factory=list)

    def valid_sentences(self) -> list[CitedSentence]:
        return [s for s in self.sentences if s.valid]

    def valid_text(self) -> str:
        """Marker-stripped concatenation of the valid sentences; this is the
        text that gets embedded and used as the stance hypothesis."""
        return " ".join(s.text for s in self.sentences if s.valid)

    def citation_ids(self) -> set[str]:
        out: set[str] = set()
        for sentence in self.sentences:
            out |= sentence.citations
        return out


def load_template(path: str | Path | None = None) -> str:
    with open(path or _TEMPLATE_PATH, encoding="utf-8") as fh:
        return fh.read()


def format_context(context: list[ScoredPassage]) -> str:
    """Render passages, highest sigma first, each closed by its reference."""
    ordered = sorted(
        context, key=lambda sp: (-sp.sigma, sp.passage.ref_id, sp.passage.ordinal)
    )
    parts = []
    for sp in ordered:
        sentence = sp.passage.sentence.strip().rstrip(".!?")
        parts.append(f"{sentence} (Reference: {sp.passage.ref_id}).")
    return " ".join(parts)


def build_prompt(
    query_text: str,
    context: list[ScoredPassage],
    word_limit: int = DEFAULT_WORD_LIMIT,
    template: str | None = None,
) -> Prompt:
    """Render the prompt template; byte-identical for identical inputs."""
    if not context:
        raise EmptyContext("cannot build a prompt without evidence passages")
    if template is None:
        template = load_template()
    context_block = format_context(context)
    text = (
        template.replace("{query}", query_text)
        .replace("{context}", context_block)
        .replace("{word_limit}", str(word_limit))
    )
    after_context = template.split("{context}", 1)[1] if "{context}" in template else ""
    instruction_block = after_context.replace("{word_limit}", str(word_limit)).strip()
    return Prompt(
        query_text=query_text,
        context_block=context_block,
        instruction_block=instruction_block,
        word_limit=word_limit,
        text=text,
    )


def _parse_ids(marker_body: str) -> list[str]:
    ids = []
    for piece in _ID_SPLIT_RE.split(marker_body.strip()):
        piece = piece.strip().strip(".,;")
        if piece:
            ids.append(piece)
    return ids


def strip_markers(text: str) -> str:
    """Remove citation markers and tidy the whitespace left behind."""
    stripped = _MARKER_RE.sub("", text)
    stripped = re.sub(r"\s+([.,;:!?])", r"\1", stripped)
    return re.sub(r"\s+", " ", stripped).strip()


def parse_gentext(
    raw: str,
    context: list[ScoredPassage],
    origin: str = "generated",
    word_limit: int | None = None,
) -> GenText:
    """Split raw generated text into cited sentences and validate citations.

    The original raw string is stored untouched. Raises NoValidSentences
    when no sentence carries a citation that resolves to the context.
    """
    context_refs = {sp.passage.ref_id for sp in context}
    sentences = []
    for sentence_text in split_sentences(raw):
        ids: list[str] = []
        for marker_body in _MARKER_RE.findall(sentence_text):
            ids.extend(_parse_ids(marker_body))
        citations = frozenset(ids)
        valid = bool(citations) and citations <= context_refs
        sentences.append(
            CitedSentence(text=strip_markers(sentence_text), citations=citations, valid=valid)
        )
    if not any(s.valid for s in sentences):
        raise NoValidSentences(
            "no sentence carries a citation resolvable to the evidence context"
        )
    word_count = len(strip_markers(raw).split())
    warnings = []
    if word_limit is not None and word_count > 1.5 * word_limit:
        warnings.append(
            f"word_count {word_count} exceeds 1.5x the requested limit of {word_limit}"
        )
    return GenText(
        sentences=sentences,
        raw=raw,
        word_count=word_count,
        origin=origin,
        warnings=warnings,
    )


def generate(prompt: Prompt, gen, retries: int = DEFAULT_RETRIES,
             context: list[ScoredPassage] | None = None) -> str:
    """Call the generation provider and return raw text that parses into a
    valid GenText, retrying on malformed output.

    After `retries` additional attempts the call signals GenerationFailed so
    the caller can fall back to the extractive GenText.
    """
    if retries < 0:
        raise ValueError("retries must be >= 0")
    if context is None:
        context = []
    last_reason = "no attempt made"
    for _ in range(retries + 1):
        raw = gen.generate(prompt.text)
        if not raw or not raw.strip():
            last_reason = "provider returned empty text"
            continue
        try:
            parse_gentext(raw, context, word_limit=prompt.word_limit)
        except NoValidSentences as exc:
            last_reason = str(exc)
            continue
        return raw
    raise GenerationFailed(f"generation retries exhausted: {last_reason}")


def fallback_gentext(context: list[ScoredPassage],
                     limit: int = DEFAULT_WORD_LIMIT) -> GenText:
    """Extractive degraded-mode GenText: highest-sigma passages, each with
    its citation, greedily packed under the word limit (at least one)."""
    if not context:
        raise EmptyContext("fallback requires at least one evidence passage")
    ordered = sorted(
        context, key=lambda sp: (-sp.sigma, sp.passage.ref_id, sp.passage.ordinal)
    )
    parts = []
    words_used = 0
    for sp in ordered:
        sentence = sp.passage.sentence.strip().rstrip(".!?")
        n_words = len(sentence.split())
        if parts and words_used + n_words > limit:
            break
        parts.append(f"{sentence} (Reference: {sp.passage.ref_id}).")
        words_used += n_words
    raw = " ".join(parts)
    return parse_gentext(raw, context, origin="fallback", word_limit=limit)
