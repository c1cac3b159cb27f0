"""Answer-quality metrics: ROUGE-N, ROUGE-L, BLEU, METEOR, embedding
cosine, and an LLM judge scoring a five-criteria rubric.

All lexical metrics operate on the shared word tokenization and are pure;
the judge and the semantic score follow the gateway/embedder contracts.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Sequence

from .embed import Embedder, cosine
from .genclient import ChatClient, ChatMessage, ModelSpec
from .templating import substitute_once
from .tokenization import tokenize

__all__ = [
    "tokenize",
    "RougeScore",
    "rouge_n",
    "rouge_l",
    "bleu",
    "meteor",
    "semantic_sim",
    "JudgeVerdict",
    "JudgeFormatError",
    "judge_evaluate",
    "MetricScores",
    "score_candidate",
]

TokenSeq = Sequence[str]

JUDGE_CRITERIA = ("relevancia", "acuracia", "completude", "clareza", "concisao")

_JUDGE_RETRY_REMINDER = (
    "Sua resposta anterior não estava no formato exigido. Responda SOMENTE com o "
    'objeto JSON {"relevancia": <int>, "acuracia": <int>, "completude": <int>, '
    '"clareza": <int>, "concisao": <int>, "rationale": "<texto>"}, '
    "com notas inteiras de 1 a 5 e nenhum texto fora do JSON."
)

# Cap on alignment-search nodes; past it the best alignment found so far
# wins (only reachable on pathologically repetitive inputs).
_ALIGN_NODE_BUDGET = 200_000


# ---------------------------------------------------------------------------
# ROUGE
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


def _ngram_counts(tokens: TokenSeq, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def rouge_n(cand: TokenSeq, ref: TokenSeq, n: int) -> RougeScore:
    """Clipped n-gram overlap: precision over candidate n-grams, recall over
    reference n-grams, F1 harmonic mean."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cand_counts = _ngram_counts(cand, n)
    ref_counts = _ngram_counts(ref, n)
    total_cand = sum(cand_counts.values())
    total_ref = sum(ref_counts.values())
    if total_cand == 0 or total_ref == 0:
        return RougeScore(0.0, 0.0, 0.0)
    matches = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
    precision = matches / total_cand
    recall = matches / total_ref
    return RougeScore(precision, recall, _f1(precision, recall))


def _lcs_len(a: TokenSeq, b: TokenSeq) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, 1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(cand: TokenSeq, ref: TokenSeq) -> RougeScore:
    """Longest-common-subsequence overlap at token level."""
    if not cand or not ref:
        return RougeScore(0.0, 0.0, 0.0)
    lcs = _lcs_len(cand, ref)
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return RougeScore(precision, recall, _f1(precision, recall))


# ---------------------------------------------------------------------------
# BLEU
# ---------------------------------------------------------------------------


def bleu(cand: TokenSeq, ref: TokenSeq) -> float:
    """Sentence BLEU with clipped precisions up to order min(4, |cand|).

    p1 is unsmoothed (zero unigram matches score 0); higher orders with
    zero matches use add-one smoothing (m+1)/(c+1). Uniform weights, and
    a brevity penalty exp(1 - |ref|/|cand|) when the candidate is shorter
    than the reference.
    """
    if not cand:
        return 0.0
    max_order = min(4, len(cand))
    log_sum = 0.0
    for n in range(1, max_order + 1):
        cand_counts = _ngram_counts(cand, n)
        ref_counts = _ngram_counts(ref, n)
        total = sum(cand_counts.values())
        matches = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
        if n == 1:
            if matches == 0:
                return 0.0
            p = matches / total
        else:
            p = matches / total if matches > 0 else (matches + 1) / (total + 1)
        log_sum += math.log(p)
    geo_mean = math.exp(log_sum / max_order)
    if len(cand) < len(ref):
        bp = math.exp(1 - len(ref) / len(cand))
    else:
        bp = 1.0
    return bp * geo_mean


# ---------------------------------------------------------------------------
# METEOR
# ---------------------------------------------------------------------------


def meteor(
    cand: TokenSeq, ref: TokenSeq, stemmer: Callable[[str], str] | None = None
) -> float:
    """Unigram-alignment metric with a fragmentation penalty.

    Matching is staged: exact surface matches first, then (when a stemmer
    is supplied) stem matches over what remains; among maximal-match
    alignments the one with fewest chunks is chosen. With m matches,
    P = m/|cand|, R = m/|ref|, F = PR/(0.9P + 0.1R), and the score is
    F * (1 - 0.5 * (chunks/m)^3).
    """
    if not cand or not ref:
        return 0.0
    matches, chunks = _best_alignment(cand, ref, stemmer)
    if matches == 0:
        return 0.0
    precision = matches / len(cand)
    recall = matches / len(ref)
    f_mean = precision * recall / (0.9 * precision + 0.1 * recall)
    penalty = 0.5 * (chunks / matches) ** 3
    return f_mean * (1.0 - penalty)


def _best_alignment(
    cand: TokenSeq, ref: TokenSeq, stemmer: Callable[[str], str] | None
) -> tuple[int, int]:
    """(matches, chunks) of the staged maximal alignment with fewest chunks.

    The match count is fixed by the stage quotas (per-surface exact
    matches, then per-stem-group matches over the residual); a depth-first
    search over pairings minimizes the chunk count, pruning on the current
    chunk total and on quota feasibility.
    """
    cand = list(cand)
    ref = list(ref)
    cand_counts = Counter(cand)
    ref_counts = Counter(ref)
    exact_quota = {
        t: min(c, ref_counts[t]) for t, c in cand_counts.items() if t in ref_counts
    }

    stems_c = [stemmer(t) for t in cand] if stemmer else None
    stems_r = [stemmer(t) for t in ref] if stemmer else None
    stem_quota: dict[str, int] = {}
    if stemmer:
        residual_c: Counter = Counter()
        for token, count in cand_counts.items():
            left = count - exact_quota.get(token, 0)
            if left:
                residual_c[stemmer(token)] += left
        residual_r: Counter = Counter()
        for token, count in ref_counts.items():
            left = count - exact_quota.get(token, 0)
            if left:
                residual_r[stemmer(token)] += left
        stem_quota = {
            g: min(c, residual_r[g]) for g, c in residual_c.items() if g in residual_r
        }

    total_matches = sum(exact_quota.values()) + sum(stem_quota.values())
    if total_matches == 0:
        return 0, 0

    n_cand, n_ref = len(cand), len(ref)
    refs_by_surface: dict[str, list[int]] = {}
    for j, token in enumerate(ref):
        refs_by_surface.setdefault(token, []).append(j)
    refs_by_group: dict[str, list[int]] = {}
    if stemmer:
        for j, g in enumerate(stems_r):
            refs_by_group.setdefault(g, []).append(j)

    exact_rem = dict(exact_quota)
    stem_rem = dict(stem_quota)
    group_exact_rem: Counter = Counter()
    if stemmer:
        for token, q in exact_quota.items():
            group_exact_rem[stemmer(token)] += q
    cand_supply = Counter(cand)
    group_supply = Counter(stems_c) if stemmer else Counter()
    ref_avail = Counter(ref)
    ref_group_avail = Counter(stems_r) if stemmer else Counter()
    used = bytearray(n_ref)

    best = total_matches + 1  # any maximal alignment has <= total_matches chunks
    nodes = 0

    def group_ref_ok(g: str) -> bool:
        return ref_group_avail[g] >= group_exact_rem[g] + stem_rem.get(g, 0)

    def dfs(i: int, last_i: int, last_j: int, chunks: int, matched: int) -> None:
        nonlocal best, nodes
        if chunks >= best:
            return
        remaining = total_matches - matched
        if remaining == 0:
            best = chunks
            return
        if n_cand - i < remaining:
            return
        nodes += 1
        budget_left = nodes < _ALIGN_NODE_BUDGET

        token = cand[i]
        group = stems_c[i] if stemmer else None
        cont_j = last_j + 1 if last_i == i - 1 else -1

        cand_supply[token] -= 1
        if stemmer:
            group_supply[group] -= 1

        def try_match(j: int, exact: bool) -> None:
            added = 0 if j == cont_j else 1
            if chunks + added >= best:
                return
            other = ref[j]
            used[j] = 1
            ref_avail[other] -= 1
            if exact:
                exact_rem[token] -= 1
            else:
                stem_rem[group] -= 1
            if stemmer:
                g_ref = stems_r[j]
                ref_group_avail[g_ref] -= 1
                if exact:
                    group_exact_rem[group] -= 1
            ok = ref_avail[other] >= exact_rem.get(other, 0) and (
                not stemmer or group_ref_ok(stems_r[j])
            )
            if ok:
                dfs(i + 1, i, j, chunks + added, matched + 1)
            if stemmer:
                ref_group_avail[stems_r[j]] += 1
                if exact:
                    group_exact_rem[group] += 1
            if exact:
                exact_rem[token] += 1
            else:
                stem_rem[group] += 1
            ref_avail[other] += 1
            used[j] = 0

        # Continuation first: extending the current chunk costs nothing.
        if cont_j >= 0 and cont_j < n_ref and not used[cont_j]:
            if ref[cont_j] == token and exact_rem.get(token, 0) > 0:
                try_match(cont_j, exact=True)
            elif (
                stemmer
                and ref[cont_j] != token
                and stems_r[cont_j] == group
                and stem_rem.get(group, 0) > 0
            ):
                try_match(cont_j, exact=False)
        if budget_left or best > total_matches:
            if exact_rem.get(token, 0) > 0:
                for j in refs_by_surface[token]:
                    if not used[j] and j != cont_j:
                        try_match(j, exact=True)
                        if not (nodes < _ALIGN_NODE_BUDGET or best > total_matches):
                            break
            if stemmer and stem_rem.get(group, 0) > 0:
                for j in refs_by_group.get(group, []):
                    if not used[j] and j != cont_j and ref[j] != token:
                        try_match(j, exact=False)
                        if not (nodes < _ALIGN_NODE_BUDGET or best > total_matches):
                            break
            # Skip this candidate position if the remaining supply still
            # covers every quota.
            if cand_supply[token] >= exact_rem.get(token, 0) and (
                not stemmer
                or group_supply[group] >= group_exact_rem[group] + stem_rem.get(group, 0)
            ):
                dfs(i + 1, last_i, last_j, chunks, matched)

        cand_supply[token] += 1
        if stemmer:
            group_supply[group] += 1

    dfs(0, -2, -2, 0, 0)
    if best > total_matches:
        # Budget exhausted before completing any alignment: every maximal
        # matching has at most one chunk per match.
        best = total_matches
    return total_matches, best


# ---------------------------------------------------------------------------
# Embedding similarity
# ---------------------------------------------------------------------------


def semantic_sim(embedder: Embedder, cand_text: str, ref_text: str) -> float:
    """Cosine of the two text embeddings under the configured provider."""
    return cosine(embedder.embed(cand_text), embedder.embed(ref_text))


# ---------------------------------------------------------------------------
# LLM judge
# ---------------------------------------------------------------------------


class JudgeFormatError(Exception):
    """The judge failed to produce a parseable verdict twice in a row."""


@dataclass(frozen=True)
class JudgeVerdict:
    relevancia: int
    acuracia: int
    completude: int
    clareza: int
    concisao: int
    rationale: str

    def __post_init__(self) -> None:
        for name in JUDGE_CRITERIA:
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= 5:
                raise ValueError(f"{name} must be an integer in [1, 5], got {value!r}")

    @property
    def criteria(self) -> tuple[int, ...]:
        return tuple(getattr(self, name) for name in JUDGE_CRITERIA)

    @property
    def normalized(self) -> float:
        """Linear map of the criteria mean from [1, 5] onto [0, 1]."""
        return (sum(self.criteria) / len(self.criteria) - 1) / 4


def load_judge_template() -> str:
    return resources.files("sabia").joinpath("data/judge_prompt.txt").read_text("utf-8")


def _coerce_score(value: object) -> int | None:
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return None


def _parse_verdict(text: str) -> JudgeVerdict | None:
    candidates = [text.strip()]
    start, end = text.find("{"), text.rfind("}")
    if start != -1 and end > start:
        candidates.append(text[start : end + 1])
    for blob in candidates:
        try:
            obj = json.loads(blob)
        except json.JSONDecodeError:
            continue
        if not isinstance(obj, dict):
            continue
        scores = {}
        for name in JUDGE_CRITERIA:
            score = _coerce_score(obj.get(name))
            if score is None or not 1 <= score <= 5:
                scores = None
                break
            scores[name] = score
        if scores is None:
            continue
        rationale = obj.get("rationale")
        if not isinstance(rationale, str):
            continue
        return JudgeVerdict(rationale=rationale, **scores)
    return None


def judge_evaluate(
    client: ChatClient,
    judge_spec: ModelSpec,
    question: str,
    ref_answer: str,
    cand_answer: str,
    template: str | None = None,
    max_tokens: int | None = 512,
) -> JudgeVerdict:
    """Score a candidate answer against the reference with the judge model.

    The judge must reply with a JSON verdict; one re-ask with a format
    reminder is allowed before giving up.
    """
    for label, value in (("question", question), ("reference", ref_answer), ("candidate", cand_answer)):
        if not value.strip():
            raise ValueError(f"{label} must be nonempty")
    prompt = substitute_once(
        template if template is not None else load_judge_template(),
        {"question": question, "reference": ref_answer, "candidate": cand_answer},
    )
    messages = [ChatMessage("user", prompt)]
    reply = client.chat_complete(judge_spec, messages, temperature=0.0, max_tokens=max_tokens)
    verdict = _parse_verdict(reply.text)
    if verdict is not None:
        return verdict
    retry_messages = messages + [
        ChatMessage("assistant", reply.text or "(vazio)"),
        ChatMessage("user", _JUDGE_RETRY_REMINDER),
    ]
    second = client.chat_complete(judge_spec, retry_messages, temperature=0.0, max_tokens=max_tokens)
    verdict = _parse_verdict(second.text)
    if verdict is None:
        raise JudgeFormatError(
            f"judge {judge_spec.model_id} replied unparseably twice; "
            f"last reply: {second.text[:200]!r}"
        )
    return verdict


# ---------------------------------------------------------------------------
# Score bundle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MetricScores:
    rouge1: float
    rouge2: float
    rougeL: float
    bleu: float
    sbert: float
    meteor: float
    judge: float

    def __post_init__(self) -> None:
        for name in ("rouge1", "rouge2", "rougeL", "bleu", "meteor", "judge"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} out of range [0, 1]: {value!r}")
        if not -1.0 <= self.sbert <= 1.0:
            raise ValueError(f"sbert out of range [-1, 1]: {self.sbert!r}")


def score_candidate(embedder: Embedder, cand_text: str, ref_text: str) -> dict[str, float]:
    """Every non-judge metric for one candidate/reference pair, as F1 or score."""
    cand = tokenize(cand_text)
    ref = tokenize(ref_text)
    return {
        "rouge1": rouge_n(cand, ref, 1).f1,
        "rouge2": rouge_n(cand, ref, 2).f1,
        "rougeL": rouge_l(cand, ref).f1,
        "bleu": bleu(cand, ref),
        "sbert": semantic_sim(embedder, cand_text, ref_text),
        "meteor": meteor(cand, ref),
    }
