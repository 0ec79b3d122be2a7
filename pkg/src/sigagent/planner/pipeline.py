"""Stage-one planning: decomposition, tiered retrieval-augmented planning, refinement."""

from __future__ import annotations

import json
import logging
import re
from collections import Counter
from dataclasses import asdict, dataclass

from ..errors import CyclicPlanError, DecompositionParseError, EmptyIndex, PipelineAborted, SigAgentError
from ..provider.base import ChatRequest
from ..retrieval import HopContext, VectorIndex, retrieve_with_context
from .memory import AgentMemory
from .prompts import DECOMPOSE_EXAMPLE, DECOMPOSE_FORMAT, RATING_RUBRIC, StructuredPrompt
from .types import OUT_OF_SCOPE, ParadigmKind, SolutionRecord, SpRequest, Subtask, SubtaskChain, Tier

logger = logging.getLogger(__name__)

FINAL_MARKER = "FINAL:"

_ITEM = re.compile(r"(\d+)\s*[.)]\s+(.+?)\s*\(\s*depends?(?:\s+on)?\s*:\s*([^)]*)\)", re.S | re.I)
_INT = re.compile(r"\d+")


@dataclass
class PlannerConfig:
    top_k: int = 3
    decompose_top_k: int = 3
    max_hops: int = 3
    simple_threshold: float = 0.6
    moderate_threshold: float = 0.3
    max_attempts: int = 2
    temperature: float = 0.0
    max_tokens: int = 1024


def parse_decomposition(reply: str) -> list[Subtask]:
    """Parse ``N. description (depends: ...)`` items. Raises DecompositionParseError."""
    items = _ITEM.findall(reply)
    if not items:
        raise DecompositionParseError("no numbered '(depends: ...)' items found")
    subtasks = []
    ids = [num for num, _, _ in items]
    if len(set(ids)) != len(ids):
        raise DecompositionParseError("duplicate subtask numbers")
    for num, desc, deps in items:
        dep_ids = frozenset(_INT.findall(deps))
        unknown = dep_ids - set(ids)
        if unknown:
            raise DecompositionParseError(f"subtask {num} depends on unknown {sorted(unknown)}")
        if num in dep_ids:
            raise DecompositionParseError(f"subtask {num} depends on itself")
        subtasks.append(Subtask(num, " ".join(desc.split()), dep_ids))
    return subtasks


def topological_chain(subtasks: list[Subtask]) -> SubtaskChain:
    """Order subtasks so dependencies come first, keeping the reply order among ready items."""
    remaining = list(subtasks)
    done: set[str] = set()
    ordered = []
    while remaining:
        ready = next((s for s in remaining if s.depends_on <= done), None)
        if ready is None:
            raise CyclicPlanError("cyclic dependencies among subtasks " + ", ".join(s.id for s in remaining))
        ordered.append(ready)
        done.add(ready.id)
        remaining.remove(ready)
    return SubtaskChain(ordered)


def parse_paradigm(reply: str) -> tuple[ParadigmKind, str] | None:
    """First paradigm name mentioned in the reply and the text after it."""
    best = None
    for kind in ParadigmKind:
        m = re.search(re.escape(kind.value), reply, re.I)
        if m and (best is None or m.start() < best[1].start()):
            best = (kind, m)
    if best is None:
        return None
    kind, m = best
    justification = reply[m.end():].strip().lstrip(":-– ").splitlines()
    return kind, (justification[0].strip() if justification else "")


class Planner:
    """Runs the planning stage against one provider, knowledge index and memory.

    ``ledger`` counts provider calls and retrieval calls per operation.
    """

    def __init__(self, provider, knowledge: VectorIndex, memory: AgentMemory | None = None,
                 config: PlannerConfig | None = None):
        self.provider = provider
        self.knowledge = knowledge
        self.memory = memory or AgentMemory()
        self.config = config or PlannerConfig()
        self.ledger: Counter[str] = Counter()

    # -- plumbing -----------------------------------------------------------

    def _chat(self, tag: str, prompt: str) -> str:
        self.ledger[f"provider.{tag}"] += 1
        req = ChatRequest.simple(prompt, temperature=self.config.temperature,
                                 max_tokens=self.config.max_tokens, tag=tag)
        return self.provider.chat(req)

    def _search(self, tag: str, query: str, top_k: int):
        self.ledger[f"retrieval.{tag}"] += 1
        return self.knowledge.search(query, top_k)

    # -- decomposition ---------------------------------------------------------

    def decompose(self, request: SpRequest) -> SubtaskChain:
        try:
            hits = self._search("decompose", request.goal, self.config.decompose_top_k)
        except EmptyIndex:
            hits = []
        knowledge = "\n".join(f"[{h.doc_id}] {h.doc.text}" for h in hits)
        prompt = StructuredPrompt(
            instruction="Decompose the signal processing request into ordered subtasks with explicit dependencies.",
            expert_knowledge=knowledge,
            reasoning_examples=DECOMPOSE_EXAMPLE,
            question=f"Request: {request.goal}\nConstraints: {request.describe_constraints()}",
            response_format=DECOMPOSE_FORMAT,
            titles={"Expert Knowledge": "SP Domain Knowledge"},
        ).render()
        last_err = None
        for attempt in range(self.config.max_attempts):
            text = prompt if attempt == 0 else (
                prompt + f"\nYour previous reply could not be parsed ({last_err}). Follow the response format exactly.")
            reply = self._chat("decompose", text)
            try:
                subtasks = parse_decomposition(reply)
            except DecompositionParseError as exc:
                last_err = exc
                logger.info("decomposition attempt %d unparseable: %s", attempt + 1, exc)
                continue
            return topological_chain(subtasks)
        raise DecompositionParseError(f"unparseable decomposition after {self.config.max_attempts} attempts: {last_err}")

    # -- complexity --------------------------------------------------------------

    def retrieval_signal(self, description: str) -> tuple[Tier, float]:
        try:
            hits = self._search("assess", description, 1)
        except EmptyIndex:
            return Tier.Complex, 0.0
        score = hits[0].score
        if score >= self.config.simple_threshold:
            return Tier.Simple, score
        if score >= self.config.moderate_threshold:
            return Tier.Moderate, score
        return Tier.Complex, score

    def assess_complexity(self, subtask: Subtask) -> Tier:
        if not subtask.description:
            raise ValueError("subtask description must be non-empty")
        signal, _ = self.retrieval_signal(subtask.description)
        prompt = StructuredPrompt(
            instruction=RATING_RUBRIC,
            question=f"Subtask: {subtask.description}",
            response_format="A single integer: 1, 2 or 3.",
        ).render()
        reply = self._chat("rate", prompt)
        m = _INT.search(reply)
        if m is None:
            logger.warning("unparseable self-rating %r for subtask %s; using retrieval signal", reply, subtask.id)
            return signal
        rating = Tier(min(3, max(1, int(m.group()))))
        return max(signal, rating)

    # -- tiered planning ------------------------------------------------------------

    def _plan_prompt(self, subtask: Subtask, knowledge: str = "") -> str:
        return StructuredPrompt(
            instruction="Write a concrete, executable plan for this signal processing subtask.",
            expert_knowledge=knowledge,
            question=f"Subtask: {subtask.description}",
            response_format="A short numbered list of steps.",
        ).render()

    def plan_simple(self, subtask: Subtask) -> SolutionRecord:
        reply = self._chat("plan", self._plan_prompt(subtask))
        return SolutionRecord(subtask.id, ParadigmKind.PromptReasoning, reply.strip(), stop_reason="direct")

    def plan_single_hop(self, subtask: Subtask) -> SolutionRecord:
        try:
            hits = self._search("plan", subtask.description, self.config.top_k)
        except EmptyIndex:
            logger.warning("empty knowledge index; planning subtask %s without retrieval", subtask.id)
            rec = self.plan_simple(subtask)
            rec.flags.append("degraded")
            rec.retrieval_calls = 1
            return rec
        knowledge = "\n".join(f"[{h.doc_id}] {h.doc.text}" for h in hits)
        reply = self._chat("plan", self._plan_prompt(subtask, knowledge))
        return SolutionRecord(subtask.id, ParadigmKind.PromptReasoning, reply.strip(),
                              evidence=[(h.doc_id, 1) for h in hits], hops_used=1, retrieval_calls=1,
                              stop_reason="single_hop")

    def plan_multi_hop(self, subtask: Subtask, max_hops: int | None = None) -> SolutionRecord:
        max_hops = self.config.max_hops if max_hops is None else max_hops
        if max_hops < 1:
            raise ValueError("max_hops must be >= 1")
        q = subtask.description
        context = HopContext()
        evidence: list[tuple[str, int]] = []
        trace = []
        answer = ""
        stop = "max_hops"
        calls = 0
        for hop in range(1, max_hops + 1):
            self.ledger["retrieval.plan"] += 1
            calls += 1
            try:
                hits = retrieve_with_context(q, context, self.knowledge, self.config.top_k)
            except EmptyIndex:
                logger.warning("empty knowledge index; planning subtask %s without retrieval", subtask.id)
                rec = self.plan_simple(subtask)
                rec.flags.append("degraded")
                rec.retrieval_calls = calls
                return rec
            trace.append({"hop": hop, "context_docs": [d.doc_id for d in context.documents],
                          "context_answers": len(context.answers), "retrieved": [h.doc_id for h in hits]})
            prompt = StructuredPrompt(
                instruction=("Solve the subtask step by step using the accumulated context and the new evidence. "
                             f"When the solution is complete and grounded, begin your reply with '{FINAL_MARKER}'."),
                expert_knowledge="\n".join(f"[{h.doc_id}] {h.doc.text}" for h in hits),
                reasoning_examples=(f"Accumulated context:\n{context.render()}" if not context.is_empty() else ""),
                question=f"Subtask: {q}",
                response_format=f"Either an intermediate answer, or '{FINAL_MARKER} <complete plan>'.",
                titles={"Expert Knowledge": "New Evidence", "Reasoning Examples": "Context"},
            ).render()
            answer = self._chat("hop", prompt).strip()
            evidence += [(h.doc_id, hop) for h in hits]
            # c_{i+1}: all documents so far, then all answers so far
            context.documents.extend(h.doc for h in hits)
            context.answers.append(answer)
            if FINAL_MARKER in answer:
                stop = "final"
                break
            if hop > 1 and not hits:
                stop = "stable"
                break
        rec = SolutionRecord(subtask.id, ParadigmKind.PromptReasoning, _strip_final(answer), evidence=evidence,
                             hops_used=len(trace), retrieval_calls=calls, stop_reason=stop, trace=trace)
        if stop == "max_hops":
            rec.flags.append("unconverged")
        return rec

    def plan(self, subtask: Subtask, tier: Tier) -> SolutionRecord:
        if tier is Tier.Simple:
            return self.plan_simple(subtask)
        if tier is Tier.Moderate:
            return self.plan_single_hop(subtask)
        return self.plan_multi_hop(subtask)

    # -- refinement -------------------------------------------------------------------

    def refine(self, record: SolutionRecord, request: SpRequest) -> SolutionRecord:
        if not record.plan_text:
            raise ValueError("record has no plan text to refine")
        prompt = StructuredPrompt(
            instruction=("Compare the current solution with the alternative solution paradigms below and pick the "
                         "most appropriate one under the request constraints."),
            expert_knowledge=self.memory.describe(),
            question=(f"Current paradigm: {record.paradigm.value}\nCurrent plan:\n{record.plan_text}\n"
                      f"Constraints: {request.describe_constraints()}"),
            response_format="<ParadigmName>: <one-line justification>",
            titles={"Expert Knowledge": "Agent Memory"},
        ).render()
        for attempt in range(self.config.max_attempts):
            reply = self._chat("refine", prompt if attempt == 0 else
                               prompt + "\nReply must start with one of: " + ", ".join(k.value for k in ParadigmKind))
            parsed = parse_paradigm(reply)
            if parsed is None or parsed[0] not in self.memory:
                continue
            kind, why = parsed
            if kind in OUT_OF_SCOPE:
                record.notes.append(f"{kind.value} selected but not executable in this deployment "
                                    f"(no code sandbox or pretrained weights); using PromptReasoning")
                kind = ParadigmKind.PromptReasoning
            elif why:
                record.notes.append(why)
            record.paradigm = kind
            return record
        record.flags.append("unrefined")
        return record

    # -- full stage --------------------------------------------------------------------

    def run_pipeline(self, request: SpRequest) -> dict:
        report = {"request": request.to_dict(), "config": asdict(self.config), "chain": [], "status": "running"}
        try:
            chain = self.decompose(request)
            report["chain"] = chain.to_dict()
            for i, subtask in enumerate(chain):
                subtask.complexity = self.assess_complexity(subtask)
                record = self.plan(subtask, subtask.complexity)
                subtask.solution = self.refine(record, request)
                report["chain"][i] = subtask.to_dict()
        except (SigAgentError, ValueError) as exc:
            report["status"] = "aborted"
            report["error"] = f"{type(exc).__name__}: {exc}"
            report["ledger"] = dict(sorted(self.ledger.items()))
            raise PipelineAborted(str(exc), report) from exc
        report["status"] = "ok"
        report["ledger"] = dict(sorted(self.ledger.items()))
        return report


def _strip_final(answer: str) -> str:
    i = answer.find(FINAL_MARKER)
    return answer[i + len(FINAL_MARKER):].strip() if i >= 0 else answer


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def run_pipeline(request: SpRequest, knowledge: VectorIndex, memory: AgentMemory, provider,
                 config: PlannerConfig | None = None) -> dict:
    return Planner(provider, knowledge, memory, config).run_pipeline(request)
