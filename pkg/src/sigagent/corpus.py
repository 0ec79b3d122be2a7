"""Seeded generator for the bundled proceedings-style text corpus.

The bundled ``data/corpus.txt`` is this generator's output for seed 2024;
``gen-data`` regenerates it byte-identically. Sentences are built from a
small phrase grammar so an n-gram predictor has real structure to learn.
"""

from __future__ import annotations

import random
from importlib import resources

SENTENCES_PER_BLOCK = 15

_SPEAKERS = ["The President", "The Commissioner", "The rapporteur", "The Council", "The committee",
             "My group", "The honourable Member", "The Presidency", "The Commission", "This House"]
_VERBS = ["supports", "welcomes", "rejects", "has examined", "cannot accept", "fully endorses",
          "would like to discuss", "has proposed", "calls for", "must consider", "intends to review",
          "has already adopted"]
_OBJECTS = ["the proposal", "the report", "the amendment", "the draft regulation", "the common position",
            "the annual budget", "the resolution", "the joint text", "the new directive", "the action plan",
            "the framework programme", "the agreement"]
_TOPICS = ["on fisheries", "on maritime safety", "on radar monitoring of coastal waters",
           "on energy markets", "on public health", "on the internal market", "on transport networks",
           "on environmental protection", "on regional development", "on consumer rights",
           "on research and innovation", "on data protection", "on the common agricultural policy",
           "on employment", "on external relations"]
_QUALIFIERS = ["as a matter of urgency", "in the coming months", "without further delay",
               "at first reading", "in close cooperation with the Member States", "before the end of the year",
               "in its present form", "with some reservations", "on behalf of the committee",
               "after a long debate"]
_OPENERS = ["Mr President,", "Madam President,", "Ladies and gentlemen,", "Commissioner,",
            "Mr President, ladies and gentlemen,"]
_ADJ = ["important", "difficult", "essential", "clear", "serious", "balanced", "necessary", "ambitious",
        "reasonable", "urgent"]
_NOUNS = ["question", "problem", "issue", "debate", "compromise", "step", "objective", "priority",
          "decision", "challenge"]
_NUMBERS = ["two", "three", "four", "five", "ten", "twelve", "fifteen", "twenty"]
_TIMES = ["years", "months", "weeks"]
_COUNTRIES = ["Portugal", "Finland", "Greece", "Ireland", "Denmark", "Austria", "Belgium", "Sweden",
              "Spain", "Italy", "France", "Germany"]


def _sentence(rng: random.Random) -> str:
    c = rng.choice
    kind = rng.randrange(10)
    if kind == 0:
        return f"{c(_OPENERS)} I would like to thank the rapporteur for this {c(_ADJ)} report."
    if kind == 1:
        return f"{c(_SPEAKERS)} {c(_VERBS)} {c(_OBJECTS)} {c(_TOPICS)} {c(_QUALIFIERS)}."
    if kind == 2:
        return f"This is a very {c(_ADJ)} {c(_NOUNS)} for the citizens of {c(_COUNTRIES)}."
    if kind == 3:
        return (f"We have been waiting for {c(_NUMBERS)} {c(_TIMES)} for {c(_OBJECTS)} "
                f"{c(_TOPICS)}, and the {c(_NOUNS)} remains {c(_ADJ)}.")
    if kind == 4:
        return f"The vote will take place tomorrow at {rng.randint(9, 12)} a.m."
    if kind == 5:
        return (f"In {c(_COUNTRIES)}, the {c(_NOUNS)} of {c(_OBJECTS)[4:]} is {c(_ADJ)}, "
                f"and {c(_SPEAKERS).lower()} {c(_VERBS)} it.")
    if kind == 6:
        return f"I believe that {c(_OBJECTS)} {c(_TOPICS)} is an {c(['important', 'essential', 'ambitious'])} {c(_NOUNS)}."
    if kind == 7:
        return f"Amendment No {rng.randint(1, 60)} {c(['is', 'is not', 'cannot be'])} acceptable to {c(_SPEAKERS).lower()}."
    if kind == 8:
        return f"{c(_SPEAKERS)} {c(_VERBS)} {c(_OBJECTS)}, but the {c(_NOUNS)} {c(_TOPICS)} is still {c(_ADJ)}."
    return "The debate is closed."


def generate_sentences(n: int, seed: int = 2024) -> list[str]:
    rng = random.Random(seed)
    return [_sentence(rng) for _ in range(n)]


def blocks(sentences: list[str], size: int = SENTENCES_PER_BLOCK) -> list[bytes]:
    """Group sentences into newline-joined blocks; a trailing partial block is kept."""
    return [("\n".join(sentences[i:i + size]) + "\n").encode("utf-8") for i in range(0, len(sentences), size)]


def bundled_sentences() -> list[str]:
    text = resources.files("sigagent.data").joinpath("corpus.txt").read_text(encoding="utf-8")
    return text.splitlines()


def split_corpus(sentences: list[str], n_test_blocks: int = 40) -> tuple[list[bytes], list[bytes]]:
    """Disjoint (train, test) block lists; test blocks come from the tail."""
    all_blocks = blocks(sentences)
    return all_blocks[:-n_test_blocks], all_blocks[-n_test_blocks:]
