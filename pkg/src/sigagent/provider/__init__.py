"""Model backends: chat, next-token ranking, and text embedding."""

from .base import (
    Attachment,
    ChatProvider,
    ChatRequest,
    Message,
    RankedVocabulary,
    TokenPredictor,
    next_token_ranking,
)
from .embed import HashingEmbedder
from .ngram import NgramPredictor, train_from_texts, train_ngram
from .remote import RemoteConfig, RemoteProvider
from .scripted import FixtureEntry, ScriptedProvider
from .vocab import BYTE_TOKENS, Tokenizer, build_vocabulary

__all__ = [
    "Attachment", "ChatProvider", "ChatRequest", "Message", "RankedVocabulary", "TokenPredictor",
    "next_token_ranking", "HashingEmbedder", "NgramPredictor", "train_from_texts", "train_ngram",
    "RemoteConfig", "RemoteProvider", "FixtureEntry", "ScriptedProvider", "BYTE_TOKENS",
    "Tokenizer", "build_vocabulary",
]
