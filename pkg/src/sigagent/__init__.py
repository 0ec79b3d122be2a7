"""Agent framework for LLM-assisted signal processing tasks.

Stage one plans a request (decomposition, tiered retrieval-augmented
planning, paradigm refinement). Stage two executes with a rank-based
lossless codec, a hybrid LLM/DE parameter optimizer, and a radar feature
bank with a linear detector. Every model call can be served offline.
"""

__version__ = "0.1.0"
