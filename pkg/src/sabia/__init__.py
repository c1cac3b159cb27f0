"""sabia: retrieval-augmented FAQ assistant and LLM evaluation bench."""

__version__ = "0.1.0"
