"""genlens: inspect, analyze, clean, and annotate LLM generation datasets."""

__version__ = "0.1.0"
