"""Compact-LLM MEC offloading simulator and world-model-augmented PPO trainer."""

__version__ = "0.1.0"
