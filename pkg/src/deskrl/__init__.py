"""Desk-scale multi-task conservative Q-learning with offline and online fine-tuning."""

__version__ = "0.1.0"
