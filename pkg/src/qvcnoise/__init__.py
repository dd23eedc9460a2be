"""Noisy variational quantum classifiers and partial-QEC resource estimates."""

__version__ = "0.1.0"
