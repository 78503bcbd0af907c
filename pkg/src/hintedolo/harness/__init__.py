"""Experiment runner, audits, bound evaluators, persistence and CLI."""
