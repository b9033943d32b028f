"""Shared pytest hooks; the tests themselves import oracles from helpers."""
