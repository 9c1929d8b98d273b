"""Pytest configuration: pin settings before any strand import."""

import os

# These must be set BEFORE any strand module is imported,
# because get_settings() will read them on first call.
os.environ.setdefault("LOG_LEVEL", "WARNING")
os.environ.setdefault("VALIDATE_ON_LOAD", "true")
os.environ.setdefault("DOT_RANKDIR", "LR")
os.environ.setdefault("BENCH_REPEAT", "1")
os.environ.setdefault("BENCH_SEED", "0")
