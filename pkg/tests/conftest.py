"""Shared fixtures and construction helpers for the test suite."""

from __future__ import annotations

import shlex
import sys
from pathlib import Path

import numpy as np
import pytest

from xlsearch.corpus import CodeSample
from xlsearch.sss import LanguageRunner, RunnerConfig
from xlsearch.trainer import EncoderParams

FIXTURE_ROOT = Path(__file__).parent / "fixtures" / "dataset"


def toy_runner(timeout_s: float = 5.0, max_output_bytes: int = 1 << 20) -> RunnerConfig:
    template = f"{shlex.quote(sys.executable)} -m xlsearch.toy {{file}}"
    runner = LanguageRunner(
        template, timeout_s=timeout_s, max_output_bytes=max_output_bytes
    )
    return RunnerConfig(languages={"alpha": runner, "beta": runner, "toy": runner})


def vec_sample(sample_id: str, language: str = "alpha",
               problem_id: str = "p") -> CodeSample:
    """A minimal sample whose text is its id; pairs with a TableProvider."""
    return CodeSample(
        id=sample_id, language=language, problem_id=problem_id, text=sample_id
    )


def toy_sample(name: str, source: str, structure=("int",),
               language: str = "toy") -> CodeSample:
    return CodeSample(
        id=name, language=language, problem_id="p", text=source,
        input_structure=tuple(structure) if structure else None,
    )


def linear_params(dim: int) -> EncoderParams:
    return EncoderParams(layers=[(np.eye(dim), np.zeros(dim))], activations=["linear"])


@pytest.fixture
def fixture_root() -> Path:
    return FIXTURE_ROOT
