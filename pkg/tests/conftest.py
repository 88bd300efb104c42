import pytest

from memotrs import parse_grsr, parse_program
from memotrs.corpus import FUNCTIONS, PROGRAMS


@pytest.fixture(scope="session")
def programs():
    return {name: parse_program(text) for name, text in PROGRAMS.items()}


@pytest.fixture(scope="session")
def functions():
    return {name: parse_grsr(text) for name, text in FUNCTIONS.items()}
