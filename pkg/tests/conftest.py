import pathlib

import pytest

from popcert.trs import TRS, parse_trs, parse_term_in

CORPUS = pathlib.Path(__file__).parent / "corpus"


def load(name: str) -> TRS:
    if not name.endswith(".trs"):
        name += ".trs"
    return parse_trs((CORPUS / name).read_text())


def t(trs, text):
    """Shorthand: parse one term against a system's signature."""
    return parse_term_in(trs, text)


@pytest.fixture(scope="session")
def halfbits():
    return load("halfbits.trs")


@pytest.fixture(scope="session")
def exponential():
    return load("exponential.trs")


@pytest.fixture(scope="session")
def table():
    return load("table.trs")


@pytest.fixture(scope="session")
def division():
    return load("division.trs")


def halfbits_params():
    """Hand-built certificate parameters for the halfbits system."""
    from popcert.orders import ArgumentFiltering, OrderParams, Precedence, SafeMapping

    rank = {"0": 0, "s": 0, "c1": 0, "c2": 0, "c3": 0, "c4": 0,
            "half": 1, "bits": 1, "half#": 1, "bits#": 1}
    safe = {"half": (), "half#": (), "bits#": (), "s": (1,)}
    return OrderParams(
        Precedence(rank),
        SafeMapping(safe),
        ArgumentFiltering({"half": 1}),
        frozenset({"half", "bits", "half#", "bits#"}),
    )


def exponential_params():
    """Parameters that orient the exponential system rule-by-rule."""
    from popcert.orders import ArgumentFiltering, OrderParams, Precedence, SafeMapping

    rank = {"exp": 6, "g": 5, "dup1": 4, "dup2": 3, "e": 2, "pr": 1, "s": 1, "0": 0}
    safe = {"exp": (), "g": ()}
    return OrderParams(
        Precedence(rank),
        SafeMapping(safe),
        ArgumentFiltering({}),
        frozenset({"exp", "e", "g", "dup1", "dup2"}),
    )
