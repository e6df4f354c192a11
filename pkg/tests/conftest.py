import numpy as np
import pytest

from gaugehubo.hubo import HuboPolynomial, parse_instance

# Worked example: four 4-spin terms over eight variables, written in the
# order that encodes the intended embedding (1-based in the file format).
WORKED_EXAMPLE_TEXT = "vars 8\n-1 1 3 5 4\n-1 2 4 6 3\n-1 1 8 5 7\n-1 2 7 6 8\n"

# The four gauge operators the mapping must produce (1-based link labels).
WORKED_EXAMPLE_SITES = [
    frozenset({4, 6, 8, 5}),
    frozenset({1, 8, 2, 4}),
    frozenset({3, 5, 7, 6}),
    frozenset({1, 2, 3, 7}),
]


@pytest.fixture
def worked_example() -> HuboPolynomial:
    return parse_instance(WORKED_EXAMPLE_TEXT)


def random_polynomial(rng: np.random.Generator, n_vars: int, n_terms: int,
                      max_order: int = 3) -> HuboPolynomial:
    terms = []
    for _ in range(n_terms):
        order = int(rng.integers(1, max_order + 1))
        vs = rng.choice(n_vars, size=order, replace=False)
        terms.append((float(rng.normal()), [int(v) for v in vs]))
    return HuboPolynomial.from_terms(n_vars, terms)
