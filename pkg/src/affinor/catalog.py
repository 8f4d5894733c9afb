"""Built-in fixtures exercising every branch of the verification suite.

Each entry carries the expected outcomes as plain data so the acceptance
suite can be table-driven; no fixture ships an untested expectation.
Sampling domains keep a 0.3 margin away from chart singularities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .chart_calculus import ManifoldSpec
from .expr_dsl import parse
from .submanifold_geometry import SubmanifoldSpec

__all__ = ["FixtureEntry", "list_fixtures", "get_fixture"]


@dataclass(frozen=True, eq=False)
class FixtureEntry:
    name: str
    description: str
    manifold: ManifoldSpec
    submanifold: SubmanifoldSpec | None
    expected: dict = field(default_factory=dict)


def _mat(rows, dim):
    return tuple(tuple(parse(src, dim) for src in row) for row in rows)


def _identity_rows(dim):
    return [["1" if i == j else "0" for j in range(dim)] for i in range(dim)]


def _manifold(name, dim, mu, affinor_rows, domain=None, metric_rows=None):
    return ManifoldSpec(
        name=name,
        dim=dim,
        mu=mu,
        metric=_mat(metric_rows or _identity_rows(dim), dim),
        affinor=_mat(affinor_rows, dim),
        domain=domain or [(-1.0, 1.0)] * dim,
    )


def _sub(name, dim, sources, ambient, domain=None):
    return SubmanifoldSpec(
        name=name,
        dim=dim,
        embedding=tuple(parse(s, dim) for s in sources),
        ambient=ambient,
        domain=domain or [(-1.0, 1.0)] * dim,
    )


J4_ROWS = [
    ["0", "-1", "0", "0"],
    ["1", "0", "0", "0"],
    ["0", "0", "0", "-1"],
    ["0", "0", "1", "0"],
]
PRODUCT_ROWS = [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "-1"]]
PHI5_ROWS = [
    ["0", "-1", "0", "0", "0"],
    ["1", "0", "0", "0", "0"],
    ["0", "0", "0", "-1", "0"],
    ["0", "0", "1", "0", "0"],
    ["0", "0", "0", "0", "0"],
]
NONPARALLEL_ROWS = [
    ["0", "-(1 + 0.1*x1)", "0", "0"],
    ["1 + 0.1*x1", "0", "0", "0"],
    ["0", "0", "0", "-1"],
    ["0", "0", "1", "0"],
]


@lru_cache(maxsize=1)
def _fixtures() -> dict[str, FixtureEntry]:
    kaehler = _manifold("kaehler_r4", 4, 1, J4_ROWS)
    product = _manifold("product_r3", 3, -1, PRODUCT_ROWS)
    cosym = _manifold("cosymplectic_r5", 5, 1, PHI5_ROWS)
    nonparallel = _manifold("nonparallel_r4", 4, 1, NONPARALLEL_ROWS)

    entries = [
        FixtureEntry(
            name="kaehler_r4",
            description="flat R^4 with the standard rotation affinor, mu=+1",
            manifold=kaehler,
            submanifold=None,
            expected={
                "compatible": True,
                "nondegenerate": True,
                "kernel_dim": None,
                "parallel": True,
                "family": "almost-Hermitian-like",
            },
        ),
        FixtureEntry(
            name="product_r3",
            description="flat R^3 with a product-style involution, mu=-1",
            manifold=product,
            submanifold=None,
            expected={
                "compatible": True,
                "nondegenerate": True,
                "kernel_dim": None,
                "parallel": True,
                "family": "almost-product-like",
            },
        ),
        FixtureEntry(
            name="cosymplectic_r5",
            description="flat R^5 with a corank-1 rotation affinor, mu=+1",
            manifold=cosym,
            submanifold=None,
            expected={
                "compatible": True,
                "nondegenerate": False,
                "kernel_dim": 1,
                "parallel": True,
                "family": "contact-like-degenerate",
            },
        ),
        FixtureEntry(
            name="flat_cr_r3_in_c2",
            description="coordinate 3-plane in kaehler_r4: flat proper splitting",
            manifold=kaehler,
            submanifold=_sub("flat_cr", 3, ("u1", "u2", "u3", "0"), kaehler),
            expected={
                "label": "normal-proper",
                "p": 2,
                "q": 1,
                "dtilde_dim": 0,
                "totally_geodesic": True,
                "verdicts": {
                    "thm_3_1_d_integrability": "all-hold",
                    "thm_3_3_dperp_integrability": "all-hold",
                    "thm_4_6_d_integrability_h": "all-hold",
                    "thm_4_8_totally_geodesic_dperp": "all-hold",
                    "thm_4_10_totally_geodesic_d": "all-hold",
                },
                "statuses": {
                    "thm_4_4_dperp_integrable": "pass",
                    "prop_4_2_weingarten_commutator": "pass",
                    "cor_2_6": "pass",
                },
            },
        ),
        FixtureEntry(
            name="totally_real_plane",
            description="plane in kaehler_r4 whose tangent space meets its rotation image orthogonally",
            manifold=kaehler,
            submanifold=_sub("totally_real_plane", 2, ("u1", "0", "u2", "0"), kaehler),
            expected={
                "label": "normal-anti-invariant",
                "p": 0,
                "q": 2,
                "dtilde_dim": 0,
                "totally_geodesic": True,
                "verdicts": {
                    "thm_3_1_d_integrability": "all-hold",
                    "thm_3_3_dperp_integrability": "all-hold",
                    "thm_4_6_d_integrability_h": "all-hold",
                    "thm_4_8_totally_geodesic_dperp": "all-hold",
                    "thm_4_10_totally_geodesic_d": "all-hold",
                },
                "statuses": {"thm_4_4_dperp_integrable": "pass", "cor_2_6": "pass"},
            },
        ),
        FixtureEntry(
            name="complex_curve",
            description="rotation-invariant graph surface in kaehler_r4 with h != 0",
            manifold=kaehler,
            submanifold=_sub(
                "complex_curve", 2, ("u1", "u2", "u1^2 - u2^2", "2*u1*u2"), kaehler
            ),
            expected={
                "label": "invariant",
                "p": 2,
                "q": 0,
                "totally_geodesic": False,
                "verdicts": {
                    "thm_3_1_d_integrability": "all-hold",
                    "thm_3_3_dperp_integrability": "all-hold",
                    "thm_4_6_d_integrability_h": "all-hold",
                    "thm_4_8_totally_geodesic_dperp": "all-hold",
                    "thm_4_10_totally_geodesic_d": "all-hold",
                },
                "statuses": {"thm_4_4_dperp_integrable": "pass"},
            },
        ),
        FixtureEntry(
            name="s3_in_c2",
            description="unit 3-sphere in kaehler_r4 (spherical chart away from poles)",
            manifold=kaehler,
            submanifold=_sub(
                "s3_in_c2",
                3,
                (
                    "cos(u1)",
                    "sin(u1)*cos(u2)",
                    "sin(u1)*sin(u2)*cos(u3)",
                    "sin(u1)*sin(u2)*sin(u3)",
                ),
                kaehler,
                domain=[
                    (0.3, float(np.pi) - 0.3),
                    (0.3, float(np.pi) - 0.3),
                    (0.3, 2 * float(np.pi) - 0.3),
                ],
            ),
            expected={
                "label": "normal-proper",
                "p": 2,
                "q": 1,
                "dtilde_dim": 0,
                "totally_geodesic": False,
                "d_integrable": False,
                "dperp_integrable": True,
                "verdicts": {
                    "thm_3_1_d_integrability": "none-hold",
                    "thm_3_3_dperp_integrability": "all-hold",
                    "thm_4_6_d_integrability_h": "none-hold",
                    "thm_4_8_totally_geodesic_dperp": "all-hold",
                    "thm_4_10_totally_geodesic_d": "none-hold",
                },
                "statuses": {"thm_4_4_dperp_integrable": "pass"},
            },
        ),
        FixtureEntry(
            name="contact_slice_r5",
            description="coordinate 3-plane in cosymplectic_r5: degenerate-ambient branch",
            manifold=cosym,
            submanifold=_sub(
                "contact_slice", 3, ("u1", "u2", "u3", "0", "0"), cosym
            ),
            expected={
                "label": "proper",
                "p": 2,
                "q": 1,
                "dtilde_dim": 1,
                "totally_geodesic": True,
                "statuses": {
                    "cor_2_6": "inapplicable",
                    "thm_3_1_d_integrability": "inapplicable",
                    "thm_3_3_dperp_integrability": "inapplicable",
                    "prop_4_2_weingarten_commutator": "inapplicable",
                    "thm_4_4_dperp_integrable": "inapplicable",
                    "thm_4_6_d_integrability_h": "inapplicable",
                    "thm_4_8_totally_geodesic_dperp": "inapplicable",
                    "thm_4_10_totally_geodesic_d": "inapplicable",
                },
            },
        ),
        FixtureEntry(
            name="nonparallel_r4",
            description="kaehler_r4 with a skew coordinate-dependent entry: compatible but not parallel",
            manifold=nonparallel,
            submanifold=None,
            expected={
                "compatible": True,
                "nondegenerate": True,
                "kernel_dim": None,
                "parallel": False,
                "family": "generic",
                "statuses": {
                    "eq_4_1_parallelism": "fail",
                    "prop_4_2_weingarten_commutator": "inapplicable",
                    "thm_4_4_dperp_integrable": "inapplicable",
                    "thm_4_6_d_integrability_h": "inapplicable",
                    "thm_4_8_totally_geodesic_dperp": "inapplicable",
                    "thm_4_10_totally_geodesic_d": "inapplicable",
                },
            },
        ),
    ]
    return {entry.name: entry for entry in entries}


def list_fixtures() -> list[tuple[str, str]]:
    """Fixture names with one-line descriptions, in a stable order."""
    return [(e.name, e.description) for e in _fixtures().values()]


def get_fixture(name: str) -> FixtureEntry:
    try:
        return _fixtures()[name]
    except KeyError:
        known = ", ".join(_fixtures())
        raise KeyError(f"unknown fixture {name!r} (known: {known})") from None
