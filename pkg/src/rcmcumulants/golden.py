"""Reference values: partition censuses and exact cumulants.

Cumulant values are kept in the algebraic form they were printed in and
normalised by :class:`AlgebraicScalar` arithmetic, so the comparison with
the engine is an exact equality.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction as F

from .algebra import AlgebraicScalar, LambdaPoly
from .diagram import GraphSpec
from .model import ModelConfig


def _q(num, den=1) -> AlgebraicScalar:
    return AlgebraicScalar.rational(F(num, den))


def _sqrt(num, den=1) -> AlgebraicScalar:
    return AlgebraicScalar.sqrt(F(num, den))


def _poly(**coeffs) -> LambdaPoly:
    return LambdaPoly({int(k[1:]): v for k, v in coeffs.items()})


SINGLE_EDGE = GraphSpec.from_edges([[1, 2]], endpoints=[[1], [2]])
THREE_VERTEX_PATH = GraphSpec.from_edges([[1, 2], [2, 3]], endpoints=[[1], [3]])
TRIANGLE_THREE_ENDPOINTS = GraphSpec.from_edges([[1, 2], [2, 3], [3, 1]], endpoints=[[1], [2], [3]])
TREE_ONE_ENDPOINT = GraphSpec.from_edges([[1, 2], [2, 3], [2, 4]], endpoints=[[1, 3, 4]])
TRIANGLE = GraphSpec.from_edges([[1, 2], [2, 3], [3, 1]])
FIVE_VERTEX_PATH = GraphSpec.from_edges([[1, 2], [2, 3], [3, 4], [4, 5]])

FLAT_D1 = ModelConfig(d=1)
FLAT_D2 = ModelConfig(d=2)
GAUSSIAN_D2 = ModelConfig(d=2, intensity="gaussian")

GRAPHS = {
    "single_edge": SINGLE_EDGE,
    "three_vertex_path": THREE_VERTEX_PATH,
    "triangle_three_endpoints": TRIANGLE_THREE_ENDPOINTS,
    "tree_one_endpoint": TREE_ONE_ENDPOINT,
    "triangle": TRIANGLE,
    "five_vertex_path": FIVE_VERTEX_PATH,
}


@dataclass(frozen=True)
class GoldenCumulant:
    name: str
    specs: tuple[GraphSpec, ...]
    model: ModelConfig
    value: LambdaPoly
    partitions: int
    kind: str = "cumulant"   # or "joint_cumulant"

    @property
    def order(self) -> int:
        return len(self.specs)


@dataclass(frozen=True)
class GoldenCensus:
    name: str
    row_sizes: tuple[int, ...]
    histogram: dict[int, int]
    printed_total: int
    all_partitions: int | None = None
    notes: str = field(default="", compare=False)

    @property
    def histogram_total(self) -> int:
        return sum(self.histogram.values())


def _lead_five_vertex_path_variance() -> AlgebraicScalar:
    return _q(7344738590701, 687218605505250)


CUMULANTS: tuple[GoldenCumulant, ...] = (
    GoldenCumulant("single_edge_first", (SINGLE_EDGE,), FLAT_D1, _poly(l2=_sqrt(1, 3)), 1),
    GoldenCumulant("single_edge_second", (SINGLE_EDGE,) * 2, FLAT_D1,
                   _poly(l3=_sqrt(1, 3) + _sqrt(1, 2), l2=_sqrt(1, 3) + _sqrt(1, 8)), 6),
    GoldenCumulant("single_edge_third", (SINGLE_EDGE,) * 3, FLAT_D1,
                   _poly(l4=_sqrt(12, 7) + _q(3) * _sqrt(1, 5) + _q(3) * _sqrt(1, 7) + _q(12) * _sqrt(1, 31),
                         l3=_sqrt(3) + _sqrt(3, 2) + _q(17, 5) * _sqrt(1, 2) + _q(12) * _sqrt(1, 19),
                         l2=_q(3, 2) * _sqrt(1, 2) + _sqrt(1, 3)), 68),
    GoldenCumulant("three_vertex_path_first", (THREE_VERTEX_PATH,), FLAT_D1, _poly(l3=_q(1, 2)), 1),
    GoldenCumulant("three_vertex_path_second", (THREE_VERTEX_PATH,) * 2, FLAT_D1,
                   _poly(l5=(_sqrt(6) + _q(4) * _sqrt(3, 5) + _q(3, 2) * _sqrt(1, 2) + _q(12) * _sqrt(1, 7)) / 6,
                         l4=(_q(3) * _sqrt(3) + _q(16) * _sqrt(3, 7) + _q(8) * _sqrt(3, 11)
                             + _q(3, 2) * _sqrt(1, 2) + _q(6) * _sqrt(1, 5)) / 6,
                         l3=(_sqrt(3) + _sqrt(6) + _q(6)) / 6), 33),
    GoldenCumulant("triangle_three_endpoints_first", (TRIANGLE_THREE_ENDPOINTS,), FLAT_D1, _poly(l3=_q(1, 4)), 1),
    GoldenCumulant("triangle_three_endpoints_second", (TRIANGLE_THREE_ENDPOINTS,) * 2, FLAT_D1,
                   _poly(l5=_sqrt(3) / 8 + _q(3, 8),
                         l4=_q(2, 35) * _sqrt(105) + _sqrt(3) / 5 + _q(3, 4),
                         l3=_q(3, 35) * _sqrt(35) + _sqrt(2) / 5 + _q(1, 4)), 33),
    GoldenCumulant("tree_one_endpoint_first", (TREE_ONE_ENDPOINT,), FLAT_D2, _poly(l4=_q(1, 12)), 1),
    GoldenCumulant("tree_one_endpoint_second", (TREE_ONE_ENDPOINT,) * 2, FLAT_D2,
                   _poly(l7=_q(41, 384), l6=_q(99039, 165760), l5=_q(232885, 175824), l4=_q(37, 50)), 208),
    GoldenCumulant("triangle_gaussian_second", (TRIANGLE,) * 2, GAUSSIAN_D2,
                   _poly(l5=_q(3, 64), l4=_q(6, 25), l3=_q(3, 8)), 33),
    GoldenCumulant("triangle_vs_five_vertex_path_joint", (TRIANGLE, FIVE_VERTEX_PATH), GAUSSIAN_D2,
                   _poly(l7=_q(34409, 1537920), l6=_q(9101145477, 55004486680), l5=_q(10774977, 28148120)),
                   135, kind="joint_cumulant"),
)

# Only the leading coefficient and the partition count are known here.
FIVE_VERTEX_PATH_VARIANCE_LEADING = (9, _lead_five_vertex_path_variance(), 1545)

LIMIT_CORRELATION = 0.999602

CENSUSES: tuple[GoldenCensus, ...] = (
    GoldenCensus("pairs_order1", (2,), {2: 1}, 1, 2),
    GoldenCensus("pairs_order2", (2,) * 2, {2: 2, 3: 4}, 6, 15),
    GoldenCensus("pairs_order3", (2,) * 3, {2: 4, 3: 32, 4: 32}, 68, 203),
    GoldenCensus("pairs_order4", (2,) * 4, {2: 8, 3: 208, 4: 624, 5: 352}, 1192, 4140),
    GoldenCensus("pairs_order5", (2,) * 5, {2: 16, 3: 1280, 4: 8960, 5: 13904, 6: 5040}, 29200, 115975),
    GoldenCensus("pairs_order6", (2,) * 6,
                 {2: 32, 3: 7744, 4: 116160, 5: 375776, 6: 351456, 7: 88544}, 939712, 4213597),
    GoldenCensus("triples_order1", (3,), {3: 1}, 1, 5),
    GoldenCensus("triples_order2", (3,) * 2, {3: 6, 4: 18, 5: 9}, 33, 203),
    GoldenCensus("triples_order3", (3,) * 3, {3: 36, 4: 540, 5: 1242, 6: 864, 7: 189}, 2871, 21147),
    GoldenCensus("triples_order4", (3,) * 4,
                 {3: 216, 4: 13608, 5: 94284, 6: 186624, 7: 145908, 8: 48276, 9: 5589}, 494500, 4213597,
                 notes="printed histogram sums to 494505"),
    GoldenCensus("quadruples_order1", (4,), {4: 1}, 1, 15),
    GoldenCensus("quadruples_order2", (4,) * 2, {4: 24, 5: 96, 6: 72, 7: 15}, 208, 4140),
    GoldenCensus("quadruples_order3", (4,) * 3,
                 {4: 576, 5: 13824, 6: 50688, 7: 59904, 8: 29952, 9: 6912, 10: 640}, 162496, 4213597),
    GoldenCensus("triangle_with_five_vertex_path", (3, 5), {}, 135),
)
