"""Finite posets: comparability, rank, antichain decomposition and transitive reduction.

Covers are pairs ``(child, parent)`` in ledger orientation: the child approves the parent,
so the parent is below the child and the minimal elements are those without parents.
"""
import logging
from typing import Dict, FrozenSet, Iterable, List, Set, Tuple

import attr
import networkx as nx

from boxchain.constants import EXACT_WIDTH_LIMIT
from boxchain.exceptions import NotAcyclic, UnknownElement
from boxchain.typedefs import Edge, Element

LOGGER = logging.getLogger(__name__)


@attr.s(frozen=True)
class AntichainDecomposition:
    """Partition of a poset into antichains, one layer per rank."""

    layers = attr.ib(converter=tuple)  # type: Tuple[FrozenSet[Element], ...]

    def __len__(self) -> int:
        return len(self.layers)

    def as_lines(self) -> List[str]:
        """One line per layer, members in ascending order."""
        return [" ".join(str(element) for element in sorted(layer)) for layer in self.layers]


@attr.s(frozen=True)
class WidthResult:
    """Width of a poset; ``exact`` is false when the value comes from the Mirsky layers."""

    value = attr.ib()  # type: int
    exact = attr.ib(default=True)  # type: bool


def _build_graph(elements: FrozenSet[Element], covers: FrozenSet[Edge]) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(elements)
    for child, parent in covers:
        for element in (child, parent):
            if element not in elements:
                raise UnknownElement(element)
        graph.add_edge(child, parent)
    try:
        cycle = nx.find_cycle(graph)
    except nx.NetworkXNoCycle:
        return graph
    raise NotAcyclic(edge[0] for edge in cycle)


@attr.s(frozen=True)
class Poset:
    """A finite poset given by its elements and approval pairs ``(child, parent)``."""

    elements = attr.ib(converter=frozenset)  # type: FrozenSet[Element]
    covers = attr.ib(converter=frozenset)  # type: FrozenSet[Edge]
    _graph = attr.ib(init=False, eq=False, repr=False)  # type: nx.DiGraph
    _ranks = attr.ib(init=False, eq=False, repr=False)  # type: Dict[Element, int]

    def __attrs_post_init__(self):
        graph = _build_graph(self.elements, self.covers)
        ranks = {}  # type: Dict[Element, int]
        for element in reversed(list(nx.topological_sort(graph))):
            ranks[element] = 1 + max((ranks[parent] for parent in graph.successors(element)), default=-1)
        object.__setattr__(self, "_graph", graph)
        object.__setattr__(self, "_ranks", ranks)

    @classmethod
    def from_edges(cls, edges: Iterable[Edge], elements: Iterable[Element] = None) -> "Poset":
        """Build a poset from approval edges; isolated elements may be added separately."""
        edges = frozenset(edges)
        all_elements = set(elements or [])
        for child, parent in edges:
            all_elements.update((child, parent))
        return cls(all_elements, edges)

    def _check(self, *elements: Element) -> None:
        for element in elements:
            if element not in self.elements:
                raise UnknownElement(element)

    def reaches(self, upper: Element, lower: Element) -> bool:
        """True if ``lower`` is below or equal to ``upper``."""
        self._check(upper, lower)
        return upper == lower or nx.has_path(self._graph, upper, lower)

    def comparable(self, a: Element, b: Element) -> bool:
        """True iff one element reaches the other."""
        return self.reaches(a, b) or self.reaches(b, a)

    def rank(self, element: Element) -> int:
        """Length of the longest path from a minimal element up to ``element``."""
        self._check(element)
        return self._ranks[element]

    @property
    def minimal(self) -> FrozenSet[Element]:
        """Elements without parents."""
        return frozenset(e for e in self.elements if self._graph.out_degree(e) == 0)

    @property
    def maximal(self) -> FrozenSet[Element]:
        """Elements without children (the tips of a ledger)."""
        return frozenset(e for e in self.elements if self._graph.in_degree(e) == 0)

    def down_set(self, element: Element) -> Set[Element]:
        """The element plus everything below it."""
        self._check(element)
        return {element} | nx.descendants(self._graph, element)

    def reverse_rank(self, element: Element) -> int:
        """Number of maximal elements whose down-set contains ``element``."""
        self._check(element)
        above = nx.ancestors(self._graph, element) | {element}
        return len(above & self.maximal)

    def height(self) -> int:
        """Number of elements of the longest chain."""
        return 1 + max(self._ranks.values()) if self._ranks else 0

    def width(self) -> WidthResult:
        """Size of the largest antichain.

        Exact up to ``EXACT_WIDTH_LIMIT`` elements; above that, the largest Mirsky layer is
        returned with ``exact=False``. Every layer is an antichain, so the estimate never
        exceeds the true width.
        """
        if not self.elements:
            return WidthResult(0)
        if len(self.elements) <= EXACT_WIDTH_LIMIT:
            return WidthResult(max(len(antichain) for antichain in nx.antichains(self._graph)))
        LOGGER.info("Estimating the width of a poset with %d elements", len(self.elements))
        return WidthResult(max(len(layer) for layer in mirsky_decompose(self).layers), exact=False)

    def reduced_covers(self) -> FrozenSet[Edge]:
        """Covers of the transitive reduction: the same order without shortcut edges."""
        return frozenset(nx.transitive_reduction(self._graph).edges())

    def longest_chain(self) -> List[Element]:
        """A longest chain, from its top element down to a minimal one."""
        return nx.dag_longest_path(self._graph) if self.elements else []

    def without(self, elements: Iterable[Element]) -> "Poset":
        """The induced sub-poset without the given elements."""
        removed = set(elements)
        return Poset(
            self.elements - removed,
            {(child, parent) for child, parent in self.covers if child not in removed and parent not in removed},
        )


def mirsky_decompose(poset: Poset) -> AntichainDecomposition:
    """Split the poset into antichains by rank; there are as many layers as the height."""
    layers = [set() for _ in range(poset.height())]  # type: List[Set[Element]]
    for element in poset.elements:
        layers[poset.rank(element)].add(element)
    return AntichainDecomposition(frozenset(layer) for layer in layers)


def redundant_edges(vertices: Iterable[Element], edges: Iterable[Edge]) -> Set[Edge]:
    """Edges ``(child, parent)`` whose parent is also reachable from the child through a longer path."""
    poset = Poset.from_edges(edges, vertices)
    return set(poset.covers - poset.reduced_covers())

