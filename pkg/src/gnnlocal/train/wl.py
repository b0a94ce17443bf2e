"""1-dimensional Weisfeiler-Lehman colour refinement."""
from __future__ import annotations

from collections import Counter

from ..graph import AttributedGraph

__all__ = ["wl_refinement", "wl_histograms", "wl_equivalent"]


def wl_refinement(g: AttributedGraph, rounds: int, palette: dict | None = None,
                  use_attributes: bool = False) -> list[tuple[int, ...]]:
    """Colours of every node after rounds ``0..rounds``.

    Colours are small integers drawn from ``palette``, a map from signature
    to colour; pass the same dict when refining several graphs so their
    colours are comparable.  Round 0 is uniform, or the node attributes when
    ``use_attributes`` is set.
    """
    if rounds < 0:
        raise ValueError("rounds must be non-negative")
    if palette is None:
        palette = {}

    def intern(sig):
        return palette.setdefault(sig, len(palette))

    colors = tuple(intern(("init", g.node_attr[i] if use_attributes else ()))
                   for i in range(g.n))
    history = [colors]
    for _ in range(rounds):
        colors = tuple(intern((colors[i], tuple(sorted(colors[j] for j in g.neighbors[i]))))
                       for i in range(g.n))
        history.append(colors)
    return history


def wl_histograms(g: AttributedGraph, rounds: int, palette: dict,
                  use_attributes: bool = False) -> list[Counter]:
    return [Counter(c) for c in wl_refinement(g, rounds, palette, use_attributes)]


def wl_equivalent(g: AttributedGraph, h: AttributedGraph, rounds: int | None = None,
                  use_attributes: bool = False) -> bool:
    """Same colour multiset at every round (default ``max(n) + 1`` rounds)."""
    if rounds is None:
        rounds = max(g.n, h.n) + 1
    palette: dict = {}
    return (wl_histograms(g, rounds, palette, use_attributes)
            == wl_histograms(h, rounds, palette, use_attributes))
