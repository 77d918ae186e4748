"""PNG drawings of automata for reports (matplotlib, headless backend)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import networkx as nx  # noqa: E402

from .buchi import BuchiProperty  # noqa: E402
from .lts import Lts, state_key  # noqa: E402


def _graph(obj) -> tuple:
    g = nx.MultiDiGraph()
    filled = obj.accepting if isinstance(obj, BuchiProperty) else obj.marked
    for s in sorted(obj.states, key=state_key):
        g.add_node(str(s))
    labels = {}
    for src, label, dst in obj.sorted_transitions():
        g.add_edge(str(src), str(dst))
        key = (str(src), str(dst))
        labels[key] = (labels[key] + "\n" if key in labels else "") + str(label)
    return g, {str(s) for s in filled}, labels


def draw_automaton(obj, path, title: str | None = None) -> Path:
    """Draw ``obj`` (an :class:`Lts` or :class:`BuchiProperty`) into a PNG file."""
    if not isinstance(obj, (Lts, BuchiProperty)):
        raise TypeError(f"cannot draw {type(obj).__name__}")
    g, filled, labels = _graph(obj)
    size = max(4.0, min(16.0, 1.2 * len(g) ** 0.5 * 3))
    fig, ax = plt.subplots(figsize=(size, size * 0.75))
    pos = nx.kamada_kawai_layout(g) if len(g) > 1 else {n: (0.0, 0.0) for n in g}
    colors = ["#c8c8c8" if n in filled else "white" for n in g.nodes]
    edgecolors = ["#d62728" if n == str(obj.start) else "black" for n in g.nodes]
    nx.draw_networkx_nodes(g, pos, ax=ax, node_color=colors, edgecolors=edgecolors,
                           node_size=700)
    nx.draw_networkx_labels(g, pos, ax=ax, font_size=8)
    nx.draw_networkx_edges(g, pos, ax=ax, arrows=True, node_size=700,
                           connectionstyle="arc3,rad=0.12")
    nx.draw_networkx_edge_labels(g, pos, edge_labels={k: v for k, v in labels.items() if k[0] != k[1]},
                                 ax=ax, font_size=7, label_pos=0.4)
    loops = [f"{k[0]}: {v.replace(chr(10), ', ')}" for k, v in labels.items() if k[0] == k[1]]
    if loops:
        ax.text(0.01, 0.01, "self-loops\n" + "\n".join(loops), transform=ax.transAxes,
                fontsize=7, va="bottom")
    ax.set_title(title or obj.name or "")
    ax.axis("off")
    path = Path(path)
    fig.savefig(path, dpi=100, bbox_inches="tight")
    plt.close(fig)
    return path
