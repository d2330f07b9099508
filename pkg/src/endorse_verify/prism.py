"""Emission of the labeled tree and its reachability property in PRISM's
model/property source formats, for cross-checking in an external tool.

State numbering is stable: depth-first, acceptance child first, root = 0,
so identical models export byte-identically. Leaves become absorbing
self-loop states (DTMCs need a total transition function). A comment block
maps state indices back to node ids and total weights; the bundled parser
reads that block back, which is what the round-trip tests rely on.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .dtmc import DtmcModel, PltlSpec

__all__ = [
    "PrismArtifacts",
    "state_numbering",
    "export_model",
    "export_property",
    "export_artifacts",
    "ParsedDtmc",
    "parse_model",
]


@dataclass(frozen=True)
class PrismArtifacts:
    model_text: str
    property_text: str
    state_map: dict[str, int]


def state_numbering(model: DtmcModel) -> dict[str, int]:
    """node_id -> state index, depth-first with the acceptance child first."""
    return {node.node_id: index for index, node in enumerate(model.nodes)}


def export_model(model: DtmcModel) -> str:
    """Render the labeled tree as DTMC module source.

    One guarded command per internal node with the two probabilistic
    updates (acceptance first), and a self-loop per leaf.
    """
    if not model.labeled:
        raise ValueError("model is not labeled; run label_weights first")
    state_map = state_numbering(model)
    count = len(model.nodes)

    lines = ["dtmc", "", "// state node total_weight"]
    for node in model.nodes:
        lines.append(f"// {state_map[node.node_id]} {node.node_id} {node.total_weight}")
    lines += ["", "module endorsement", f"\ts : [0..{count - 1}] init 0;", ""]
    for node in model.nodes:
        s = state_map[node.node_id]
        if node.is_leaf:
            lines.append(f"\t[] s={s} -> 1.0:(s'={s});")
        else:
            a = state_map[node.accept_child.node_id]
            r = state_map[node.refuse_child.node_id]
            lines.append(
                f"\t[] s={s} -> {node.accept_child.in_prob!r}:(s'={a})"
                f" + {node.refuse_child.in_prob!r}:(s'={r});"
            )
    lines += ["endmodule", ""]
    return "\n".join(lines)


def export_property(spec: PltlSpec, state_map: dict[str, int]) -> str:
    """Render the reachability property over state indices.

    An empty target set emits ``F false``; a single target still gets
    parentheses so the output shape is stable.
    """
    try:
        indices = [state_map[target] for target in spec.targets]
    except KeyError as exc:
        raise ValueError(f"target {exc.args[0]!r} is not in the state map") from exc
    if not indices:
        goal = "false"
    else:
        goal = "(" + " | ".join(f"s={i}" for i in indices) + ")"
    return f"P>{spec.bound!r} [ F {goal} ]\n"


def export_artifacts(model: DtmcModel, spec: PltlSpec) -> PrismArtifacts:
    state_map = state_numbering(model)
    return PrismArtifacts(
        model_text=export_model(model),
        property_text=export_property(spec, state_map),
        state_map=state_map,
    )


_COMMENT_RE = re.compile(r"^// (\d+) (\S+) (\d+)$")
_COMMAND_RE = re.compile(r"^\t\[\] s=(\d+) -> (.+);$")
_UPDATE_RE = re.compile(r"^([0-9.eE+-]+):\(s'=(\d+)\)$")


@dataclass(frozen=True)
class ParsedDtmc:
    """DTMC read back from emitted model source."""

    transitions: dict[int, list[tuple[float, int]]]
    node_ids: dict[int, str]
    weights: dict[int, int]

    def outgoing_sums(self) -> dict[int, float]:
        return {s: sum(p for p, _ in edges) for s, edges in self.transitions.items()}

    def absorbing_states(self) -> list[int]:
        return [
            s
            for s, edges in self.transitions.items()
            if len(edges) == 1 and edges[0][1] == s
        ]

    def leaf_weight_distribution(self) -> dict[int, float]:
        """Probability mass reaching each absorbing total weight.

        Relies on the exporter's numbering, under which every non-self-loop
        transition goes to a higher state index, so a single forward pass
        propagates all mass.
        """
        mass = {s: 0.0 for s in self.transitions}
        mass[0] = 1.0
        absorbing = set(self.absorbing_states())
        for s in sorted(self.transitions):
            if s in absorbing:
                continue
            for prob, target in self.transitions[s]:
                if target <= s:
                    raise ValueError(f"state {s}: transition does not move forward")
                mass[target] += mass[s] * prob
        distribution: dict[int, float] = {}
        for s in sorted(absorbing):
            weight = self.weights[s]
            distribution[weight] = distribution.get(weight, 0.0) + mass[s]
        return distribution


def parse_model(text: str) -> ParsedDtmc:
    """Parse emitted model source back into transitions and the state map."""
    lines = text.splitlines()
    if not lines or lines[0] != "dtmc":
        raise ValueError("model source must start with 'dtmc'")
    node_ids: dict[int, str] = {}
    weights: dict[int, int] = {}
    transitions: dict[int, list[tuple[float, int]]] = {}
    for line in lines[1:]:
        comment = _COMMENT_RE.match(line)
        if comment:
            state, node_id, weight = comment.groups()
            node_ids[int(state)] = node_id
            weights[int(state)] = int(weight)
            continue
        command = _COMMAND_RE.match(line)
        if command:
            source = int(command.group(1))
            edges = []
            for update in command.group(2).split(" + "):
                parsed = _UPDATE_RE.match(update)
                if not parsed:
                    raise ValueError(f"unparseable update {update!r}")
                edges.append((float(parsed.group(1)), int(parsed.group(2))))
            transitions[source] = edges
    if not transitions:
        raise ValueError("no transition commands found")
    return ParsedDtmc(transitions=transitions, node_ids=node_ids, weights=weights)
