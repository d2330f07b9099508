"""Explicit DTMC construction for a policy, weight labeling, and the
reachability property over the labeled tree.

The model is a full binary response tree: level k branches on organization
k's reply, the acceptance edge carrying probability ``1 - refusal_prob`` and
the refusal edge ``refusal_prob``. Leaves are the 2^n joint outcomes. After
labeling, each node's ``total_weight`` is the summed weight of ancestors
that replied accept, and the acceptance property targets every leaf whose
total weight reaches the policy's weight threshold.

Naming is canonical and stable: internal nodes are ``n<k>`` in depth-first
preorder (acceptance child first, acceptance is the left branch), leaves are
``L<k>`` by left-to-right index, so ``L0`` is the all-accept outcome.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional

from .policy import Policy, total_weight

__all__ = [
    "ACCEPT",
    "REFUSE",
    "MAX_TREE_ORGS",
    "ModelTooLargeError",
    "DtmcNode",
    "DtmcModel",
    "PltlSpec",
    "build_dtmc",
    "label_weights",
    "generate_spec",
    "generate_rejection_spec",
    "dump_model",
]

Reply = Literal["accept", "refuse"]
ACCEPT: Reply = "accept"
REFUSE: Reply = "refuse"

# Explicit trees are exponential by construction; past this many organizations
# (~2M nodes) only the on-the-fly simulator and the closed-form oracle apply.
MAX_TREE_ORGS = 20


class ModelTooLargeError(ValueError):
    """Raised when the explicit tree would exceed the node cap."""


@dataclass(eq=False)
class DtmcNode:
    """One state of the response tree.

    ``org_index`` (and ``org_id``/``weight``/``refusal_prob``) identify the
    organization whose reply this node's outgoing transitions model; they are
    None on leaves. ``in_prob`` is the probability of the transition from the
    parent (1.0 on the root). ``total_weight`` is filled in by labeling.
    """

    node_id: str
    org_index: Optional[int]
    org_id: Optional[str]
    weight: Optional[int]
    refusal_prob: Optional[float]
    parent: Optional["DtmcNode"]
    parent_reply: Optional[Reply]
    in_prob: float
    total_weight: int = 0
    children: tuple["DtmcNode", ...] = field(default_factory=tuple)

    @property
    def is_leaf(self) -> bool:
        return self.org_index is None

    @property
    def accept_child(self) -> "DtmcNode":
        return self.children[0]

    @property
    def refuse_child(self) -> "DtmcNode":
        return self.children[1]

    def path_probability(self) -> float:
        """Product of transition probabilities from the root to this node."""
        prob = 1.0
        node = self
        while node.parent is not None:
            prob *= node.in_prob
            node = node.parent
        return prob


@dataclass(eq=False)
class DtmcModel:
    """Full response tree: 2^(n+1) - 1 nodes, 2^n leaves in left-to-right order."""

    root: DtmcNode
    nodes: list[DtmcNode]
    leaves: list[DtmcNode]
    n_orgs: int
    labeled: bool = False


def build_dtmc(policy: Policy, max_orgs: int = MAX_TREE_ORGS) -> DtmcModel:
    """Build the explicit response tree for a policy.

    Nodes are created in depth-first preorder with the acceptance subtree
    first, which fixes both the node listing and the leaf order. Raises
    ModelTooLargeError past ``max_orgs`` organizations; use the on-the-fly
    simulator or the exact oracle for larger policies.
    """
    n = len(policy.organizations)
    if n > max_orgs:
        raise ModelTooLargeError(
            f"{n} organizations would need {2 ** (n + 1) - 1} explicit states "
            f"(cap {max_orgs} organizations); use on-the-fly simulation instead"
        )

    nodes: list[DtmcNode] = []
    leaves: list[DtmcNode] = []
    internal_count = 0

    def grow(level: int, parent: Optional[DtmcNode], reply: Optional[Reply], in_prob: float) -> DtmcNode:
        nonlocal internal_count
        if level == n:
            node = DtmcNode(
                node_id=f"L{len(leaves)}",
                org_index=None,
                org_id=None,
                weight=None,
                refusal_prob=None,
                parent=parent,
                parent_reply=reply,
                in_prob=in_prob,
            )
            nodes.append(node)
            leaves.append(node)
            return node
        org = policy.organizations[level]
        node = DtmcNode(
            node_id=f"n{internal_count}",
            org_index=level,
            org_id=org.id,
            weight=org.weight,
            refusal_prob=org.refusal_prob,
            parent=parent,
            parent_reply=reply,
            in_prob=in_prob,
        )
        internal_count += 1
        nodes.append(node)
        node.children = (
            grow(level + 1, node, ACCEPT, org.acceptance_prob),
            grow(level + 1, node, REFUSE, org.refusal_prob),
        )
        return node

    root = grow(0, None, None, 1.0)
    return DtmcModel(root=root, nodes=nodes, leaves=leaves, n_orgs=n)


def label_weights(model: DtmcModel) -> DtmcModel:
    """Assign each node the summed weight of accepting ancestors (depth-first).

    The root starts at 0; a child inherits its parent's total and adds the
    parent's organization weight exactly when the parent replied accept.
    """
    model.root.total_weight = 0

    def visit(node: DtmcNode) -> None:
        for child in node.children:
            child.total_weight = node.total_weight
            if child.parent_reply == ACCEPT:
                child.total_weight += node.weight
            visit(child)

    visit(model.root)
    model.labeled = True
    return model


@dataclass(frozen=True)
class PltlSpec:
    """Reachability property: targets must be finally reached with
    probability strictly greater than ``bound``.

    An empty target list is legal and denotes an unsatisfiable goal
    (reachability probability 0).
    """

    bound: float
    targets: tuple[str, ...]
    comparison: str = ">"

    def render(self) -> str:
        if not self.targets:
            goal = "false"
        else:
            goal = "(" + " | ".join(self.targets) + ")"
        return f"P {self.comparison} {self.bound!r} [ F {goal} ]"

    def __str__(self) -> str:
        return self.render()


def _require_labeled(model: DtmcModel) -> None:
    if not model.labeled:
        raise ValueError("model is not labeled; run label_weights first")


def generate_spec(model: DtmcModel, policy: Policy) -> PltlSpec:
    """Acceptance property: targets are leaves with total weight >= threshold."""
    _require_labeled(model)
    targets = tuple(
        leaf.node_id for leaf in model.leaves if leaf.total_weight >= policy.weight_threshold
    )
    return PltlSpec(bound=policy.probability_threshold, targets=targets)


def generate_rejection_spec(model: DtmcModel, policy: Policy) -> PltlSpec:
    """Rejection property: targets are leaves whose refused weight >= threshold."""
    _require_labeled(model)
    total = total_weight(policy)
    targets = tuple(
        leaf.node_id
        for leaf in model.leaves
        if total - leaf.total_weight >= policy.weight_threshold
    )
    return PltlSpec(bound=policy.probability_threshold, targets=targets)


def dump_model(model: DtmcModel) -> str:
    """Deterministic depth-first listing: ``id parent reply in_prob total_weight``."""
    lines = []
    for node in model.nodes:
        parent = node.parent.node_id if node.parent is not None else "-"
        reply = node.parent_reply if node.parent_reply is not None else "-"
        lines.append(f"{node.node_id} {parent} {reply} {node.in_prob!r} {node.total_weight}")
    return "\n".join(lines) + "\n"
