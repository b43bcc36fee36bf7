"""Bottom-up absorption of a cluster tree and the bottom-up P-over-C planner."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator, Optional, Union

from . import kernels
from .ecr import PlanResult, evaluate_indices
from .flat import CLUSTER_KIND, _result, action_key
from .heap import MergeableHeap
from .model import Action, TroubleshootingModel


@dataclass(frozen=True)
class CompoundAction:
    """Opening ``cluster_id`` and then performing ``items`` in order.

    ``total_cost`` includes the combined cost of this cluster and of every
    cluster opened by a nested compound.
    """

    cluster_id: str
    items: tuple["Entry", ...]
    total_prob: float
    total_cost: float

    @property
    def efficiency(self):
        return self.total_prob / self.total_cost

    @property
    def key(self):
        return (-self.efficiency, CLUSTER_KIND, self.cluster_id)

    def atoms(self) -> Iterator[Action]:
        stack = [iter(self.items)]
        while stack:
            for item in stack[-1]:
                if isinstance(item, CompoundAction):
                    stack.append(iter(item.items))
                    break
                yield item
            else:
                stack.pop()

    def unfold(self) -> list[str]:
        return [a.action_id for a in self.atoms()]

    def compounds(self) -> Iterator["CompoundAction"]:
        """This compound and every nested one, outermost first."""
        stack = [self]
        while stack:
            c = stack.pop()
            yield c
            stack.extend(reversed([i for i in c.items if isinstance(i, CompoundAction)]))


Entry = Union[Action, CompoundAction]


def entry_key(e: Entry):
    return e.key if isinstance(e, CompoundAction) else action_key(e)


def entry_prob(e: Entry):
    return e.total_prob if isinstance(e, CompoundAction) else e.repair_prob


def entry_cost(e: Entry):
    return e.total_cost if isinstance(e, CompoundAction) else e.cost


class AbsorbedCluster:
    """A cluster whose subtree is reduced to atomic and compound entries in one max-queue."""

    __slots__ = ("cluster_id", "entries")

    def __init__(self, cluster_id: str, entries: MergeableHeap):
        self.cluster_id = cluster_id
        self.entries = entries

    @classmethod
    def from_members(cls, model: TroubleshootingModel, cluster_id: str) -> "AbsorbedCluster":
        acts = sorted(model.members[cluster_id], key=action_key)
        return cls(cluster_id, MergeableHeap.from_sorted((action_key(a), a) for a in acts))

    def __len__(self):
        return len(self.entries)

    def peek_entries(self) -> list[Entry]:
        """All entries in queue order, leaving the queue intact."""
        return [item for _, item in self.entries.items()]


def build_compound(model: TroubleshootingModel, child: AbsorbedCluster):
    """Pop the child's maximizing prefix into a compound; leftovers stay in ``child.entries``.

    Returns None when the child's subtree holds no actions.
    """
    q = child.entries
    if not q:
        return None
    sp = 0
    sc = model.combined_cost(child.cluster_id)
    items = []
    while q:
        key, e = q.peek()
        ef = -key[0]
        if items and ef < sp / sc:
            break
        q.pop()
        items.append(e)
        sp = sp + entry_prob(e)
        sc = sc + entry_cost(e)
    return CompoundAction(child.cluster_id, tuple(items), sp, sc)


def absorb(model: TroubleshootingModel, parent: AbsorbedCluster, children) -> AbsorbedCluster:
    """Absorb fully reduced children into their direct parent (destructive on the children)."""
    for child in children:
        if model.cluster_map[child.cluster_id].parent != parent.cluster_id:
            raise ValueError(f"{child.cluster_id!r} is not a child of {parent.cluster_id!r}")
        compound = build_compound(model, child)
        if compound is None:
            continue
        parent.entries.push(compound.key, compound)
        parent.entries.merge(child.entries)
    return parent


def induce_absorption(model: TroubleshootingModel, cluster_id: str | None = None) -> AbsorbedCluster:
    """Reduce the subtree rooted at ``cluster_id`` (default: root) to one absorbed cluster."""
    top = model.root_id if cluster_id is None else cluster_id
    order = model.subtree(top)
    reduced: dict[str, AbsorbedCluster] = {}
    for cid in reversed(order):
        node = AbsorbedCluster.from_members(model, cid)
        kids = [reduced.pop(k) for k in model.children[cid]]
        reduced[cid] = absorb(model, node, kids)
    return reduced[top]


def plan_tree(model: TroubleshootingModel, backend: Optional[str] = None) -> PlanResult:
    """Bottom-up P-over-C: emit the most efficient absorbed entry until none remain.

    ``backend=None`` uses the compiled kernel for float models when it is
    built; ``"python"`` forces the object-level implementation below.
    """
    if backend not in (None, "python", "compiled"):
        raise ValueError(f"unknown backend {backend!r}")
    use_kernel = backend == "compiled" or (
        backend is None and kernels.HAVE_COMPILED and kernels.is_float_model(model)
    )
    if use_kernel and model.actions:
        r = evaluate_indices(model, kernels.tree_order_arrays(model))
        return replace(r, algorithm="tree")
    else:
        seq = unfold_order(induce_absorption(model))
    return _result(model, seq, "tree")


def unfold_order(absorbed: AbsorbedCluster) -> list[str]:
    seq: list[str] = []
    for _, e in absorbed.entries.take_sorted():
        if isinstance(e, CompoundAction):
            seq.extend(e.unfold())
        else:
            seq.append(e.action_id)
    return seq
