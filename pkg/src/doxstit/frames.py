"""Finite branching-time frames with agents, choices, knowledge and value.

A frame is a finite moment tree (strict order = proper ancestry, so
"no backward branching" holds by construction), a per-agent partition of
the histories through each moment into choice cells, a per-agent
equivalence over indices (moment/history pairs), and an exact rational
value for each history.

Histories are the maximal root-to-leaf chains and are named after their
leaf moments.  An index ``(m, h)`` is valid when moment ``m`` lies on
history ``h``'s chain.

`validate_frame` checks the four frame constraints on choices and
knowledge:

* NC   -- histories still undivided after a moment share choice cells
          at that moment;
* IA   -- every joint selection of one cell per agent is nonempty;
* OAC  -- each information set is a union of the agent's own choice
          cells at every moment it touches (agents know no more than
          what they do);
* Unif-H -- indistinguishable indices offer matching historical
          alternatives.

Frames are immutable after construction; every operation is a pure read,
so a frame may be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

from .errors import DoxstitError, ModelFormatError


class Index(NamedTuple):
    """A (moment, history) evaluation point, spelled "moment/history"."""

    moment: str
    history: str

    def spell(self) -> str:
        return f"{self.moment}/{self.history}"


def parse_index(text: str) -> Index:
    if text.count("/") != 1:
        raise ModelFormatError(f"index {text!r} is not of the form 'moment/history'")
    m, h = text.split("/")
    if not m or not h:
        raise ModelFormatError(f"index {text!r} is not of the form 'moment/history'")
    return Index(m, h)


def _close_pairs(pairs: Iterable[tuple[Index, Index]],
                 universe: Sequence[Index]) -> tuple[frozenset[Index], ...]:
    """Reflexive-symmetric-transitive closure of generator pairs,
    returned as a partition of the universe (union-find)."""
    parent = {i: i for i in universe}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    groups: dict[Index, set[Index]] = {}
    for i in universe:
        groups.setdefault(find(i), set()).add(i)
    return tuple(frozenset(g) for g in groups.values())


class Frame:
    """Branching-time frame; see the module docstring.

    Built via `build_frame`, which derives histories and rejects
    structurally broken input.  Constraint violations (NC, IA, OAC,
    Unif-H, malformed partitions) are *not* rejected here -- they are
    what `validate_frame` reports on.
    """

    def __init__(self, agents, parents, choices, epistemic, values,
                 root, children, histories, h_m, indices):
        self.agents: tuple[str, ...] = agents
        self.parents: dict[str, Optional[str]] = parents
        self.choices: dict[tuple[str, str], tuple[frozenset[str], ...]] = choices
        self.epistemic: dict[str, tuple[frozenset[Index], ...]] = epistemic
        self.values: dict[str, Fraction] = values
        self.root: str = root
        self.children: dict[str, tuple[str, ...]] = children
        self.histories: dict[str, tuple[str, ...]] = histories
        self.h_m: dict[str, frozenset[str]] = h_m
        self.indices: tuple[Index, ...] = indices
        self.index_set: frozenset[Index] = frozenset(indices)
        self.moments: tuple[str, ...] = tuple(sorted(parents))
        # index -> its epistemic class, per agent
        self.class_of: dict[str, dict[Index, frozenset[Index]]] = {
            agent: {i: c for c in classes for i in c}
            for agent, classes in epistemic.items()
        }
        # moment relation: m ~ m' when some class holds indices at both
        self._related: dict[str, dict[str, frozenset[str]]] = {}
        for agent, classes in epistemic.items():
            rel: dict[str, set[str]] = {m: {m} for m in self.moments}
            for c in classes:
                ms = {i.moment for i in c}
                for m in ms:
                    rel[m] |= ms
            self._related[agent] = {m: frozenset(s) for m, s in rel.items()}
        self._cluster_cache: dict[tuple, frozenset[str]] = {}
        self._states_cache: dict[tuple[str, str], frozenset[frozenset[str]]] = {}

    # -- basic lookups ------------------------------------------------

    def check_moment(self, m: str) -> None:
        if m not in self.parents:
            raise DoxstitError(f"unknown moment {m!r}")

    def check_agent(self, agent: str) -> None:
        if agent not in self.agents:
            raise DoxstitError(f"unknown agent {agent!r}")

    def check_index(self, i: Index) -> None:
        if i not in self.index_set:
            raise DoxstitError(f"invalid index {i.spell()!r}: moment not on history")

    def histories_through(self, m: str) -> frozenset[str]:
        """H_m: the histories whose chain contains m."""
        self.check_moment(m)
        return self.h_m[m]

    def indices_at(self, m: str) -> tuple[Index, ...]:
        return tuple(Index(m, h) for h in sorted(self.h_m[m]))

    def cells(self, agent: str, m: str) -> tuple[frozenset[str], ...]:
        """The choice-cell partition of H_m for an agent."""
        self.check_agent(agent)
        self.check_moment(m)
        return self.choices[(m, agent)]

    def choice_cell(self, agent: str, m: str, h: str) -> frozenset[str]:
        """The unique cell of the agent's partition at m containing h."""
        for cell in self.cells(agent, m):
            if h in cell:
                return cell
        raise DoxstitError(f"history {h!r} is not in H_{m} for agent {agent!r}")

    def information_set(self, agent: str, i: Index) -> frozenset[Index]:
        """The epistemic equivalence class of an index; contains i."""
        self.check_agent(agent)
        self.check_index(i)
        return self.class_of[agent][i]

    def moment_related(self, agent: str, m: str, m2: str) -> bool:
        """True when some index at m is indistinguishable from one at m2."""
        self.check_agent(agent)
        self.check_moment(m)
        self.check_moment(m2)
        return m2 in self._related[agent][m]

    def related_moments(self, agent: str, m: str) -> frozenset[str]:
        return self._related[agent][m]

    def epistemic_cluster(self, agent: str, action: frozenset[str],
                          m_star: str, m: str) -> frozenset[str]:
        """The histories at m indistinguishable from some history of
        `action` (a set of histories at m_star)."""
        key = (agent, m_star, action, m)
        got = self._cluster_cache.get(key)
        if got is not None:
            return got
        self.check_agent(agent)
        self.check_moment(m_star)
        self.check_moment(m)
        if not action <= self.h_m[m_star]:
            bad = sorted(action - self.h_m[m_star])
            raise DoxstitError(f"action {bad} not within H_{m_star}")
        class_of = self.class_of[agent]
        sources = {class_of[Index(m_star, h)] for h in action}
        cluster = frozenset(
            h for h in self.h_m[m] if class_of[Index(m, h)] in sources)
        self._cluster_cache[key] = cluster
        return cluster

    def states_for(self, agent: str, m: str) -> frozenset[frozenset[str]]:
        """Joint actions of all *other* agents at m: the states of
        nature against which the agent's cells are compared.  With a
        single agent the empty intersection is the whole of H_m."""
        key = (agent, m)
        got = self._states_cache.get(key)
        if got is not None:
            return got
        self.check_agent(agent)
        self.check_moment(m)
        others = [a for a in self.agents if a != agent]
        if not others:
            states = frozenset({self.h_m[m]})
        else:
            states = frozenset(
                frozenset.intersection(*combo)
                for combo in product(*(self.choices[(m, a)] for a in others)))
        self._states_cache[key] = states
        return states


def build_frame(agents: Sequence[str],
                parents: Mapping[str, Optional[str]],
                choices: Mapping[tuple[str, str], Sequence[Iterable[str]]],
                values: Mapping[str, Fraction],
                epistemic_pairs: Optional[Mapping[str, Sequence[tuple[Index, Index]]]] = None,
                epistemic_classes: Optional[Mapping[str, Sequence[frozenset[Index]]]] = None,
                ) -> Frame:
    """Assemble a frame, deriving histories from the moment tree.

    Rejects structural defects: duplicate or missing names, several
    roots, parent cycles, values that are not total over the derived
    histories, epistemic generators over invalid indices.  Choice
    entries may be omitted for any (moment, agent): the vacuous
    single-cell partition of H_m is filled in.  Omitted epistemic
    agents get the identity relation.
    """
    agents = tuple(agents)
    if not agents:
        raise ModelFormatError("section 'agents': must be nonempty")
    if len(set(agents)) != len(agents):
        raise ModelFormatError("section 'agents': duplicate agent names")

    parents = dict(parents)
    if not parents:
        raise ModelFormatError("section 'moments': must be nonempty")
    roots = [m for m, p in parents.items() if p is None]
    if len(roots) != 1:
        raise ModelFormatError(
            f"section 'moments': expected exactly one root, found {sorted(roots)}")
    root = roots[0]
    children: dict[str, list[str]] = {m: [] for m in parents}
    for m, p in parents.items():
        if p is None:
            continue
        if p not in parents:
            raise ModelFormatError(f"section 'moments': entry {m!r}: unknown parent {p!r}")
        children[p].append(m)
    # every moment must reach the root (rules out parent cycles)
    for m in parents:
        seen = set()
        cur: Optional[str] = m
        while cur is not None:
            if cur in seen:
                raise ModelFormatError(f"section 'moments': cycle through {m!r}")
            seen.add(cur)
            cur = parents[cur]
        if root not in seen:
            raise ModelFormatError(f"section 'moments': {m!r} does not descend from the root")

    children_t = {m: tuple(sorted(cs)) for m, cs in children.items()}
    leaves = sorted(m for m, cs in children_t.items() if not cs)
    histories: dict[str, tuple[str, ...]] = {}
    for leaf in leaves:
        chain = [leaf]
        cur = parents[leaf]
        while cur is not None:
            chain.append(cur)
            cur = parents[cur]
        histories[leaf] = tuple(reversed(chain))

    h_m: dict[str, set[str]] = {m: set() for m in parents}
    for h, chain in histories.items():
        for m in chain:
            h_m[m].add(h)
    h_m_f = {m: frozenset(hs) for m, hs in h_m.items()}

    indices = tuple(sorted(
        Index(m, h) for h, chain in histories.items() for m in chain))

    values = dict(values)
    missing = sorted(set(histories) - set(values))
    if missing:
        raise ModelFormatError(f"section 'values': missing value for histories {missing}")
    alien = sorted(set(values) - set(histories))
    if alien:
        raise ModelFormatError(f"section 'values': {alien} are not histories of this frame")

    full_choices: dict[tuple[str, str], tuple[frozenset[str], ...]] = {}
    for (m, agent), cells in choices.items():
        if m not in parents:
            raise ModelFormatError(f"section 'choices': entry '{m}/{agent}': unknown moment {m!r}")
        if agent not in agents:
            raise ModelFormatError(f"section 'choices': entry '{m}/{agent}': unknown agent {agent!r}")
        cell_sets = tuple(frozenset(c) for c in cells)
        for c in cell_sets:
            for h in c:
                if h not in histories:
                    raise ModelFormatError(
                        f"section 'choices': entry '{m}/{agent}': unknown history {h!r}")
        full_choices[(m, agent)] = cell_sets
    for m in parents:
        for agent in agents:
            full_choices.setdefault((m, agent), (h_m_f[m],))

    index_set = frozenset(indices)
    epistemic: dict[str, tuple[frozenset[Index], ...]] = {}
    if epistemic_classes is not None:
        for agent, classes in epistemic_classes.items():
            epistemic[agent] = tuple(frozenset(c) for c in classes)
    pairs = dict(epistemic_pairs or {})
    for agent in agents:
        if agent in epistemic:
            continue
        gen = []
        for a, b in pairs.get(agent, ()):
            for i in (a, b):
                if i not in index_set:
                    raise ModelFormatError(
                        f"section 'epistemic': agent {agent!r}: invalid index {i.spell()!r}")
            gen.append((a, b))
        epistemic[agent] = _close_pairs(gen, indices)
    for agent in epistemic:
        if agent not in agents:
            raise ModelFormatError(f"section 'epistemic': unknown agent {agent!r}")
        covered = set().union(*epistemic[agent]) if epistemic[agent] else set()
        if covered != index_set:
            raise ModelFormatError(
                f"section 'epistemic': agent {agent!r}: classes do not partition the index set")

    return Frame(agents, parents, full_choices, epistemic, values,
                 root, children_t, histories, h_m_f, indices)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    passed: bool
    witnesses: tuple[str, ...] = ()

    def __str__(self):
        tail = "" if self.passed else "; ".join(self.witnesses)
        return f"{self.name}: {'pass' if self.passed else 'FAIL ' + tail}"


@dataclass
class FrameReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def __str__(self):
        return "\n".join(str(c) for c in self.checks)


def validate_frame(frame: Frame, max_witnesses: int = 50) -> FrameReport:
    """Check every frame constraint; failures carry concrete witnesses.

    All violations are collected (up to `max_witnesses` per constraint),
    not just the first, since the intended workflow is model debugging.
    """
    report = FrameReport()

    # tree shape / no backward branching hold by construction in
    # build_frame; recorded so the report covers every constraint.
    report.checks.append(CheckResult("tree", True))

    part_w: list[str] = []
    for (m, agent), cells in sorted(frame.choices.items()):
        hs = frame.h_m[m]
        seen: set[str] = set()
        for cell in cells:
            if not cell:
                part_w.append(f"{agent}@{m}: empty cell")
            for h in cell:
                if h not in hs:
                    part_w.append(f"{agent}@{m}: history {h!r} not in H_{m}")
                elif h in seen:
                    part_w.append(f"{agent}@{m}: history {h!r} in two cells")
                seen.add(h)
        for h in sorted(hs - seen):
            part_w.append(f"{agent}@{m}: history {h!r} not covered by any cell")
    report.checks.append(CheckResult("partition", not part_w, tuple(part_w[:max_witnesses])))

    # NC: histories sharing a child of m are undivided at m and must
    # share every agent's cell there.
    nc_w: list[str] = []
    for m in frame.moments:
        for child in frame.children[m]:
            block = sorted(frame.h_m[child])
            if len(block) < 2:
                continue
            for agent in frame.agents:
                rep = block[0]
                try:
                    cell = frame.choice_cell(agent, m, rep)
                except DoxstitError:
                    continue
                for h in block[1:]:
                    if h not in cell:
                        nc_w.append(
                            f"{agent}@{m}: {rep} and {h} are undivided at {m} "
                            f"(shared moment {child}) but lie in different cells")
    report.checks.append(CheckResult("NC", not nc_w, tuple(nc_w[:max_witnesses])))

    ia_w: list[str] = []
    for m in frame.moments:
        per_agent = [frame.choices[(m, a)] for a in frame.agents]
        for combo in product(*per_agent):
            if not frozenset.intersection(*combo):
                pick = ", ".join(
                    f"{a}:{{{','.join(sorted(c))}}}" for a, c in zip(frame.agents, combo))
                ia_w.append(f"at {m}: selection {pick} has empty intersection")
    report.checks.append(CheckResult("IA", not ia_w, tuple(ia_w[:max_witnesses])))

    oac_w: list[str] = []
    for agent in frame.agents:
        for cls in frame.epistemic[agent]:
            for i in sorted(cls):
                try:
                    cell = frame.choice_cell(agent, i.moment, i.history)
                except DoxstitError:
                    continue
                for h2 in sorted(cell):
                    if Index(i.moment, h2) not in cls:
                        oac_w.append(
                            f"{agent}: {i.spell()} is related to its class but "
                            f"{i.moment}/{h2} from the same cell is not")
    report.checks.append(CheckResult("OAC", not oac_w, tuple(oac_w[:max_witnesses])))

    unif_w: list[str] = []
    seen_pairs: set[tuple[str, str, str]] = set()
    for agent in frame.agents:
        class_of = frame.class_of[agent]
        for cls in frame.epistemic[agent]:
            ms = sorted({i.moment for i in cls})
            for m_star in ms:
                for m in ms:
                    if (agent, m_star, m) in seen_pairs:
                        continue
                    seen_pairs.add((agent, m_star, m))
                    for h_star in sorted(frame.h_m[m_star]):
                        mate = class_of[Index(m_star, h_star)]
                        if not any(j.moment == m for j in mate):
                            unif_w.append(
                                f"{agent}: {m_star}~{m} but {m_star}/{h_star} "
                                f"has no counterpart at {m}")
    report.checks.append(CheckResult("Unif-H", not unif_w, tuple(unif_w[:max_witnesses])))

    return report
