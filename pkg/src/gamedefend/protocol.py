"""Extensive-form protocol descriptions and their strategic form.

Source format, one form per node::

    (agents Alice Bob)                  ; optional, fixes agent order
    (objective fair none sign_AB)       ; optional, named outcome sets
    (node Alice (stop (outcome w0))
                (sign (node Bob (stop (outcome w1)) (sign (outcome w2)))))

Nodes are numbered in pre-order.  A plan picks an action at every node its
owner controls, reachable or not, which is why the compiled outcome map is
usually not injective.
"""
from __future__ import annotations

import itertools
import re
import warnings
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import GameError
from .game import GameFrame


class ProtocolSyntaxError(GameError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Node:
    owner: str | None  # None for leaves
    actions: tuple[str, ...] = ()
    children: tuple[int, ...] = ()
    label: str | None = None

    @property
    def is_leaf(self) -> bool:
        return self.owner is None


@dataclass(frozen=True)
class ProtocolTree:
    nodes: tuple[Node, ...]
    agents: tuple[str, ...]
    objectives: tuple[tuple[str, tuple[str, ...]], ...] = ()
    root: int = 0

    def nodes_of(self, agent: str) -> list[int]:
        return [k for k, n in enumerate(self.nodes) if n.owner == agent]

    def labels(self) -> list[str]:
        """Distinct leaf labels in pre-order of first appearance."""
        seen = []
        for n in self.nodes:
            if n.is_leaf and n.label not in seen:
                seen.append(n.label)
        return seen


Plan = tuple[int, ...]  # action index per node of the agent, in node order


@dataclass(frozen=True)
class Run:
    steps: tuple[tuple[int, str, str], ...]  # (node, owner, action)
    label: str


# parsing

_TOKEN = re.compile(r'\s+|;[^\n]*|(?P<open>\()|(?P<close>\))|"(?P<str>[^"\n]*)"|(?P<atom>[^\s();"]+)')


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ProtocolSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        col = pos - line_start + 1
        if m.group("open"):
            out.append(_Tok("(", "(", line, col))
        elif m.group("close"):
            out.append(_Tok(")", ")", line, col))
        elif m.group("str") is not None:
            out.append(_Tok("atom", m.group("str"), line, col))
        elif m.group("atom"):
            out.append(_Tok("atom", m.group("atom"), line, col))
        chunk = m.group(0)
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    return out


def _read(tokens: list[_Tok]) -> list:
    """Nested lists of tokens; each list is tagged with its opening token."""
    stack: list[list] = [[]]
    opens: list[_Tok] = []
    for tok in tokens:
        if tok.kind == "(":
            opens.append(tok)
            stack.append([])
        elif tok.kind == ")":
            if not opens:
                raise ProtocolSyntaxError("unbalanced ')'", tok.line, tok.col)
            form = _Form(opens.pop(), stack.pop())
            stack[-1].append(form)
        else:
            stack[-1].append(tok)
    if opens:
        tok = opens[-1]
        raise ProtocolSyntaxError("unclosed '('", tok.line, tok.col)
    return stack[0]


@dataclass
class _Form:
    start: _Tok
    items: list

    def head(self) -> str | None:
        if self.items and isinstance(self.items[0], _Tok):
            return self.items[0].text
        return None


def _atom(item, what: str, where: _Tok) -> _Tok:
    if not isinstance(item, _Tok):
        pos = item.start if isinstance(item, _Form) else where
        raise ProtocolSyntaxError(f"expected {what}", pos.line, pos.col)
    return item


class _Builder:
    def __init__(self, declared: list[str] | None):
        self.declared = declared
        self.nodes: list[Node | None] = []
        self.seen_agents: list[str] = []

    def tree(self, item) -> int:
        if not isinstance(item, _Form):
            tok = item
            raise ProtocolSyntaxError(f"expected a (node ...) or (outcome ...) form, got {tok.text!r}",
                                      tok.line, tok.col)
        head = item.head()
        if head == "outcome":
            if len(item.items) != 2:
                where = item.items[1] if len(item.items) > 2 else item.start
                where = where.start if isinstance(where, _Form) else where
                msg = "leaf has no outcome label" if len(item.items) < 2 else \
                    "leaf takes exactly one outcome label"
                raise ProtocolSyntaxError(msg, where.line, where.col)
            label = _atom(item.items[1], "an outcome label", item.start).text
            self.nodes.append(Node(None, label=label))
            return len(self.nodes) - 1
        if head != "node":
            raise ProtocolSyntaxError(f"unknown form {head!r}", item.start.line, item.start.col)
        if len(item.items) < 2:
            raise ProtocolSyntaxError("node has no owner", item.start.line, item.start.col)
        owner_tok = _atom(item.items[1], "an owner agent", item.start)
        owner = owner_tok.text
        if self.declared is not None and owner not in self.declared:
            raise ProtocolSyntaxError(f"unknown agent {owner!r}", owner_tok.line, owner_tok.col)
        if owner not in self.seen_agents:
            self.seen_agents.append(owner)
        branches = item.items[2:]
        if not branches:
            raise ProtocolSyntaxError("node has no actions", item.start.line, item.start.col)
        index = len(self.nodes)
        self.nodes.append(None)
        actions, children = [], []
        for br in branches:
            if not isinstance(br, _Form) or len(br.items) != 2:
                pos = br.start if isinstance(br, _Form) else br
                raise ProtocolSyntaxError("branch must be (ACTION subtree)", pos.line, pos.col)
            act = _atom(br.items[0], "an action name", br.start)
            if act.text in actions:
                raise ProtocolSyntaxError(f"duplicate action {act.text!r} at this node",
                                          act.line, act.col)
            actions.append(act.text)
            children.append(self.tree(br.items[1]))
        self.nodes[index] = Node(owner, tuple(actions), tuple(children))
        return index


def parse_protocol(text: str) -> ProtocolTree:
    forms = _read(_tokenize(text))
    declared: list[str] | None = None
    objectives: list[tuple[str, tuple[str, ...]]] = []
    body = []
    for form in forms:
        if isinstance(form, _Form) and form.head() == "agents":
            if declared is not None:
                raise ProtocolSyntaxError("agents declared twice", form.start.line, form.start.col)
            declared = [_atom(x, "an agent name", form.start).text for x in form.items[1:]]
            if len(set(declared)) != len(declared):
                raise ProtocolSyntaxError("duplicate agent declaration", form.start.line,
                                          form.start.col)
        elif isinstance(form, _Form) and form.head() == "objective":
            parts = [_atom(x, "an objective name or label", form.start).text
                     for x in form.items[1:]]
            if not parts:
                raise ProtocolSyntaxError("objective needs a name", form.start.line, form.start.col)
            objectives.append((parts[0], tuple(parts[1:])))
        else:
            body.append(form)
    if len(body) != 1:
        if not body:
            raise ProtocolSyntaxError("no protocol tree found", 1, 1)
        extra = body[1]
        pos = extra.start if isinstance(extra, _Form) else extra
        raise ProtocolSyntaxError("more than one protocol tree", pos.line, pos.col)
    builder = _Builder(declared)
    builder.tree(body[0])
    agents = tuple(declared) if declared is not None else tuple(builder.seen_agents)
    return ProtocolTree(tuple(builder.nodes), agents, tuple(objectives))


def _quote(atom: str) -> str:
    if atom and re.fullmatch(r'[^\s();"]+', atom):
        return atom
    return '"' + atom + '"'


def format_protocol(tree: ProtocolTree, indent: int = 2) -> str:
    """Canonical source text; parsing it gives back an equal tree."""
    lines = ["(agents " + " ".join(_quote(a) for a in tree.agents) + ")"]
    for name, labels in tree.objectives:
        lines.append("(objective " + " ".join(_quote(x) for x in (name, *labels)) + ")")

    def emit(k: int, depth: int) -> list[str]:
        node = tree.nodes[k]
        pad = " " * (indent * depth)
        if node.is_leaf:
            return [f"{pad}(outcome {_quote(node.label)})"]
        out = [f"{pad}(node {_quote(node.owner)}"]
        for act, child in zip(node.actions, node.children):
            if tree.nodes[child].is_leaf:
                out.append(f"{pad}{' ' * indent}({_quote(act)} "
                           f"(outcome {_quote(tree.nodes[child].label)}))")
                continue
            sub = emit(child, depth + 2)
            sub[0] = f"{pad}{' ' * indent}({_quote(act)}\n" + sub[0]
            sub[-1] += ")"
            out.extend(sub)
        out[-1] += ")"
        return out

    return "\n".join(lines + emit(tree.root, 0)) + "\n"


# plans and runs

def plans(tree: ProtocolTree, agent: str) -> list[Plan]:
    """Every plan of ``agent``; later nodes vary fastest."""
    mine = tree.nodes_of(agent)
    return list(itertools.product(*(range(len(tree.nodes[k].actions)) for k in mine)))


def count_plans(tree: ProtocolTree, agent: str) -> int:
    total = 1
    for k in tree.nodes_of(agent):
        total *= len(tree.nodes[k].actions)
    return total


def plan_name(tree: ProtocolTree, agent: str, plan: Plan) -> str:
    mine = tree.nodes_of(agent)
    if not mine:
        return "noop"
    return "/".join(tree.nodes[k].actions[a] for k, a in zip(mine, plan))


def play(tree: ProtocolTree, profile: Sequence[Plan]) -> Run:
    """Follow each owner's planned action from the root down to a leaf."""
    if len(profile) != len(tree.agents):
        raise GameError(f"expected {len(tree.agents)} plans, got {len(profile)}")
    choice = {}
    for agent, plan in zip(tree.agents, profile):
        mine = tree.nodes_of(agent)
        if len(plan) != len(mine):
            raise GameError(f"plan for {agent} must cover {len(mine)} nodes")
        choice.update(zip(mine, plan))
    steps = []
    k = tree.root
    while not tree.nodes[k].is_leaf:
        node = tree.nodes[k]
        a = choice[k]
        steps.append((k, node.owner, node.actions[a]))
        k = node.children[a]
    return Run(tuple(steps), tree.nodes[k].label)


def plan_profiles(tree: ProtocolTree) -> Iterator[tuple[Plan, ...]]:
    return itertools.product(*(plans(tree, a) for a in tree.agents))


def to_frame(tree: ProtocolTree) -> GameFrame:
    """Strategic form: strategies are plans, outcomes are distinct leaf labels."""
    per_agent = [plans(tree, a) for a in tree.agents]
    names = [[plan_name(tree, a, p) for p in ps] for a, ps in zip(tree.agents, per_agent)]
    labels = [play(tree, prof).label for prof in itertools.product(*per_agent)]
    reached = [x for x in tree.labels() if x in set(labels)]
    return GameFrame.build(tree.agents, names, reached, labels)


def objectives_of(tree: ProtocolTree, frame: GameFrame | None = None) -> dict[str, list[str]]:
    """Named objectives restricted to outcomes that some profile reaches."""
    frame = frame or to_frame(tree)
    out = {}
    for name, labels in tree.objectives:
        kept = [x for x in labels if x in frame.outcomes]
        if len(kept) != len(labels):
            warnings.warn(f"objective {name!r}: dropping unreachable outcomes "
                          f"{[x for x in labels if x not in kept]}", stacklevel=2)
        out[name] = kept
    return out


def load_protocol(path) -> ProtocolTree:
    with open(path, encoding="utf-8") as fh:
        return parse_protocol(fh.read())
