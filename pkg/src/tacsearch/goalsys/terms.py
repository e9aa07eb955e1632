"""Terms, equations and goals over the fixed nat/list signature.

Terms are immutable and hash-stable so they can be shared freely between
searches. Printing is canonical: ``add(0,x)`` inside terms, ``l = r`` for
equations and ``h1, h2 |- c`` for goals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping

# symbol -> (argument sorts, result sort)
SIGNATURE: dict[str, tuple[tuple[str, ...], str]] = {
    "0": ((), "nat"),
    "S": (("nat",), "nat"),
    "add": (("nat", "nat"), "nat"),
    "mul": (("nat", "nat"), "nat"),
    "nil": ((), "list"),
    "cons": (("nat", "list"), "list"),
    "app": (("list", "list"), "list"),
    "len": (("list",), "nat"),
    "rev": (("list",), "list"),
}

SORTS = ("nat", "list")


class SortError(ValueError):
    pass


class Var:
    __slots__ = ("name", "_hash")

    def __init__(self, name: str):
        if not name or not (name[0].islower() and name.replace("_", "a").isalnum()):
            raise ValueError(f"bad variable name {name!r}")
        if name in SIGNATURE:
            raise ValueError(f"variable name {name!r} clashes with a signature symbol")
        self.name = name
        self._hash = hash(("V", name))

    def __eq__(self, other):
        return isinstance(other, Var) and other.name == self.name

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Var({self.name!r})"

    def __str__(self):
        return self.name

    @property
    def size(self) -> int:
        return 1


class App:
    __slots__ = ("sym", "args", "_hash", "size")

    def __init__(self, sym: str, args: tuple[Term, ...] = ()):
        try:
            arg_sorts, _ = SIGNATURE[sym]
        except KeyError:
            raise ValueError(f"unknown symbol {sym!r}") from None
        if len(args) != len(arg_sorts):
            raise ValueError(f"{sym} expects {len(arg_sorts)} arguments, got {len(args)}")
        self.sym = sym
        self.args = tuple(args)
        self._hash = hash((sym, self.args))
        self.size = 1 + sum(a.size for a in self.args)

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, App)
            and other._hash == self._hash
            and other.sym == self.sym
            and other.args == self.args
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"App({self.sym!r}, {self.args!r})"

    def __str__(self):
        if not self.args:
            return self.sym
        return f"{self.sym}({','.join(str(a) for a in self.args)})"


Term = Var | App


def const(sym: str) -> App:
    return App(sym, ())


def subterms(t: Term) -> Iterator[Term]:
    """Pre-order enumeration, duplicates included."""
    stack = [t]
    while stack:
        s = stack.pop()
        yield s
        if isinstance(s, App):
            stack.extend(reversed(s.args))


def term_vars(t: Term) -> list[str]:
    """Variable names in order of first occurrence."""
    seen: dict[str, None] = {}
    for s in subterms(t):
        if isinstance(s, Var):
            seen.setdefault(s.name)
    return list(seen)


def substitute(t: Term, sub: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return sub.get(t.name, t)
    if not t.args:
        return t
    new_args = tuple(substitute(a, sub) for a in t.args)
    if all(n is o for n, o in zip(new_args, t.args)):
        return t
    return App(t.sym, new_args)


def rename(t: Term, mapping: Mapping[str, str]) -> Term:
    return substitute(t, {k: Var(v) for k, v in mapping.items()})


def mask_vars(t: Term) -> str:
    """Print with every variable replaced by the placeholder ``V``."""
    if isinstance(t, Var):
        return "V"
    if not t.args:
        return t.sym
    return f"{t.sym}({','.join(mask_vars(a) for a in t.args)})"


@dataclass(frozen=True)
class Equation:
    lhs: Term
    rhs: Term

    def __str__(self):
        return f"{self.lhs} = {self.rhs}"

    def swap(self) -> Equation:
        return Equation(self.rhs, self.lhs)

    def vars(self) -> list[str]:
        out = term_vars(self.lhs)
        out += [v for v in term_vars(self.rhs) if v not in out]
        return out

    def map(self, f) -> Equation:
        return Equation(f(self.lhs), f(self.rhs))


@dataclass(frozen=True)
class Goal:
    """Hypotheses (ordered) plus a conclusion; variables are universal at goal level."""

    hyps: tuple[Equation, ...]
    concl: Equation
    _key: str = field(default="", init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "hyps", tuple(self.hyps))
        var_sorts(self)  # rejects ill-sorted goals early

    def __str__(self):
        if self.hyps:
            return ", ".join(str(h) for h in self.hyps) + " |- " + str(self.concl)
        return "|- " + str(self.concl)

    def equations(self) -> tuple[Equation, ...]:
        return self.hyps + (self.concl,)

    def vars(self) -> list[str]:
        out: list[str] = []
        for eq in self.equations():
            out += [v for v in eq.vars() if v not in out]
        return out

    @property
    def key(self) -> str:
        """Alpha-canonical text: variables renamed by first occurrence."""
        if not self._key:
            mapping = {v: f"v{i}" for i, v in enumerate(self.vars())}
            renamed = Goal(
                tuple(e.map(lambda t: rename(t, mapping)) for e in self.hyps),
                self.concl.map(lambda t: rename(t, mapping)),
            )
            object.__setattr__(self, "_key", str(renamed))
        return self._key

    def substitute(self, sub: Mapping[str, Term]) -> Goal:
        f = lambda t: substitute(t, sub)  # noqa: E731
        return Goal(tuple(h.map(f) for h in self.hyps), self.concl.map(f))


def alpha_equiv(g1: Goal, g2: Goal) -> bool:
    return g1.key == g2.key


def list_subsumed(l1: list[Goal] | tuple[Goal, ...], l2: list[Goal] | tuple[Goal, ...]) -> bool:
    """Every goal of ``l1`` is alpha-equivalent to some goal of ``l2``."""
    keys = {g.key for g in l2}
    return all(g.key in keys for g in l1)


def term_sort(t: Term, env: Mapping[str, str]) -> str | None:
    if isinstance(t, Var):
        return env.get(t.name)
    return SIGNATURE[t.sym][1]


def _constrain(t: Term, expected: str | None, env: dict[str, str]) -> bool:
    changed = False
    if isinstance(t, Var):
        if expected is not None:
            have = env.get(t.name)
            if have is None:
                env[t.name] = expected
                changed = True
            elif have != expected:
                raise SortError(f"variable {t.name} used as both {have} and {expected}")
        return changed
    arg_sorts, result = SIGNATURE[t.sym]
    if expected is not None and expected != result:
        raise SortError(f"{t} has sort {result}, expected {expected}")
    for a, s in zip(t.args, arg_sorts):
        changed |= _constrain(a, s, env)
    return changed


def equation_sorts(eqs, env: dict[str, str] | None = None) -> dict[str, str]:
    env = {} if env is None else env
    changed = True
    while changed:
        changed = False
        for eq in eqs:
            sl, sr = term_sort(eq.lhs, env), term_sort(eq.rhs, env)
            if sl is not None and sr is not None and sl != sr:
                raise SortError(f"sides of {eq} have sorts {sl} and {sr}")
            s = sl or sr
            changed |= _constrain(eq.lhs, s, env)
            changed |= _constrain(eq.rhs, s, env)
    for eq in eqs:
        for v in eq.vars():
            env.setdefault(v, "nat")
    return env


def var_sorts(goal: Goal) -> dict[str, str]:
    """Sort of every variable of the goal; unconstrained variables default to nat."""
    return equation_sorts(goal.equations())


def fresh_name(base: str, taken) -> str:
    if base not in taken and base not in SIGNATURE:
        return base
    i = 0
    while f"{base}{i}" in taken:
        i += 1
    return f"{base}{i}"
