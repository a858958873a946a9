"""Game data model, validation, JSON ingestion and pure-policy enumeration.

Three game classes are supported:

* :class:`ConcurrentGame` -- finite states and actions, payments ``r[i][a, b]``
  made by Min to Max and transition rows ``P[i][a, b, :]``.
* :class:`TurnBasedGame` -- a concurrent game in which every state's stage
  game is decided by pure actions (one player is a dummy, or one player moves
  first and only one of its options gives the other player a choice).
* :class:`EntropyGame` -- Despot / Tribune / People tripartite multigraph.
"""

import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from pathlib import Path

import numpy as np

from .numeric import ROW_SUM_TOL

DEFAULT_POLICY_CAP = 10**6
MIN, MAX = "MIN", "MAX"


class GameFormatError(ValueError):
    """Malformed or inconsistent game description."""


class PolicyCapExceeded(RuntimeError):
    """Exhaustive enumeration would exceed the configured policy cap."""

    def __init__(self, count, cap):
        super().__init__(f"policy enumeration of {count} pairs exceeds the cap of {cap}")
        self.count = count
        self.cap = cap


def policy_cap(cap=None):
    if cap is not None:
        return int(cap)
    env = os.environ.get("ERGODIC_GAMES_POLICY_CAP")
    return int(env) if env else DEFAULT_POLICY_CAP


@dataclass(frozen=True)
class PurePolicyPair:
    """One action per decision point for each player.

    For stochastic games ``sigma[i]`` indexes ``A(i)`` and ``tau[i]`` indexes
    ``B(i)``. For entropy games ``sigma[d]`` is the Tribune vertex chosen at
    Despot vertex ``d`` and ``tau[t]`` the People vertex chosen at Tribune
    vertex ``t`` (``None`` for Tribune vertices no Despot can reach).
    """

    sigma: tuple
    tau: tuple


def _parse_number(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float, str)):
        raise GameFormatError(f"{where}: expected a number or 'p/q' string, got {x!r}")
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise GameFormatError(f"{where}: cannot parse rational {x!r}") from None
    if not math.isfinite(x):
        raise GameFormatError(f"{where}: non-finite number {x!r}")
    return x


def _check_keys(obj, allowed, required, where):
    if not isinstance(obj, dict):
        raise GameFormatError(f"{where}: expected an object")
    unknown = set(obj) - set(allowed)
    if unknown:
        raise GameFormatError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = set(required) - set(obj)
    if missing:
        raise GameFormatError(f"{where}: missing field(s) {sorted(missing)}")


@dataclass(frozen=True, eq=False)
class ConcurrentGame:
    """Finite zero-sum stochastic game.

    Attributes
    ----------
    names : tuple of str
    min_actions, max_actions : tuple of tuple of str
        Action labels ``A(i)`` and ``B(i)`` per state.
    payoff : tuple of (|A(i)|, |B(i)|) float arrays
    transition : tuple of (|A(i)|, |B(i)|, n) float arrays
    payoff_exact, transition_exact : tuple of object arrays or None
        Fraction versions, present in exact mode.
    """

    names: tuple
    min_actions: tuple
    max_actions: tuple
    payoff: tuple
    transition: tuple
    payoff_exact: tuple = None
    transition_exact: tuple = None
    kind = "concurrent"

    @classmethod
    def from_arrays(cls, payoff, transition, names=None, min_actions=None,
                    max_actions=None, exact=None):
        """Build and validate a game from nested lists.

        Entries may be numbers, Fractions or ``"p/q"`` strings. Any Fraction or
        string entry switches the game to exact mode unless `exact` is given.
        """
        n = len(payoff)
        if n == 0:
            raise GameFormatError("game needs at least one state")
        if len(transition) != n:
            raise GameFormatError(f"payoff has {n} states but transition has {len(transition)}")
        names = tuple(names) if names is not None else tuple(str(i + 1) for i in range(n))
        parsed_r, parsed_p = [], []
        saw_rational = False
        for i in range(n):
            ri = [[_parse_number(x, f"payoff[{i}][{a}][{b}]") for b, x in enumerate(row)]
                  for a, row in enumerate(payoff[i])]
            pi = [[[_parse_number(x, f"transition[{i}][{a}][{b}][{j}]") for j, x in enumerate(col)]
                   for b, col in enumerate(row)] for a, row in enumerate(transition[i])]
            saw_rational |= any(isinstance(x, Fraction) for row in ri for x in row)
            saw_rational |= any(isinstance(x, Fraction) for row in pi for col in row for x in col)
            parsed_r.append(ri)
            parsed_p.append(pi)
        if exact is None:
            exact = saw_rational
        if min_actions is None:
            min_actions = [[f"a{k}" for k in range(len(parsed_r[i]))] for i in range(n)]
        if max_actions is None:
            max_actions = [[f"b{k}" for k in range(len(parsed_r[i][0]) if parsed_r[i] else 0)]
                           for i in range(n)]
        min_actions = tuple(tuple(a) for a in min_actions)
        max_actions = tuple(tuple(b) for b in max_actions)

        r_float, p_float, r_exact, p_exact = [], [], [], []
        for i in range(n):
            na, nb = len(min_actions[i]), len(max_actions[i])
            where = f"state {i} ({names[i]!r})"
            if na < 1 or nb < 1:
                raise GameFormatError(f"{where}: action sets must be nonempty")
            if len(parsed_r[i]) != na or any(len(row) != nb for row in parsed_r[i]):
                raise GameFormatError(f"{where}: payoff must have shape ({na}, {nb})")
            if len(parsed_p[i]) != na or any(len(row) != nb for row in parsed_p[i]):
                raise GameFormatError(f"{where}: transition must have shape ({na}, {nb}, {n})")
            for a, b in product(range(na), range(nb)):
                rowp = parsed_p[i][a][b]
                if len(rowp) != n:
                    raise GameFormatError(f"{where}, actions ({a}, {b}): transition row has "
                                          f"{len(rowp)} entries, expected {n}")
                if any(x < 0 for x in rowp):
                    raise GameFormatError(f"{where}, actions ({a}, {b}): negative probability")
                if exact:
                    s = sum(Fraction(str(x)) if not isinstance(x, Fraction) else x for x in rowp)
                    bad = s != 1
                else:
                    s = math.fsum(float(x) for x in rowp)
                    bad = abs(s - 1.0) > ROW_SUM_TOL
                if bad:
                    raise GameFormatError(f"{where}, actions ({a}, {b}): row sum is {s}, expected 1")
            r_float.append(np.array([[float(x) for x in row] for row in parsed_r[i]], dtype=float))
            p_float.append(np.array([[[float(x) for x in col] for col in row] for row in parsed_p[i]],
                                    dtype=float))
            if exact:
                def frac(x):
                    return x if isinstance(x, Fraction) else Fraction(str(x))
                r_exact.append(np.array([[frac(x) for x in row] for row in parsed_r[i]], dtype=object))
                pe = np.empty((na, nb, n), dtype=object)
                for a, b, j in product(range(na), range(nb), range(n)):
                    pe[a, b, j] = frac(parsed_p[i][a][b][j])
                p_exact.append(pe)
        return cls(names, min_actions, max_actions, tuple(r_float), tuple(p_float),
                   tuple(r_exact) if exact else None, tuple(p_exact) if exact else None)

    @property
    def n(self):
        return len(self.names)

    @property
    def exact(self):
        return self.transition_exact is not None

    @property
    def action_counts(self):
        return [(len(a), len(b)) for a, b in zip(self.min_actions, self.max_actions)]

    @cached_property
    def common_denominator(self):
        """LCM of all transition denominators (exact mode only)."""
        if not self.exact:
            raise GameFormatError("common denominator needs exact ('p/q') transition probabilities")
        m = 1
        for P in self.transition_exact:
            for x in P.flat:
                m = math.lcm(m, x.denominator)
        return m

    @cached_property
    def dense(self):
        """Padded arrays ``(r, P, mask)`` of shapes (n, A, B), (n, A, B, n), (n, A, B)."""
        n = self.n
        amax = max(len(a) for a in self.min_actions)
        bmax = max(len(b) for b in self.max_actions)
        r = np.zeros((n, amax, bmax))
        P = np.zeros((n, amax, bmax, n))
        mask = np.zeros((n, amax, bmax), dtype=bool)
        for i in range(n):
            na, nb = self.payoff[i].shape
            r[i, :na, :nb] = self.payoff[i]
            P[i, :na, :nb] = self.transition[i]
            mask[i, :na, :nb] = True
        return r, P, mask

    def row_supports(self, i):
        """Distinct supports of the transition rows out of state `i`."""
        seen = []
        for row in self.transition[i].reshape(-1, self.n):
            s = frozenset(np.flatnonzero(row > 0).tolist())
            if s not in seen:
                seen.append(s)
        return seen


def _depends_only_on_first(r, P):
    """Rows of the stage game that vary with the second player's action."""
    varying = []
    for a in range(r.shape[0]):
        if np.any(r[a] != r[a, :1]) or np.any(P[a] != P[a, :1]):
            varying.append(a)
    return varying


@dataclass(frozen=True, eq=False)
class TurnBasedGame(ConcurrentGame):
    """Concurrent game whose stage games are all resolved by pure actions.

    A state is controlled by Min when ``|B(i)| = 1``, by Max when
    ``|A(i)| = 1``. A state where Min moves first and at most one of its
    options leads to a choice of Max (every other option's payment and
    transition ignore Max's action) is tagged Min as well; the dual form is
    tagged Max. In all these cases ``min_a max_b = max_b min_a`` over pure
    actions, so pure optimal policies exist.
    """

    kind = "turnbased"

    def __post_init__(self):
        self.controller  # noqa: B018 -- validates

    @cached_property
    def controller(self):
        tags = []
        for i in range(self.n):
            r, P = self.payoff[i], self.transition[i]
            na, nb = r.shape
            if nb == 1:
                tags.append(MIN)
            elif na == 1:
                tags.append(MAX)
            elif len(_depends_only_on_first(r, P)) <= 1:
                tags.append(MIN)
            elif len(_depends_only_on_first(r.T, P.transpose(1, 0, 2))) <= 1:
                tags.append(MAX)
            else:
                raise GameFormatError(
                    f"state {i} ({self.names[i]!r}): not turn-based, both players have "
                    f"{na} and {nb} effective actions")
        return tuple(tags)

    @classmethod
    def from_concurrent(cls, g):
        return cls(g.names, g.min_actions, g.max_actions, g.payoff, g.transition,
                   g.payoff_exact, g.transition_exact)


@dataclass(frozen=True, eq=False)
class EntropyGame:
    """Entropy game on a Despot / Tribune / People multigraph.

    Attributes
    ----------
    despot, tribune, people : tuple of str
        Vertex names.
    dt : tuple of tuple of int
        ``dt[d]`` lists the Tribune successors of Despot vertex ``d``.
    tp : tuple of tuple of int
        People successors of each Tribune vertex.
    pd : tuple of tuple of (int, int)
        ``(d, multiplicity)`` successors of each People vertex.
    """

    despot: tuple
    tribune: tuple
    people: tuple
    dt: tuple
    tp: tuple
    pd: tuple
    kind = "entropy"

    @classmethod
    def from_edges(cls, despot, tribune, people, edges):
        """Build from vertex name lists and ``(from, to[, multiplicity])`` edges."""
        despot, tribune, people = tuple(despot), tuple(tribune), tuple(people)
        if not despot:
            raise GameFormatError("entropy game needs at least one Despot vertex")
        names = list(despot) + list(tribune) + list(people)
        if len(set(names)) != len(names):
            raise GameFormatError("vertex names must be distinct across despot/tribune/people")
        role = {v: ("D", k) for k, v in enumerate(despot)}
        role.update({v: ("T", k) for k, v in enumerate(tribune)})
        role.update({v: ("P", k) for k, v in enumerate(people)})
        dt = [[] for _ in despot]
        tp = [[] for _ in tribune]
        pd = [[] for _ in people]
        for e in edges:
            if isinstance(e, dict):
                src, dst, mult = e.get("from"), e.get("to"), e.get("multiplicity")
            else:
                src, dst, mult = (tuple(e) + (None,))[:3]
            where = f"edge {src!r} -> {dst!r}"
            if src not in role or dst not in role:
                raise GameFormatError(f"{where}: dangling endpoint")
            (rs, ks), (rd, kd) = role[src], role[dst]
            if (rs, rd) == ("D", "T"):
                succ, item = dt[ks], kd
            elif (rs, rd) == ("T", "P"):
                succ, item = tp[ks], kd
            elif (rs, rd) == ("P", "D"):
                if isinstance(mult, bool) or not isinstance(mult, int) or mult < 1:
                    raise GameFormatError(f"{where}: multiplicity must be an integer >= 1, got {mult!r}")
                succ, item = pd[ks], (kd, mult)
            else:
                raise GameFormatError(f"{where}: edges must go D->T, T->P or P->D")
            if rs != "P" and mult is not None:
                raise GameFormatError(f"{where}: multiplicity only allowed on People->Despot edges")
            if any((s[0] if rs == "P" else s) == (item[0] if rs == "P" else item) for s in succ):
                raise GameFormatError(f"{where}: duplicate edge")
            succ.append(item)
        g = cls(despot, tribune, people, tuple(map(tuple, dt)), tuple(map(tuple, tp)),
                tuple(map(tuple, pd)))
        g._validate()
        return g

    def _validate(self):
        for d, succ in enumerate(self.dt):
            if not succ:
                raise GameFormatError(f"Despot vertex {self.despot[d]!r} has no outgoing edge")
        for t in self.reachable_tribunes:
            if not self.tp[t]:
                raise GameFormatError(f"Tribune vertex {self.tribune[t]!r} has no outgoing edge")
        for p in self.reachable_people:
            if not self.pd[p]:
                raise GameFormatError(f"People vertex {self.people[p]!r} has no outgoing edge")

    @property
    def n(self):
        return len(self.despot)

    @cached_property
    def reachable_tribunes(self):
        return sorted({t for succ in self.dt for t in succ})

    @cached_property
    def reachable_people(self):
        return sorted({p for t in self.reachable_tribunes for p in self.tp[t]})

    @cached_property
    def people_rows(self):
        """Integer row vector ``m[p, :]`` of each People vertex."""
        rows = np.zeros((len(self.people), self.n), dtype=np.int64)
        for p, succ in enumerate(self.pd):
            for d, m in succ:
                rows[p, d] = m
        return rows

    @cached_property
    def max_multiplicity(self):
        """W: largest multiplicity among People vertices Despot can reach."""
        return max(m for p in self.reachable_people for _, m in self.pd[p])


def _load_stochastic(doc, kind):
    _check_keys(doc, {"kind", "states", "payoff", "transition"},
                {"kind", "states", "payoff", "transition"}, "game")
    states = doc["states"]
    if not isinstance(states, list) or not states:
        raise GameFormatError("'states' must be a nonempty list")
    names, amin, amax = [], [], []
    for i, s in enumerate(states):
        _check_keys(s, {"name", "min_actions", "max_actions"},
                    {"name", "min_actions", "max_actions"}, f"states[{i}]")
        names.append(str(s["name"]))
        amin.append([str(a) for a in s["min_actions"]])
        amax.append([str(b) for b in s["max_actions"]])
    g = ConcurrentGame.from_arrays(doc["payoff"], doc["transition"], names, amin, amax)
    if kind == "turnbased":
        g = TurnBasedGame.from_concurrent(g)
    return g


def _load_entropy(doc):
    _check_keys(doc, {"kind", "despot", "tribune", "people", "edges"},
                {"kind", "despot", "tribune", "people", "edges"}, "game")
    for i, e in enumerate(doc["edges"]):
        _check_keys(e, {"from", "to", "multiplicity"}, {"from", "to"}, f"edges[{i}]")
    return EntropyGame.from_edges([str(v) for v in doc["despot"]], [str(v) for v in doc["tribune"]],
                                  [str(v) for v in doc["people"]], doc["edges"])


def parse_game(doc):
    """Build a game from an already decoded JSON document."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise GameFormatError("game document must be an object with a 'kind' field")
    kind = doc["kind"]
    if kind in ("concurrent", "turnbased"):
        return _load_stochastic(doc, kind)
    if kind == "entropy":
        return _load_entropy(doc)
    raise GameFormatError(f"unknown game kind {kind!r}")


def load_game(source):
    """Load a game from a path, raw bytes/str, or a binary/text stream.

    Transition probabilities and payments given as strings (``"1/3"``) are
    parsed exactly and put the game in exact mode.
    """
    if isinstance(source, (str, Path)) and not str(source).lstrip().startswith("{"):
        data = Path(source).read_bytes()
    elif hasattr(source, "read"):
        data = source.read()
    else:
        data = source
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"invalid JSON: {exc}") from None
    return parse_game(doc)


def _encode(x):
    if isinstance(x, Fraction):
        return str(x)
    return float(x)


def game_to_dict(g):
    if isinstance(g, EntropyGame):
        edges = []
        for d, succ in enumerate(g.dt):
            edges += [{"from": g.despot[d], "to": g.tribune[t]} for t in succ]
        for t, succ in enumerate(g.tp):
            edges += [{"from": g.tribune[t], "to": g.people[p]} for p in succ]
        for p, succ in enumerate(g.pd):
            edges += [{"from": g.people[p], "to": g.despot[d], "multiplicity": m} for d, m in succ]
        return {"kind": "entropy", "despot": list(g.despot), "tribune": list(g.tribune),
                "people": list(g.people), "edges": edges}
    r = g.payoff_exact if g.exact else g.payoff
    P = g.transition_exact if g.exact else g.transition
    return {
        "kind": g.kind,
        "states": [{"name": nm, "min_actions": list(a), "max_actions": list(b)}
                   for nm, a, b in zip(g.names, g.min_actions, g.max_actions)],
        "payoff": [[[_encode(x) for x in row] for row in ri] for ri in r],
        "transition": [[[[_encode(x) for x in col] for col in row] for row in pi] for pi in P],
    }


def dump_game(g):
    """Serialize to JSON text; exact games round-trip through ``"p/q"`` strings."""
    return json.dumps(game_to_dict(g), indent=1)


def induced_matrix_and_payoff(g, pp, exact=False):
    """Transition matrix ``P^{sigma,tau}`` and payment vector ``r^{sigma,tau}``."""
    if exact and not g.exact:
        raise GameFormatError("exact induced matrix requested for a floating-point game")
    Ps = g.transition_exact if exact else g.transition
    rs = g.payoff_exact if exact else g.payoff
    rows, pay = [], []
    for i, (a, b) in enumerate(zip(pp.sigma, pp.tau)):
        na, nb = rs[i].shape
        if not (0 <= a < na and 0 <= b < nb):
            raise IndexError(f"state {i}: action pair ({a}, {b}) out of range ({na}, {nb})")
        rows.append(Ps[i][a, b])
        pay.append(rs[i][a, b])
    dtype = object if exact else float
    return np.array(rows, dtype=dtype), np.array(pay, dtype=dtype)


def induced_entropy_matrix(g, pp):
    """Integer matrix ``M[d, d'] = m(tau(sigma(d)), d')``."""
    M = np.zeros((g.n, g.n), dtype=np.int64)
    for d, t in enumerate(pp.sigma):
        if t not in g.dt[d]:
            raise ValueError(f"policy uses missing edge {g.despot[d]!r} -> tribune #{t}")
        p = pp.tau[t]
        if p is None or p not in g.tp[t]:
            raise ValueError(f"policy uses missing edge {g.tribune[t]!r} -> people #{p}")
        M[d] = g.people_rows[p]
    return M


def min_policies(g):
    """All pure policies of the minimizer (Min, or Despot)."""
    if isinstance(g, EntropyGame):
        return [tuple(s) for s in product(*g.dt)]
    return [tuple(s) for s in product(*[range(len(a)) for a in g.min_actions])]


def max_policies(g):
    """All pure policies of the maximizer (Max, or Tribune)."""
    if isinstance(g, EntropyGame):
        reach = set(g.reachable_tribunes)
        choices = [g.tp[t] if t in reach else (None,) for t in range(len(g.tribune))]
        return [tuple(s) for s in product(*choices)]
    return [tuple(s) for s in product(*[range(len(b)) for b in g.max_actions])]


def policy_pair_count(g):
    if isinstance(g, EntropyGame):
        return math.prod(len(s) for s in g.dt) * math.prod(len(g.tp[t]) for t in g.reachable_tribunes)
    return math.prod(a * b for a, b in g.action_counts)


def enumerate_pure_policy_pairs(g, cap=None):
    """Yield every pure policy pair, refusing beyond `cap` pairs."""
    count = policy_pair_count(g)
    cap = policy_cap(cap)
    if count > cap:
        raise PolicyCapExceeded(count, cap)
    taus = max_policies(g)
    for s in min_policies(g):
        for t in taus:
            yield PurePolicyPair(s, t)
