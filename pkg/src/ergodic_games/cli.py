"""``ergodic-games`` command line: analyze, solve and verify game files.

Exit codes: 0 success, 1 input error, 2 non-termination, 3 verification
failure, 4 too large to verify exhaustively.
"""

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import oracle, solver, structure
from .model import EntropyGame, GameFormatError, PolicyCapExceeded, TurnBasedGame, game_to_dict, load_game
from .operators import KMOperator, ShapleyOperator
from .numeric import bottom, top

EXIT_OK, EXIT_INPUT, EXIT_NONTERM, EXIT_VERIFY, EXIT_CAP = 0, 1, 2, 3, 4
VALUE_SLACK = 1e-12


def _num(x):
    """JSON-friendly scalar: Fractions as exact strings."""
    if x is None:
        return None
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x.numerator)
    if isinstance(x, (int, np.integer)):
        return int(x)
    return float(x)


def _fmt(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def _policy_names(g, sigma, tau):
    if isinstance(g, EntropyGame):
        s = {g.despot[d]: g.tribune[t] for d, t in enumerate(sigma)}
        t = {g.tribune[k]: g.people[p] for k, p in enumerate(tau) if p is not None}
        return s, t
    s = {g.names[i]: g.min_actions[i][a] for i, a in enumerate(sigma)}
    t = {g.names[i]: g.max_actions[i][b] for i, b in enumerate(tau)}
    return s, t


# -- analyze ----------------------------------------------------------------

def _analyze_stochastic(g, epsilon):
    rep = structure.analyze(g)
    out = {
        "kind": g.kind, "n": g.n, "is_unichain": rep.is_unichain, "is_irreducible": rep.is_irreducible,
        "k_uni": rep.k_uni, "k_irr": rep.k_irr, "p_min": _num(rep.p_min), "theta": _num(rep.theta),
        "q": rep.q, "gamma": _num(rep.gamma), "notes": rep.notes,
    }
    lines = [f"game: {g.kind}, {g.n} states"]
    status = {True: "yes", False: "no", None: "unverified"}
    lines.append(f"unichain: {status[rep.is_unichain]}")
    lines.append(f"irreducible: {status[rep.is_irreducible]}")
    if rep.p_min is not None:
        lines.append(f"p_min = {_fmt(rep.p_min)}, theta = {_fmt(rep.theta)}")
    if rep.k_uni is not None:
        lines.append(f"unichain index k_uni = {rep.k_uni}")
    if rep.k_irr is not None:
        lines.append(f"irreducibility index k_irr = {rep.k_irr}")
    if rep.gamma is not None:
        lines.append(f"T_theta^{rep.q} is a contraction of rate {_fmt(rep.gamma)}")
        t0 = KMOperator(ShapleyOperator(g), rep.theta)(np.zeros(g.n))
        s = 1 - float(rep.theta)
        bound = solver.predict_iteration_bound(rep.q, float(rep.gamma), float(top(t0) - bottom(t0)), s * epsilon)
        cor = solver.game_data_iteration_bound(epsilon, rep.theta, rep.k_uni, rep.payoff_sup)
        out["predicted_iterations"] = bound
        out["data_iteration_bound"] = cor
        lines.append(f"predicted iterations for epsilon={epsilon:g}: {bound} (from game data: {math.ceil(cor)})")
    else:
        lines.append("no contraction certificate")
    if isinstance(g, TurnBasedGame) and g.exact:
        try:
            eps = structure.turnbased_epsilon(g, rep.theta)
            out["exact_epsilon"] = str(eps)
            lines.append(f"precision for exact policies: {eps}")
        except ValueError as exc:
            lines.append(f"exact solving unavailable: {exc}")
    lines.extend(f"note: {x}" for x in rep.notes)
    return out, lines


def _analyze_entropy(g):
    rep = structure.entropy_structure(g)
    out = dict(vars(rep), kind="entropy")
    lines = [
        f"game: entropy, {g.n} Despot vertices",
        f"irreducible: {'yes' if rep.is_irreducible else 'no'}",
        f"irreducibility index k_irr = {rep.k_irr}",
        f"W = {rep.W}, m_lower = {rep.m_lower}, vartheta = {rep.vartheta}",
        f"ambiguities A_l = {rep.ambiguity_l}, A = {rep.ambiguity:.10g}",
        f"M_bar = {rep.M_bar:.10g}",
        f"T_m^{rep.k_irr} is a contraction of rate {rep.gamma:.10g}",
        f"log nu_n = {rep.nu_n_log:.10g}, log epsilon for exact policies = {rep.epsilon_log:.10g}",
        f"predicted iterations for exact policies: {math.ceil(rep.predicted_iterations)}",
    ]
    return out, lines


def cmd_analyze(args):
    g = load_game(args.game)
    if isinstance(g, EntropyGame):
        out, lines = _analyze_entropy(g)
    else:
        out, lines = _analyze_stochastic(g, args.epsilon)
    print("\n".join(lines))
    if args.out:
        _write_json(args.out, out)
    return EXIT_OK


# -- solve ------------------------------------------------------------------

def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _certificate_doc(g, cert, pol, mode):
    lo, hi = cert.rescaled_value_interval
    return {
        "format": "ergodic-games-certificate",
        "mode": mode,
        "game": game_to_dict(g),
        "epsilon": float(cert.epsilon),
        "eta": float(cert.eta),
        "theta": _num(cert.theta),
        "vartheta": _num(cert.vartheta),
        "iterations": cert.iterations,
        "alpha": float(cert.alpha),
        "beta": float(cert.beta),
        "x": [float(v) for v in cert.x],
        "value_interval": [lo, hi],
        "policies": None if pol is None else {
            "sigma": list(pol.sigma_star),
            "tau": list(pol.tau_star),
            "claimed_value": _num(pol.claimed_value),
            "method": pol.method,
        },
    }


def cmd_solve(args):
    g = load_game(args.game)
    if not args.epsilon > 0:
        raise ValueError("--epsilon must be > 0")
    if args.eta is not None and not 0 < args.eta <= args.epsilon / 3:
        raise ValueError("--eta must satisfy 0 < eta <= epsilon/3")
    theta = None if args.theta is None else Fraction(args.theta).limit_denominator(10**12)
    if isinstance(g, EntropyGame):
        mode = "exact_policies" if args.exact else "approx"
        cert, pol, _ = solver.solve_entropy(g, mode, args.epsilon, args.max_iters)
    elif args.exact:
        if not isinstance(g, TurnBasedGame):
            raise ValueError("--exact needs a turn-based game")
        mode = "exact"
        cert, pol = solver.solve_turnbased_exact(g, args.max_iters)
    else:
        mode = "approx"
        cert, pol, _ = solver.solve(g, args.epsilon, args.eta, theta, args.max_iters)
    if args.trace:
        solver.write_trace_csv(cert, args.trace)
    if not cert.terminated:
        print(f"no convergence after {cert.iterations} iterations "
              f"(last residual {cert.residual_trace[-1][1]:.6g}); no certificate written")
        return EXIT_NONTERM
    lo, hi = cert.rescaled_value_interval
    print(f"terminated after {cert.iterations} iterations")
    print(f"value in [{lo:.12g}, {hi:.12g}]")
    if pol is not None:
        print(f"claimed value: {_fmt(pol.claimed_value)} ({pol.method})")
        s, t = _policy_names(g, pol.sigma_star, pol.tau_star)
        print("min policy: " + ", ".join(f"{k} -> {v}" for k, v in s.items()))
        print("max policy: " + ", ".join(f"{k} -> {v}" for k, v in t.items()))
    print("x = " + " ".join(f"{float(v):.10g}" for v in cert.x))
    if args.cert:
        _write_json(args.cert, _certificate_doc(g, cert, pol, mode))
    return EXIT_OK


# -- verify -----------------------------------------------------------------

def cmd_verify(args):
    g = load_game(args.game)
    with open(args.cert) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GameFormatError(f"certificate is not valid JSON: {exc}") from None
    if doc.get("format") != "ergodic-games-certificate":
        raise GameFormatError("not an ergodic-games certificate")
    if doc.get("game") != json.loads(json.dumps(game_to_dict(g))):
        raise GameFormatError("certificate was issued for a different game")
    lo, hi = doc["value_interval"]
    try:
        if isinstance(g, EntropyGame):
            res = oracle.entropy_saddle(g)
        elif isinstance(g, TurnBasedGame):
            res = oracle.turnbased_saddle(g)
        else:
            print("unverifiable: the pure-policy oracle does not apply to concurrent games")
            return EXIT_CAP
    except PolicyCapExceeded as exc:
        print(f"unverifiable at desk scale: {exc}")
        return EXIT_CAP
    value = res.value
    if isinstance(value, tuple):
        print(f"oracle values differ between states: {value}")
        return EXIT_VERIFY
    ok = lo - VALUE_SLACK <= float(value) <= hi + VALUE_SLACK
    print(f"oracle value: {_fmt(value)}")
    print(f"certificate interval [{lo:.12g}, {hi:.12g}]: {'contains' if ok else 'MISSES'} the oracle value")
    pol = doc.get("policies")
    if pol is not None:
        tau = tuple(None if t is None else int(t) for t in pol["tau"])
        is_saddle = res.is_saddle(tuple(pol["sigma"]), tau)
        print(f"certificate policies {'form' if is_saddle else 'do NOT form'} an oracle saddle point")
        ok = ok and is_saddle
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser():
    p = argparse.ArgumentParser(prog="ergodic-games",
                                description="Certified solving of mean-payoff and entropy games.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="structural analysis and contraction certificate")
    a.add_argument("game")
    a.add_argument("--epsilon", type=float, default=solver.DEFAULT_EPSILON,
                   help="precision used for the predicted iteration count")
    a.add_argument("--out", help="write the report as JSON")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("solve", help="run relative value iteration")
    s.add_argument("game")
    s.add_argument("--epsilon", type=float, default=solver.DEFAULT_EPSILON)
    s.add_argument("--eta", type=float, help="operator evaluation error (default: derived from epsilon)")
    s.add_argument("--theta", type=float, help="damping factor override")
    s.add_argument("--max-iters", type=int)
    s.add_argument("--exact", action="store_true", help="recover exactly optimal policies")
    s.add_argument("--trace", help="write the residual trace as CSV")
    s.add_argument("--cert", help="write the certificate as JSON")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a certificate against brute-force enumeration")
    v.add_argument("game")
    v.add_argument("--cert", required=True)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PolicyCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (GameFormatError, ValueError, TypeError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
