"""Command-line interface: subcommand dispatch and report emission.

Reports are deterministic for a fixed (model, flags, seed): every list is
either declaration-ordered or explicitly sorted, and exact rationals are
rendered as "num/den" strings. Exit status is nonzero when a requested
check fails or a premise is violated; "not separated" and "not implied
independent" verdicts count as failed checks for scripting purposes.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import covsign as cs
from . import oracle
from .causes import CoCauseKind, canonical_representation
from .expansion import expand, stratum_conditioning_set, stratum_independent
from .graph import GraphError, find_unblocked_path
from .modelfile import Model, ModelError, load_model
from .scm import DEFAULT_WORLD_BUDGET, dedupe_states, joint_distribution
from .signs import Sign, detect_monotonic_effect, is_constant_in, monotonically_associated


class CliError(Exception):
    """Fatal usage or model problem; message goes to stderr, exit 2."""


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _render_path(path) -> str:
    return str(path) if path is not None else ""


def _term_dict(term) -> dict:
    return {
        "cocause": "one" if term.cocause.kind is CoCauseKind.ONE else list(term.cocause.states),
        "literals": [l.render() for l in term.literals],
        "rendered": term.render(),
    }


def _conclusion_dict(c: cs.SignConclusion) -> dict:
    out = {
        "quantity": c.quantity.render(),
        "relation": c.relation.value,
        "rule": c.rule,
        "premises": list(c.premises),
    }
    if c.other is not None:
        out["reference"] = c.other.render()
    return out


def _emit(report: dict, text_lines: list[str], fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(report, indent=2))
    else:
        for line in text_lines:
            print(line)


# -- covsign pipeline ---------------------------------------------------------

def _pair_nodes(model: Model, d: str) -> tuple[str, str]:
    parents = model.dag.parents(d)
    if len(parents) != 2:
        raise CliError(
            f"{d} has parents {list(parents)}; the covariance rule set needs exactly two "
            "(marginalize any others first)"
        )
    return parents[0], parents[1]


def _pair_polarity(model: Model, d: str, e1: str, e2: str) -> tuple[bool, bool]:
    if d in model.tables:
        table = dedupe_states(model.tables[d])
        out = []
        for p in (e1, e2):
            s = detect_monotonic_effect(table, p)
            if s is Sign.UNDEFINED:
                raise CliError(f"{p} has no monotonic effect on {d}; the rule set does not apply")
            out.append(s is Sign.NEGATIVE)
        return (out[0], out[1])
    out = []
    for p in (e1, e2):
        s = model.dag.signs.get((p, d))
        if s is None:
            raise CliError(f"edge {p}->{d} carries no sign and no equation is given")
        out.append(s == "-")
    return (out[0], out[1])


def _facts_from_assertions(
    model: Model, d: str, e1: str, e2: str, negative: tuple[bool, bool]
) -> cs.RepFacts:
    from .graph import d_separated
    from .signs import qualitative_cov_sign

    flags = {"a0": cs.Flag.NEITHER, "a1": cs.Flag.NEITHER, "a2": cs.Flag.NEITHER, "a3": cs.Flag.NEITHER}
    sources: dict[str, str] = {}
    indep = {"e_indep": False, "a1_a2_indep": False, "a0_a1_indep": False, "a0_a2_indep": False}
    e_cov = cs.CovFact.UNKNOWN
    parity = sum(negative) % 2

    def slot_map(x: str, y: str, slot: str) -> str | None:
        if (x, y) == (e1, e2):
            return slot
        if (x, y) == (e2, e1):
            return {"a0": "a0", "a1": "a2", "a2": "a1", "a3": "a3"}[slot]
        return None

    for a in model.assertions:
        if a.kind in ("no-synergism", "rep-flag") and a.args[0] == d:
            if a.kind == "no-synergism":
                slot, value = slot_map(a.args[1], a.args[2], "a3"), "zero"
            else:
                slot, value = slot_map(a.args[1], a.args[2], a.args[3]), a.args[4]
            if slot is not None:
                flags[slot] = cs.Flag.ZERO if value == "zero" else cs.Flag.ONE
                sources[slot] = "assertion"
        elif a.kind == "independent" and {a.args[0], a.args[1]} == {e1, e2}:
            indep["e_indep"] = True
            sources["e_indep"] = "assertion"
        elif a.kind == "cocause-independent" and a.args[0] == d:
            s1 = slot_map(a.args[1], a.args[2], a.args[3])
            s2 = slot_map(a.args[1], a.args[2], a.args[4])
            if s1 is not None and s2 is not None:
                key = "_".join(sorted((s1, s2))) + "_indep"
                if key in indep:
                    indep[key] = True
                    sources[key] = "assertion"
        elif a.kind == "cov-sign" and {a.args[0], a.args[1]} == {e1, e2}:
            fact = {"<=0": cs.CovFact.LE0, ">=0": cs.CovFact.GE0, "=0": cs.CovFact.EQ0}[a.args[2]]
            e_cov = fact.flipped() if parity else fact
            sources["e_cov"] = "assertion"

    if not indep["e_indep"] and d_separated(model.dag, e1, e2):
        indep["e_indep"] = True
        sources["e_indep"] = "structural"
    if e_cov is cs.CovFact.UNKNOWN:
        assoc = qualitative_cov_sign(model.dag, e1, e2)
        fact = {
            Sign.POSITIVE: cs.CovFact.GE0,
            Sign.NEGATIVE: cs.CovFact.LE0,
            Sign.ZERO: cs.CovFact.EQ0,
            Sign.UNDEFINED: cs.CovFact.UNKNOWN,
        }[assoc]
        if fact is not cs.CovFact.UNKNOWN:
            e_cov = fact.flipped() if parity else fact
            sources["e_cov"] = "structural"

    return cs.RepFacts(
        target=d, e1=e1, e2=e2,
        a0=flags["a0"], a1=flags["a1"], a2=flags["a2"], a3=flags["a3"],
        e_indep=indep["e_indep"],
        a1_a2_indep=indep["a1_a2_indep"],
        a0_a1_indep=indep["a0_a1_indep"],
        a0_a2_indep=indep["a0_a2_indep"],
        e_cov=e_cov,
        sources=sources,
    )


def _build_facts(model: Model, d: str, e1: str, e2: str, negative: tuple[bool, bool], budget: int) -> cs.RepFacts:
    if model.fully_specified:
        return cs.facts_from_scm(model.to_scm(), d, e1, e2, negative, budget)
    return _facts_from_assertions(model, d, e1, e2, negative)


def _facts_dict(facts: cs.RepFacts) -> dict:
    fields = ["a0", "a1", "a2", "a3", "e_indep", "a1_a2_indep", "a0_a1_indep", "a0_a2_indep", "e_cov"]
    out = {}
    for f in fields:
        v = getattr(facts, f)
        if isinstance(v, cs.Flag):
            v = v.value
        elif isinstance(v, cs.CovFact):
            v = v.value
        out[f] = {"value": v, "source": facts.sources.get(f, "none")}
    return out


def _premise_dict(rep: cs.TransferPremises) -> dict:
    return {
        "rule": rep.rule,
        "pairing": {"f": rep.f, "e1": rep.e1, "g": rep.g, "e2": rep.e2},
        "q": list(rep.q),
        "checks": [
            {"name": c.name, "holds": c.holds, "source": c.source, "detail": c.detail}
            for c in rep.checks
        ],
        "q_same_sign": rep.q_same_sign,
        "q_opposite_sign": rep.q_opposite_sign,
        "satisfied": rep.satisfied,
    }


def _asserted_cov(model: Model, a: str, b: str) -> cs.CovFact | None:
    for item in model.assertions:
        if item.kind == "cov-sign" and {item.args[0], item.args[1]} == {a, b}:
            return {"<=0": cs.CovFact.LE0, ">=0": cs.CovFact.GE0, "=0": cs.CovFact.EQ0}[item.args[2]]
    return None


def covsign_analysis(
    model: Model,
    d: str,
    f: str | None,
    g: str | None,
    q: Sequence[str] = (),
    budget: int = DEFAULT_WORLD_BUDGET,
) -> tuple[dict, list[cs.SignConclusion], bool]:
    """Shared pipeline for the covsign and oracle-check subcommands.

    Returns (report, all emitted conclusions, ok flag).
    """
    model.dag.require(d, *(n for n in (f, g) if n), *q)
    e1, e2 = _pair_nodes(model, d)
    negative = _pair_polarity(model, d, e1, e2)
    facts = _build_facts(model, d, e1, e2, negative, budget)
    inner = cs.pair_conclusions_signed(facts, negative)

    report: dict = {
        "target": d,
        "parents": {
            "e1": e1,
            "e2": e2,
            "polarity": ["-" if n else "+" for n in negative],
        },
        "facts": _facts_dict(facts),
        "parent_conclusions": [_conclusion_dict(c) for c in inner],
    }
    conclusions: list[cs.SignConclusion] = list(inner)
    ok = bool(inner)

    wants_transfer = f is not None and g is not None and {f, g} != {e1, e2}
    if wants_transfer:
        assert f is not None and g is not None
        candidates = []
        for (p1, p2) in ((e1, e2), (e2, e1)):
            candidates.append(
                cs.check_transfer_premises_direct(
                    model.dag, f, g, p1, p2, d,
                    cov_f_e1=_asserted_cov(model, f, p1),
                    cov_g_e2=_asserted_cov(model, g, p2),
                )
            )
        direct = next((c for c in candidates if c.satisfied), candidates[0])
        candidates = []
        for (p1, p2) in ((e1, e2), (e2, e1)):
            candidates.append(cs.check_transfer_premises_shared(model.dag, f, g, p1, p2, d, q))
        shared = next((c for c in candidates if c.satisfied), candidates[0])

        report["transfer_premises"] = {"direct": _premise_dict(direct), "shared": _premise_dict(shared)}
        transferred: list[cs.SignConclusion] = []
        not_applicable: list[dict] = []
        chosen = next((r for r in (direct, shared) if r.satisfied), None)
        if chosen is None:
            for r in (direct, shared):
                not_applicable.append({"rule": r.rule, "failed_premises": list(r.failures())})
        else:
            for c in inner:
                try:
                    transferred.extend(cs.transfer_sign(chosen, c))
                except ValueError as e:
                    not_applicable.append({"rule": chosen.rule, "inner": c.rule, "reason": str(e)})
        report["transferred_conclusions"] = [_conclusion_dict(c) for c in transferred]
        report["not_applicable"] = not_applicable
        conclusions.extend(transferred)
        ok = ok and bool(transferred)
    return report, conclusions, ok


# -- subcommands --------------------------------------------------------------

def _cmd_canonical(args) -> int:
    model = load_model(args.model)
    nodes = args.node or [n for n in model.dag.nodes if n in model.tables]
    entries = []
    lines = []
    for n in nodes:
        if n not in model.tables:
            raise CliError(f"no equation for {n!r}")
        table = dedupe_states(model.tables[n])
        rep = canonical_representation(table)
        entries.append({
            "node": n,
            "parents": list(table.parents),
            "states": [
                {"index": j, "prob": _frac(p), "bits": "".join(str((r >> c) & 1) for c in range(table.n_configs))}
                for j, (r, p) in enumerate(zip(table.rows, table.probs))
            ],
            "terms": [_term_dict(t) for t in rep.terms],
            "rendered": rep.render(),
        })
        lines.append(f"{n} = {rep.render()}")
        for j, (r, p) in enumerate(zip(table.rows, table.probs)):
            bits = "".join(str((r >> c) & 1) for c in range(table.n_configs))
            lines.append(f"  state {j} prob {_frac(p)} bits {bits}")
    _emit({"command": "canonical", "model": args.model, "representations": entries}, lines, args.format)
    return 0


def _choose_representation(model: Model, node: str):
    if node in model.representations:
        return model.representations[node], "declared"
    if node in model.tables:
        return canonical_representation(dedupe_states(model.tables[node])), "canonical"
    raise CliError(f"no representation or equation for {node!r}")


def _expanded(model: Model, node: str):
    rep, source = _choose_representation(model, node)
    scm = model.to_scm()
    if source == "canonical":
        tables = dict(scm.tables)
        tables[node] = dedupe_states(tables[node])
        scm = type(scm)(scm.graph, tables)
    return expand(scm, node, rep), rep, source, scm


def _cmd_expand(args) -> int:
    model = load_model(args.model)
    exp, rep, source, _ = _expanded(model, args.node)
    nodes = [{"name": n, "kind": exp.kind_of(n)} for n in exp.dag.nodes]
    edges = [
        {"from": a, "to": b, "sign": exp.dag.signs.get((a, b))}
        for a, b in exp.dag.edges
    ]
    lines = [f"node {n['name']}  # {n['kind']}" for n in nodes]
    for e in edges:
        suffix = f" {e['sign']}" if e["sign"] else ""
        lines.append(f"edge {e['from']} {e['to']}{suffix}")
    report = {
        "command": "expand",
        "model": args.model,
        "target": args.node,
        "representation": {"source": source, "terms": [_term_dict(t) for t in rep.terms]},
        "nodes": nodes,
        "edges": edges,
    }
    _emit(report, lines, args.format)
    return 0


def _cmd_dsep(args) -> int:
    model = load_model(args.model)
    witness = find_unblocked_path(model.dag, args.x, args.y, args.z)
    separated = witness is None
    report = {
        "command": "dsep",
        "model": args.model,
        "x": args.x, "y": args.y, "z": args.z,
        "separated": separated,
        "witness": _render_path(witness) or None,
    }
    lines = [
        ("separated" if separated else "not separated")
        + (f"; witness: {witness}" if witness else "")
    ]
    _emit(report, lines, args.format)
    return 0 if separated else 1


def _cmd_stratum_ci(args) -> int:
    model = load_model(args.model)
    exp, rep, source, _ = _expanded(model, args.node)
    verdict = stratum_independent(exp, args.x, args.y, args.z, args.stratum)
    cond = sorted(set(args.z) | stratum_conditioning_set(exp, args.stratum), key=exp.dag.index)
    witness = None if verdict else find_unblocked_path(exp.dag, args.x, args.y, cond)
    wording = "independent within stratum" if verdict else "not implied independent"
    report = {
        "command": "stratum-ci",
        "model": args.model,
        "target": args.node,
        "stratum": args.stratum,
        "x": args.x, "y": args.y, "z": args.z,
        "representation_source": source,
        "conditioning_set": cond,
        "verdict": wording,
        "witness": _render_path(witness) or None,
    }
    lines = [wording + (f"; witness: {witness}" if witness else "")]
    _emit(report, lines, args.format)
    return 0 if verdict else 1


def _cmd_signs(args) -> int:
    model = load_model(args.model)
    edges = []
    lines = []
    for a, b in model.dag.edges:
        declared = model.dag.signs.get((a, b))
        computed = None
        degenerate = None
        if b in model.tables:
            table = dedupe_states(model.tables[b])
            computed = detect_monotonic_effect(table, a).value
            degenerate = is_constant_in(table, a)
        edges.append({
            "from": a, "to": b,
            "declared": declared, "computed": computed, "degenerate": degenerate,
        })
        lines.append(
            f"edge {a} -> {b}: declared={declared or '?'} computed={computed or 'n/a'}"
            + (" (degenerate)" if degenerate else "")
        )
    assoc = []
    nodes = model.dag.nodes
    claim_for = {"+": ">=0", "-": "<=0", "0": "=0", "?": None}
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            s = monotonically_associated(model.dag, nodes[i], nodes[j])
            assoc.append({
                "x": nodes[i], "y": nodes[j],
                "association": s.value,
                "cov_claim": claim_for[s.value],
            })
            lines.append(f"assoc {nodes[i]} ~ {nodes[j]}: {s.value} cov {claim_for[s.value] or 'no claim'}")
    report = {"command": "signs", "model": args.model, "edges": edges, "associations": assoc}
    _emit(report, lines, args.format)
    return 0


def _cmd_covsign(args) -> int:
    model = load_model(args.model)
    report, _, ok = covsign_analysis(model, args.d, args.f, args.g, args.q, args.budget)
    report = {"command": "covsign", "model": args.model, **report}
    lines = []
    for c in report["parent_conclusions"]:
        lines.append(f"{c['quantity']} {c['relation']}  [{c['rule']}]")
    for c in report.get("transferred_conclusions", []):
        lines.append(f"{c['quantity']} {c['relation']}  [{c['rule']}]")
    for na in report.get("not_applicable", []):
        lines.append(f"not applicable: {json.dumps(na)}")
    if not lines:
        lines.append("no conclusions established")
    _emit(report, lines, args.format)
    return 0 if ok else 1


def _instance_matches_assertions(model: Model, scm, dist, d, e1, e2, negative) -> bool:
    table = dedupe_states(scm.tables[d])
    from .scm import complement_parent
    for p, neg in zip((e1, e2), negative):
        if neg:
            table = complement_parent(table, p)
    slots = cs.cocause_state_sets(table, e1, e2)
    parity = sum(negative) % 2

    def slot_map(x, y, slot):
        if (x, y) == (e1, e2):
            return slot
        if (x, y) == (e2, e1):
            return {"a0": "a0", "a1": "a2", "a2": "a1", "a3": "a3"}[slot]
        return None

    for a in model.assertions:
        if a.kind in ("no-synergism", "rep-flag") and a.args[0] == d:
            slot = slot_map(a.args[1], a.args[2], "a3" if a.kind == "no-synergism" else a.args[3])
            want = "zero" if a.kind == "no-synergism" else a.args[4]
            if slot is None:
                continue
            have = slots[slot]
            if want == "zero" and not (have is not None and not have):
                return False
            if want == "one" and have is not None:
                return False
        elif a.kind == "independent":
            if not oracle.conditional_independent(dist, a.args[0], a.args[1]):
                return False
        elif a.kind == "cocause-independent" and a.args[0] == d:
            s1 = slot_map(a.args[1], a.args[2], a.args[3])
            s2 = slot_map(a.args[1], a.args[2], a.args[4])
            if s1 is None or s2 is None:
                continue
            if not cs._sets_independent(slots[s1], slots[s2], table.probs):
                return False
        elif a.kind == "cov-sign":
            cov = oracle.conditional_covariance(dist, a.args[0], a.args[1])
            rel = a.args[2]
            if rel == "<=0" and not cov <= 0:
                return False
            if rel == ">=0" and not cov >= 0:
                return False
            if rel == "=0" and cov != 0:
                return False
    return True


def _cmd_oracle_check(args) -> int:
    model = load_model(args.model)
    report, conclusions, ok = covsign_analysis(model, args.d, args.f, args.g, args.q, args.budget)
    if not conclusions:
        raise CliError("no conclusions to check")
    e1, e2 = _pair_nodes(model, args.d)
    negative = _pair_polarity(model, args.d, e1, e2)

    def key_of(c):
        return f"{c.quantity.render()} {c.relation.value} [{c.rule}]"

    results = {key_of(c): {"checked": 0, "violations": 0} for c in conclusions}
    failures: list[dict] = []

    if model.fully_specified:
        dist = joint_distribution(model.to_scm(), args.budget)
        for c in conclusions:
            key = key_of(c)
            passed = oracle.verify_claim(dist, c)
            results[key]["checked"] += 1
            if not passed:
                results[key]["violations"] += 1
                failures.append({"conclusion": key, "seed": None})
        accepted = 1
        draws = 1
    else:
        monotone: dict[str, tuple[tuple[str, str], ...]] = {}
        for (a, b), s in model.dag.signs.items():
            monotone.setdefault(b, ())
            monotone[b] = monotone[b] + ((a, s),)
        constraints = oracle.InstanceConstraints(monotone=monotone, max_weight=args.max_weight)
        accepted = 0
        draws = 0
        max_draws = args.instances * 100
        k = 0
        while accepted < args.instances and draws < max_draws:
            seed = args.seed + k
            k += 1
            draws += 1
            try:
                scm = oracle.random_instance(model.dag, constraints, seed)
            except oracle.GenerationError:
                continue
            dist = joint_distribution(scm, args.budget)
            if not _instance_matches_assertions(model, scm, dist, args.d, e1, e2, negative):
                continue
            try:
                checks = [(c, oracle.verify_claim(dist, c)) for c in conclusions]
            except oracle.ConditioningError:
                continue
            accepted += 1
            for c, passed in checks:
                key = key_of(c)
                results[key]["checked"] += 1
                if not passed:
                    results[key]["violations"] += 1
                    failures.append({"conclusion": key, "seed": seed})
        if accepted == 0:
            raise CliError(f"no premise-satisfying instance found in {draws} draws")

    total_violations = sum(r["violations"] for r in results.values())
    report = {
        "command": "oracle-check",
        "model": args.model,
        "seed": args.seed,
        "instances_accepted": accepted,
        "instances_drawn": draws,
        **report,
        "verification": [
            {"conclusion": k, **v} for k, v in results.items()
        ],
        "failures": failures,
    }
    lines = [f"instances: {accepted} accepted of {draws} drawn"]
    for k, v in results.items():
        lines.append(f"{k}: {v['checked']} checked, {v['violations']} violations")
    _emit(report, lines, args.format)
    return 0 if ok and total_violations == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="suffcause",
        description="Sufficient-cause analysis of binary causal DAGs with an exact oracle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("model", help="path to a model file")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--budget", type=int, default=DEFAULT_WORLD_BUDGET)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("canonical", help="canonical co-cause representation per node")
    common(p)
    p.add_argument("--node", action="append", default=None)
    p.set_defaults(fn=_cmd_canonical)

    p = sub.add_parser("expand", help="graph expanded with sufficient-cause nodes")
    common(p)
    p.add_argument("--node", required=True)
    p.set_defaults(fn=_cmd_expand)

    p = sub.add_parser("dsep", help="d-separation query with witness path")
    common(p)
    p.add_argument("--x", action="append", required=True)
    p.add_argument("--y", action="append", required=True)
    p.add_argument("--z", action="append", default=[])
    p.set_defaults(fn=_cmd_dsep)

    p = sub.add_parser("stratum-ci", help="conditional independence inside one stratum")
    common(p)
    p.add_argument("--node", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--z", action="append", default=[])
    p.add_argument("--stratum", type=int, choices=(0, 1), default=0)
    p.set_defaults(fn=_cmd_stratum_ci)

    p = sub.add_parser("signs", help="monotonicity and association tables")
    common(p)
    p.set_defaults(fn=_cmd_signs)

    p = sub.add_parser("covsign", help="conditional covariance sign conclusions")
    common(p)
    p.add_argument("--d", required=True, help="conditioning node")
    p.add_argument("--f", default=None)
    p.add_argument("--g", default=None)
    p.add_argument("--q", action="append", default=[])
    p.set_defaults(fn=_cmd_covsign)

    p = sub.add_parser("oracle-check", help="verify conclusions against the exact oracle")
    common(p)
    p.add_argument("--d", required=True)
    p.add_argument("--f", default=None)
    p.add_argument("--g", default=None)
    p.add_argument("--q", action="append", default=[])
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--max-weight", type=int, default=8)
    p.set_defaults(fn=_cmd_oracle_check)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (CliError, ModelError, GraphError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
