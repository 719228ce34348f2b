"""Command line front end.

Exit codes: 0 success or verdict true, 1 verdict false, 2 input error,
3 internal check failure.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from typing import Callable

from . import actions, construct, cubing, duality, median, pocset
from .bits import iter_bits
from .errors import InternalError, PocmedError, ValidationError
from .graphs import parse_graph_source

EXIT_OK, EXIT_FALSE, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


# -- loading --------------------------------------------------------------------


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def _kind(path: str, text: str) -> str:
    ext = os.path.splitext(path)[1].lstrip(".")
    if ext in ("poc", "med", "graph", "tree", "act"):
        return ext
    head = next((ln.split()[0] for ln in text.splitlines() if ln.split() and not ln.startswith("#")), "")
    return {"pocset": "poc", "median": "med", "median-sub": "med", "graph": "graph",
            "tree": "tree", "action": "act"}.get(head, "")


def load_median(path: str) -> median.MedianAlgebra:
    return median.parse_median_source(_read(path))


def load(path: str, want: tuple[str, ...] | None = None):
    text = _read(path)
    kind = _kind(path, text)
    if want and kind not in want:
        raise PocmedError(f"{path}: expected a {' or '.join('.' + w for w in want)} file")
    if kind == "poc":
        return kind, pocset.parse_poc_source(text)
    if kind == "med":
        return kind, median.parse_median_source(text)
    if kind == "graph":
        return kind, parse_graph_source(text)
    if kind == "tree":
        return kind, construct.parse_tree_source(text)
    if kind == "act":
        return kind, actions.load_action(path, load_median)
    raise PocmedError(f"{path}: unknown file type")


def _hs_token(m: median.MedianAlgebra, e: int) -> str:
    if e < 2:
        return "0^" if e else "0"
    return f"h{(e >> 1) - 1}" + ("^" if e & 1 else "")


def _set(tokens) -> str:
    return "{" + " ".join(tokens) + "}"


# -- commands ---------------------------------------------------------------------


def cmd_validate(args, out) -> int:
    try:
        kind, obj = load(args.file)
    except ValidationError as e:
        out("valid: no")
        for axiom, witness in e.report.violations:
            out(f"  {axiom}: {' '.join(map(str, witness))}")
        return EXIT_FALSE
    out("valid: yes")
    if kind == "poc":
        out(f"pocset {obj.name}: {obj.n_pairs} pairs")
    elif kind == "med":
        out(f"median {obj.name}: {obj.n} elements, {obj.k} hyperplanes")
    elif kind == "graph":
        name, g = obj
        out(f"graph {name}: {g.n} vertices, {len(g.edges())} edges")
    elif kind == "tree":
        out(f"tree {obj.name}: {obj.n} vertices")
    else:
        out(f"action {obj.name}: group of order {obj.order} on {obj.algebra.n} elements")
    return EXIT_OK


def cmd_dual(args, out) -> int:
    kind, obj = load(args.file, ("poc", "med"))
    if kind == "poc":
        out(median.to_median_source(duality.dual_of_poc(obj)), end="")
    else:
        out(pocset.to_poc_source(duality.dual_of_median(obj)), end="")
    return EXIT_OK


def cmd_doubledual(args, out) -> int:
    _, obj = load(args.file, ("poc", "med"))
    cert = duality.double_dual_check(obj, strict=False)
    out(cert.report(), end="")
    if not cert.is_isomorphism:
        raise InternalError("evaluation into the double dual is not an isomorphism")
    return EXIT_OK


def cmd_free_median(args, out) -> int:
    fm = duality.free_median(args.n)
    out(f"elements: {fm.algebra.n}")
    out(f"hyperplanes: {fm.algebra.k}")
    out("generators: " + " ".join(fm.algebra.labels[g] for g in fm.generators))
    if args.census:
        out("census:")
        for label, count in fm.census():
            out(f"  {label}: {count}")
    return EXIT_OK


def cmd_median_graph(args, out) -> int:
    _, m = load(args.file, ("med",))
    out(cubing.to_dot(m, color=not args.plain), end="")
    return EXIT_OK


def cmd_recognize(args, out) -> int:
    _, (name, g) = load(args.file, ("graph",))
    res = cubing.recognize_median_graph(g)
    if not res.median:
        out("median: no")
        out("witness: " + " ".join(g.labels[i] for i in res.witness))
        out(f"meet: {res.meet_size}")
        return EXIT_FALSE
    m = res.algebra
    m.name = name
    out("median: yes")
    out(f"elements: {m.n}")
    out(f"hyperplanes: {m.k}")
    if args.dot:
        out(cubing.to_dot(m), end="")
    return EXIT_OK


def cmd_analyze_poc(args, out) -> int:
    _, p = load(args.file, ("poc",))
    tp = pocset.transversality_graph(p)
    out(f"pairs: {p.n_pairs}")
    out("transverse: " + (" ".join(f"{p.names[u]}-{p.names[v]}" for u, v in tp.edges()) or "none"))
    out("nested: " + (" ".join(f"{p.names[u]}-{p.names[v]}" for u, v in tp.complement().edges()) or "none"))
    out("prime: " + " ".join(_set(p.names[i] for i in s) for s in pocset.prime_summands(p)))
    dl = pocset.dimension_length(p)
    out(f"dimension: {dl.dimension}")
    out(f"length: {dl.length}")
    td, exact = pocset.tree_dimension(p, args.tree_dim)
    out(f"tree-dimension: {td}" + ("" if exact else " (upper bound)"))
    b = pocset.is_binary(p)
    if b.binary:
        out("binary: yes " + _set(p.tokens(b.part)))
    else:
        out("binary: no, odd walk " + " ".join(p.token(a) for a in b.odd_walk))
    return EXIT_OK


def cmd_dunwoody(args, out) -> int:
    kind, obj = load(args.file, ("poc", "tree"))
    p = construct.poc_of_tree(obj) if kind == "tree" else obj
    real = construct.dunwoody_realize(p)
    m = real.algebra
    if kind == "tree":
        # name each ultrafilter by the vertex it evaluates
        labels = list(m.labels)
        for v in range(obj.n):
            ev = 2 | sum(1 << e for e in range(2, p.size) if obj.points_to(e) >> v & 1)
            labels[m.points.index(ev)] = obj.labels[v]
        m = median.MedianAlgebra(labels, m.hyperplanes, m.name, m.points, m.ground)
    out(f"elements: {m.n}")
    out(f"transverse sets: {len(real.transverse_sets)}")
    for x in range(m.n):
        out(f"{m.labels[x]}: {_set(p.tokens(m.points[x] & p.proper_mask))}")
    if args.dot:
        out(cubing.to_dot(m), end="")
    return EXIT_OK


def cmd_incremental(args, out) -> int:
    _, p = load(args.file, ("poc",))
    if args.order:
        toks = [t.strip() for t in args.order.split(",") if t.strip()]
        order = []
        for t in toks:
            if t not in p.names:
                raise PocmedError(f"unknown pair '{t}'")
            order.append(p.names.index(t))
    else:
        order = None
    u, trace = construct.incremental_ultrafilter(p, order)
    for k, st in enumerate(trace, 1):
        out(f"step {k}: {p.names[st.pair]} case {st.case} added {_set(p.tokens(st.added))}")
    out("ultrafilter: " + _set(p.tokens(u)))
    return EXIT_OK


def cmd_tree_poc(args, out) -> int:
    _, t = load(args.file, ("tree",))
    out(pocset.to_poc_source(construct.poc_of_tree(t)), end="")
    return EXIT_OK


def cmd_nerve(args, out) -> int:
    _, m = load(args.file, ("med",))
    nerve = cubing.cubical_nerve(m)
    out("cubes: " + " ".join(map(str, nerve.counts())))
    out(f"dimension: {nerve.dimension}")
    out(f"euler: {nerve.euler_characteristic()}")
    flags = all(cubing.link_flag_check(m, v).is_flag for v in range(m.n))
    out(f"flag links: {'yes' if flags else 'no'}")
    out("contraction: " + " ".join(f"h{j}" for j in cubing.contraction_certificate(m)))
    if args.dot:
        out(cubing.to_dot(m), end="")
    return EXIT_OK if flags else EXIT_FALSE


def cmd_quotient(args, out) -> int:
    _, m = load(args.file, ("med",))
    js = []
    for tok in args.contract.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if not (tok.startswith("h") and tok[1:].isdigit()) or int(tok[1:]) >= m.k:
            raise PocmedError(f"unknown hyperplane '{tok}' (use h0..h{m.k - 1})")
        js.append(int(tok[1:]))
    q = duality.congruence_quotient(m, duality.hyperplanes_to_halfspaces(js))
    out(median.to_median_source(q.algebra), end="")
    for x in range(m.n):
        out(f"{m.labels[x]} -> {q.algebra.labels[q.projection[x]]}")
    return EXIT_OK


def _parse_halfspace(m: median.MedianAlgebra, tok: str) -> int:
    base = tok[:-1] if tok.endswith("^") else tok
    if not (base.startswith("h") and base[1:].isdigit()) or int(base[1:]) >= m.k:
        raise PocmedError(f"unknown half space '{tok}' (use h0..h{m.k - 1}, optionally with ^)")
    return 2 * int(base[1:]) + 2 + tok.endswith("^")


def cmd_action_report(args, out) -> int:
    _, a = load(args.file, ("act",))
    m = a.algebra
    x = m.element(args.point) if args.point else 0
    h = _parse_halfspace(m, args.halfspace) if args.halfspace else 2
    out(f"group order: {a.order}")
    vo, ho = actions.orbits(a)
    out("vertex orbits: " + " ".join(_set(m.labels[y] for y in o) for o in vo))
    out("hyperplane orbits: " + " ".join(_set(f"h{j}" for j in o) for o in ho))
    fc = actions.fixed_cube(a, x)
    out(f"fixed cube from {m.labels[x]}: " + _set(m.tokens(fc.cube)))
    sr = actions.simple_analysis(a)
    line = f"simple: {'yes' if sr.is_simple else 'no'}, cube: {'yes' if sr.is_cube else 'no'}"
    if sr.fixed_point is not None:
        line += f", fixed point: {m.labels[sr.fixed_point]}"
    out(line)
    if m.k:
        pt = actions.pairing(a, h, x)
        out(f"pairing G[{_hs_token(m, h)},{m.labels[x]}]: " + _set(a.word(i) for i in iter_bits(pt.members)))
        hq = actions.hyperplane_quotient(a, h)
        out(f"hyperplane quotient: {hq.quotient.n} elements, orbit " + _set(f"h{j}" for j in hq.orbit))
    actions.hilbert_embedding(a, x)
    out("hilbert embedding: ok")
    actions.finite_shifts(a)
    out("shifts: none")
    return EXIT_OK


def cmd_sageev(args, out) -> int:
    spec = construct.SageevSpec(args.group, args.set, args.radius)
    ends = construct.end_conditions(spec)
    out("end1: vacuous (trivial subgroup)")
    for s, c0, c1 in ends.end2:
        out(f"end2 {s}: {c0} at radius {args.radius}, {c1} at radius {args.radius + construct.MARGIN}")
    out(f"end3: {'yes' if ends.end3 else 'no'}")
    if not ends.ok:
        out("window: rejected")
        return EXIT_FALSE
    w = construct.sageev_window(spec)
    m = w.algebra
    out(f"ball: {len(w.ball)}")
    out(f"window: {m.n} elements, {m.k} hyperplanes")
    out("growth: " + " ".join(map(str, w.growth)))
    for g, s, d in actions.shift_report(w):
        out(f"shift: {g} {s} {d}")
    if args.dot:
        out(cubing.to_dot(m), end="")
    return EXIT_OK


def cmd_corpus(args, out) -> int:
    from . import corpus

    rng = random.Random(args.seed)
    checked = 0
    for n in range(5):
        for p in corpus.all_pocsets(n):
            duality.double_dual_check(p)
            checked += 1
    for k in range(args.count):
        p = corpus.random_pocset(rng, rng.randrange(1, 11))
        duality.double_dual_check(p)
        duality.double_dual_check(duality.dual_of_poc(p))
        checked += 2
    out(f"seed: {args.seed}")
    out(f"objects checked: {checked}")
    out("failures: 0")
    return EXIT_OK


# -- entry --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pocmed", description="Poc sets and median algebras.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name: str, fn: Callable, help: str, file: bool = True) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help)
        if file:
            sp.add_argument("file")
        sp.set_defaults(fn=fn)
        return sp

    add("validate", cmd_validate, "check a .poc/.med/.graph/.tree/.act file")
    add("dual", cmd_dual, "print the dual object")
    add("doubledual", cmd_doubledual, "certify the double dual isomorphism")
    sp = add("free-median", cmd_free_median, "free median algebra on N generators", file=False)
    sp.add_argument("n", type=int)
    sp.add_argument("--census", action="store_true")
    sp = add("median-graph", cmd_median_graph, "DOT of the median graph")
    sp.add_argument("--plain", action="store_true", help="no hyperplane colours")
    sp = add("recognize", cmd_recognize, "decide whether a graph is a median graph")
    sp.add_argument("--dot", action="store_true")
    sp = add("analyze-poc", cmd_analyze_poc, "structure report for a poc set")
    sp.add_argument("--tree-dim", choices=("exact", "greedy"), default="exact")
    sp = add("dunwoody", cmd_dunwoody, "realize a poc set (or tree) as a median algebra")
    sp.add_argument("--dot", action="store_true")
    sp = add("incremental-uf", cmd_incremental, "build an ultrafilter pair by pair")
    sp.add_argument("--order", help="comma separated pair names")
    add("tree-poc", cmd_tree_poc, "poc set of oriented edges of a tree")
    sp = add("nerve", cmd_nerve, "cube counts, flag links and contraction order")
    sp.add_argument("--dot", action="store_true")
    sp = add("quotient", cmd_quotient, "contract hyperplanes")
    sp.add_argument("--contract", required=True, help="comma separated hyperplanes h0,h1,...")
    sp = add("action-report", cmd_action_report, "orbits, fixed cube, pairing and more")
    sp.add_argument("--point")
    sp.add_argument("--halfspace", help="h<j> or h<j>^")
    sp = add("sageev", cmd_sageev, "finite window of the group construction", file=False)
    sp.add_argument("--group", choices=("z", "f2"), required=True)
    sp.add_argument("--set", required=True, help="halfline, evens or prefix:<letter>")
    sp.add_argument("--radius", type=int, required=True)
    sp.add_argument("--dot", action="store_true")
    sp = add("corpus", cmd_corpus, "double dual checks over a seeded corpus", file=False)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--count", type=int, default=50)
    return ap


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr

    def out(text: str = "", end: str = "\n") -> None:
        stdout.write(text + end)

    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        return args.fn(args, out)
    except InternalError as e:
        stderr.write(f"internal error: {e}\n")
        return EXIT_INTERNAL
    except ValidationError as e:
        stderr.write(f"invalid input: {e}\n")
        return EXIT_INPUT
    except OSError as e:
        stderr.write(f"error: {e.filename}: {e.strerror}\n")
        return EXIT_INPUT
    except PocmedError as e:
        stderr.write(f"error: {e}\n")
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())
