"""Command-line front end: ``artifact {dga,catalog,quiver,pinwheel,verify} ...``.

Exit codes: 0 when every check passes, 1 on a verification failure, 2 on
malformed input or an unknown flag.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import catalog, pinwheel, quiver, suites
from .exactalg import ExactMatrix, RingError, ring_from_name
from .freedga import DGAError, Generator, NCPoly, SemifreeDGA, apply_substitution, check_d_squared, stabilize
from .generators import rng_from_seed

SEED_ENV = "PINWHEEL_SEED"


# --------------------------------------------------------------------------
# plumbing


def _emit(ctx: click.Context, text: str, data) -> None:
    if ctx.find_root().obj.get("json"):
        click.echo(json.dumps(data, indent=1, sort_keys=True, ensure_ascii=False))
    else:
        click.echo(text)
    report = ctx.find_root().obj.get("report")
    if report:
        Path(report).write_text(json.dumps(data, indent=1, sort_keys=True, ensure_ascii=False) + "\n")


def _finish(ok: bool) -> None:
    sys.exit(0 if ok else 1)


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read {path}: {exc}")


def _malformed(exc: Exception) -> click.UsageError:
    return click.UsageError(f"malformed input: {exc}")


def _ring(name: str):
    try:
        return ring_from_name(name)
    except (RingError, ValueError) as exc:
        raise click.BadParameter(str(exc), param_hint="--ring")


def _check_p(p: int) -> None:
    if p < 3:
        raise click.BadParameter("p must be at least 3", param_hint="--p")


ring_option = click.option("--ring", "ring_name", default="Z2", show_default=True,
                           help="Coefficients: Z, Q, Z2, Z3, Z/7, ...")
seed_option = click.option("--seed", type=int, envvar=SEED_ENV, default=0, show_default=True,
                           help=f"Random seed (default from ${SEED_ENV}).")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--json", "as_json", is_flag=True, help="Print the machine-readable report instead of text.")
@click.option("--report", type=click.Path(dir_okay=False), help="Also write the JSON report to this file.")
@click.pass_context
def cli(ctx: click.Context, as_json: bool, report: str | None) -> None:
    """Exact verification tools for semi-free dg algebras, quiver modules and pinwheel objects."""
    ctx.obj = {"json": as_json, "report": report}


# --------------------------------------------------------------------------
# dga


@cli.group()
def dga() -> None:
    """Semi-free dg algebras stored as JSON."""


def _load_dga(path: str) -> SemifreeDGA:
    try:
        return SemifreeDGA.from_json(_load_json(path))
    except (DGAError, RingError, ValueError, KeyError, TypeError) as exc:
        raise _malformed(exc)


def _poly(ring, terms) -> NCPoly:
    acc = NCPoly.zero(ring)
    for coeff, word in terms:
        acc = acc + NCPoly.word(ring, [str(w) for w in word], coeff)
    return acc


@dga.command("dump")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def dga_dump(ctx, path):
    """Print the algebra in canonical order."""
    A = _load_dga(path)
    lines = [repr(A)] + [f"d {g.key} = {A.format(A.d[g.key])}" for g in A.generators]
    _emit(ctx, "\n".join(lines), A.to_json())


@dga.command("check-d2")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def dga_check_d2(ctx, path):
    """Check degrees and d² = 0 on every generator."""
    A = _load_dga(path)
    report = check_d_squared(A)
    data = report.to_json(A)
    text = "d² = 0: PASS" if report.passed else "d² = 0: FAIL\n" + "\n".join(
        f"  {x['generator']}: {x.get('residual', x.get('d'))}" for x in data["failures"] + data["degree_violations"])
    _emit(ctx, text, data)
    _finish(report.passed)


@dga.command("substitute")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--images", required=True, type=click.Path(exists=True, dir_okay=False),
              help='JSON {"new-key": [[coeff, [word...]], ...], "generators": [...] (optional)}.')
@click.pass_context
def dga_substitute(ctx, path, images):
    """Transport the differential along a triangular change of generators."""
    A = _load_dga(path)
    data = _load_json(images)
    try:
        targets = None
        if "generators" in data:
            targets = [Generator(g["family"], tuple(g["indices"]), int(g["degree"]), int(g["rank"]))
                       for g in data.pop("generators")]
        imgs = {k: _poly(A.ring, v) for k, v in data.items()}
        B = apply_substitution(A, imgs, targets)
    except (DGAError, KeyError, TypeError, ValueError, StopIteration) as exc:
        raise _malformed(exc)
    _emit(ctx, B.dumps(), B.to_json())


@dga.command("stabilize")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--pairs", required=True, type=click.Path(exists=True, dir_okay=False),
              help='JSON [[{"family","indices","degree"}, {...}], ...]: x with dx = y.')
@click.pass_context
def dga_stabilize(ctx, path, pairs):
    """Adjoin acyclic generator pairs (x, y) with dx = y."""
    A = _load_dga(path)
    try:
        gen = lambda g: Generator(g["family"], tuple(g["indices"]), int(g["degree"]), 0)
        B = stabilize(A, [(gen(x), gen(y)) for x, y in _load_json(pairs)])
    except (DGAError, KeyError, TypeError, ValueError) as exc:
        raise _malformed(exc)
    _emit(ctx, B.dumps(), B.to_json())


# --------------------------------------------------------------------------
# catalog


@cli.group("catalog")
def catalog_group() -> None:
    """The algebras attached to the pinwheel and their comparison."""


def _catalog_command(name: str, build, doc: str):
    @catalog_group.command(name, help=doc)
    @click.option("--p", "p", type=int, required=True)
    @ring_option
    @click.pass_context
    def cmd(ctx, p, ring_name):
        _check_p(p)
        A = build(p, _ring(ring_name))
        _emit(ctx, A.dumps(), A.to_json())
    return cmd


_catalog_command("ce", catalog.build_CE, "Emit the Chekanov-Eliashberg algebra CE(p) as JSON.")
_catalog_command("a", catalog.build_A, "Emit A_{p,1} (generators x_i, y_ij) as JSON.")
_catalog_command("b", catalog.build_B, "Emit the barred algebra B_{p,1} as JSON.")


@catalog_group.command("verify")
@click.option("--p", "p", type=int, required=True)
@click.pass_context
def catalog_verify(ctx, p):
    """Replay the transformed differentials and the stabilisation; exit 1 on any mismatch."""
    _check_p(p)
    report = catalog.verify_transformed_differentials(p)
    stab = catalog.verify_stabilization(p)
    ok = report.passed and stab
    text = "\n".join([f"{fam}: {'PASS' if not n else f'FAIL ({n} residuals)'}" for fam, n in report.summary().items()]
                     + [f"stabilisation: {'PASS' if stab else 'FAIL'}"])
    _emit(ctx, text, {"p": p, "residuals": report.summary(), "stabilization": stab, "passed": ok})
    _finish(ok)


# --------------------------------------------------------------------------
# quiver


@cli.group("quiver")
def quiver_group() -> None:
    """Modules over the A_{n−1} quiver and the Coxeter functor."""


@quiver_group.command("coxeter")
@click.option("--n", "n", type=int, required=True)
@click.option("--k", "k", type=int, default=1, show_default=True)
@click.option("--object", "path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def quiver_coxeter(ctx, n, k, path):
    """Apply the k-step Coxeter model to a quiver object."""
    try:
        A = quiver.QuiverObject.from_json(_load_json(path))
    except (ValueError, KeyError, TypeError, RingError) as exc:
        raise _malformed(exc)
    if A.n != n:
        raise click.UsageError(f"the object has n = {A.n}, not {n}")
    try:
        C = quiver.coxeter_model(A, k)
    except quiver.QuiverError as exc:
        raise click.BadParameter(str(exc), param_hint="--k")
    _emit(ctx, json.dumps(C.to_json()), C.to_json())


@quiver_group.command("verify-powers")
@click.option("--n", "n", type=int, required=True)
@click.option("--count", type=int, default=20, show_default=True)
@ring_option
@seed_option
@click.pass_context
def quiver_verify_powers(ctx, n, count, ring_name, seed):
    """Validate the Coxeter power witnesses on random objects."""
    if n < 3:
        raise click.BadParameter("n must be at least 3", param_hint="--n")
    ring = _ring(ring_name)
    rng = rng_from_seed([seed, n])
    cases = []
    for t in range(count):
        A = suites.random_quiver_object(ring, n, rng)
        for k in range(1, n + 1):
            cases.append({"object": t, "k": k, "passed": quiver.coxeter_power_witness(A, k).verify()})
        _, W = quiver.coxeter_power_chain(A, n)
        cases.append({"object": t, "k": "full", "passed": W.verify() and W.morphism.target == A})
    ok = all(c["passed"] for c in cases)
    bad = sum(not c["passed"] for c in cases)
    _emit(ctx, f"{'PASS' if ok else 'FAIL'}: {len(cases)} witnesses, {bad} failing",
          {"n": n, "ring": str(ring), "seed": seed, "cases": cases, "passed": ok})
    _finish(ok)


@quiver_group.command("verify-injectives")
@click.option("--n", "n", type=int, required=True)
@ring_option
@click.pass_context
def quiver_verify_injectives(ctx, n, ring_name):
    """Validate c_n(I_i) ≃ P_i[1] for every i."""
    if n < 3:
        raise click.BadParameter("n must be at least 3", param_hint="--n")
    ws = quiver.injective_projective_check(n, _ring(ring_name))
    res = [w.verify() for w in ws]
    _emit(ctx, "\n".join(f"i={i}: {'PASS' if r else 'FAIL'}" for i, r in enumerate(res, 1)),
          {"n": n, "cases": [{"i": i, "passed": r} for i, r in enumerate(res, 1)], "passed": all(res)})
    _finish(all(res))


# --------------------------------------------------------------------------
# pinwheel


@cli.group("pinwheel")
def pinwheel_group() -> None:
    """Circle objects, their normal form, monodromy and the pinwheel relations."""


def _load_pinwheel_json(path: str):
    data = _load_json(path)
    kinds = {"simplified": pinwheel.SimplifiedObject, "circle_pair": pinwheel.CirclePair,
             "pinwheel": pinwheel.PinwheelObject}
    try:
        return kinds[data["type"]].from_json(data)
    except (KeyError, TypeError, ValueError, RingError) as exc:
        raise _malformed(exc)


def _matrix_text(M: ExactMatrix) -> str:
    return "\n".join("  [" + " ".join(str(M.ring.format(x)) for x in row) + "]" for row in M.array.tolist()) or "  []"


@pinwheel_group.command("monodromy")
@click.option("--p", "p", type=int, required=True)
@click.option("--object", "path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["closed", "composed", "both"]), default="both", show_default=True)
@click.pass_context
def pinwheel_monodromy(ctx, p, path, mode):
    """Monodromy of a simplified object or circle pair; ``both`` also checks that the two agree."""
    _check_p(p)
    obj = _load_pinwheel_json(path)
    if isinstance(obj, pinwheel.PinwheelObject):
        raise click.UsageError("monodromy takes a simplified object or a circle pair")
    if obj.p != p:
        raise click.UsageError(f"the object has p = {obj.p}, not {p}")
    pair = obj.embed() if isinstance(obj, pinwheel.SimplifiedObject) else obj
    simplified = obj if isinstance(obj, pinwheel.SimplifiedObject) else pinwheel.simplify_full(pair).result
    data, text, ok = {"p": p}, [], True
    if mode in ("closed", "both"):
        m = pinwheel.monodromy_closed(simplified).m
        data["closed"] = m.to_json()
        text += ["closed:", _matrix_text(m)]
    if mode in ("composed", "both"):
        m = pinwheel.monodromy_composed(pair).m
        data["composed"] = m.to_json()
        text += ["composed:", _matrix_text(m)]
    if mode == "both":
        ok = data["closed"] == data["composed"]
        if not ok and not isinstance(obj, pinwheel.SimplifiedObject):
            note = "(the closed form is taken on the normal form, so it may differ by conjugation)"
            text.append(note)
        data["agree"] = ok
        text.append(f"agree: {ok}")
    _emit(ctx, "\n".join(text), data)
    _finish(ok or not isinstance(obj, pinwheel.SimplifiedObject))


@pinwheel_group.command("simplify")
@click.option("--p", "p", type=int, required=True)
@click.option("--object", "path", type=click.Path(exists=True, dir_okay=False),
              help="A circle pair; a random one is generated when omitted.")
@ring_option
@seed_option
@click.pass_context
def pinwheel_simplify(ctx, p, path, ring_name, seed):
    """Bring a circle pair to normal form and re-validate the audit trail."""
    _check_p(p)
    if path:
        obj = _load_pinwheel_json(path)
        pair = obj.embed() if isinstance(obj, pinwheel.SimplifiedObject) else obj
        if not isinstance(pair, pinwheel.CirclePair):
            raise click.UsageError("simplify takes a circle pair")
    else:
        pair = pinwheel.random_circle_pair(p, _ring(ring_name), rng_from_seed(seed))
    if pair.p != p:
        raise click.UsageError(f"the object has p = {pair.p}, not {p}")
    try:
        s = pinwheel.simplify_full(pair)
    except pinwheel.PinwheelError as exc:
        raise _malformed(exc)
    problems = s.verify()
    steps = [f"{st.kind}{st.index}" for st in s.steps]
    data = {"p": p, "steps": steps, "problems": problems, "monodromy_exact": s.monodromy_exact,
            "result": s.result.to_json(), "passed": not problems}
    text = (f"steps: {' '.join(steps)}\nmonodromy preserved {'exactly' if s.monodromy_exact else 'up to homotopy'}\n"
            f"audit: {'PASS' if not problems else 'FAIL: ' + '; '.join(problems)}")
    _emit(ctx, text, data)
    _finish(not problems)


@pinwheel_group.command("validate")
@click.option("--p", "p", type=int, required=True)
@click.option("--object", "path", type=click.Path(exists=True, dir_okay=False),
              help="A pinwheel object; a random one is generated when omitted.")
@ring_option
@seed_option
@click.pass_context
def pinwheel_validate(ctx, p, path, ring_name, seed):
    """Residuals of every pinwheel relation, cross-checked against the catalog algebra."""
    if p < 1:
        raise click.BadParameter("p must be positive", param_hint="--p")
    if path:
        obj = _load_pinwheel_json(path)
        if not isinstance(obj, pinwheel.PinwheelObject):
            raise click.UsageError("validate takes a pinwheel object")
    else:
        _check_p(p)
        obj = pinwheel.random_pinwheel_object(p, _ring(ring_name), rng_from_seed(seed))
    if obj.p != p:
        raise click.UsageError(f"the object has p = {obj.p}, not {p}")
    report = pinwheel.validate_pinwheel(obj)
    data = dict(report.summary(), p=p, object=obj.to_json())
    ok = report.ok and report.catalog_consistent
    text = ("relations: PASS" if report.ok else "relations: FAIL in " + ", ".join(map(str, report.failures)))
    text += f"\ncatalog consistent: {report.catalog_consistent}"
    _emit(ctx, text, data)
    _finish(ok)


def _ranks(value: str) -> tuple[int, int]:
    try:
        r0, r1 = (int(x) for x in value.split(","))
    except ValueError:
        raise click.BadParameter("expected two integers such as 1,1", param_hint="--ranks")
    if r0 < 0 or r1 < 0:
        raise click.BadParameter("ranks are non-negative", param_hint="--ranks")
    return r0, r1


@pinwheel_group.command("search")
@click.option("--p", "p", type=int, required=True)
@click.option("--ranks", default="1,1", show_default=True, help="Even and odd rank of A₁.")
@click.option("--max-bits", type=int, default=40, show_default=True)
@click.option("--dump", type=click.Path(dir_okay=False), help="Write every solution as JSON.")
@click.pass_context
def pinwheel_search(ctx, p, ranks, max_bits, dump):
    """Enumerate every pinwheel object over F₂ of the given ranks."""
    r = _ranks(ranks)
    try:
        res = pinwheel.brute_force_search(p, r, max_bits=max_bits)
    except pinwheel.PinwheelError as exc:
        raise click.UsageError(str(exc))
    bad = sum(not pinwheel.validate_pinwheel(o, catalog=False).ok for o in res.objects())
    if dump:
        Path(dump).write_text(json.dumps([o.to_json() for o in res.objects()]) + "\n")
    data = {"p": p, "ranks": list(r), "solutions": len(res.solutions), "nodes": res.nodes,
            "domain_bits": res.domain_bits, "invalid": bad, "passed": bad == 0}
    _emit(ctx, f"{len(res.solutions)} objects (domain 2^{res.domain_bits}, {res.nodes} nodes, "
               f"{res.seconds:.2f}s); invalid: {bad}", data)
    _finish(bad == 0)


# --------------------------------------------------------------------------
# verify


@cli.group("verify")
def verify_group() -> None:
    """The verification suites, one per acceptance criterion."""


def _only(value: str | None) -> list[int] | None:
    if not value:
        return None
    try:
        out = [int(x) for x in value.split(",")]
    except ValueError:
        raise click.BadParameter("expected a comma-separated list of suite numbers", param_hint="--only")
    if any(not 1 <= x <= len(suites.SUITES) for x in out):
        raise click.BadParameter(f"suites are numbered 1..{len(suites.SUITES)}", param_hint="--only")
    return out


@verify_group.command("all")
@click.option("--p", "p", type=int, default=None, help="Restrict p-ranged suites to this p.")
@seed_option
@click.option("--scale", type=click.FloatRange(min=0.0, min_open=True), default=1.0, show_default=True,
              help="Multiply the number of random cases.")
@click.option("--only", default=None, help="Comma-separated suite numbers.")
@click.option("--timings", is_flag=True, help="Include wall-clock times in the JSON report.")
@click.pass_context
def verify_all(ctx, p, seed, scale, only, timings):
    """Run every suite and print one PASS/FAIL line per criterion."""
    if p is not None:
        _check_p(p)
    results = suites.run_all(seed=seed, p=p, scale=scale, only=_only(only))
    lines = []
    for r in results:
        lines.append(r.line())
        lines += [f"      {c.label}: {c.detail}" if c.detail else f"      {c.label}" for c in r.failures[:5]]
        lines += [f"      note: {n}" for n in r.notes]
    ok = all(r.passed for r in results)
    lines.append(f"{sum(r.passed for r in results)}/{len(results)} suites pass")
    _emit(ctx, "\n".join(lines), {"seed": seed, "p": p, "scale": scale, "passed": ok,
                                  "suites": [r.to_json(timings) for r in results]})
    _finish(ok)


def main() -> None:
    try:
        cli(prog_name="artifact")
    except (RingError, DGAError, pinwheel.PinwheelError, quiver.QuiverError) as exc:
        # Inputs that parse but are unsupported (for instance ℤ where a field is needed).
        click.echo(f"Error: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
