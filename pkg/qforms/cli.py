import logging
import sys
from typing import Any, List, Optional, Sequence

import click

from qforms.encoding import dumps, load_document
from qforms.macmahon import (
    DEFAULT_SEARCH_COMBINATIONS,
    PartVector,
    U_vec_series,
    builtin_expression,
    detect_primes,
    macmahon_table,
    search_prime_detecting,
)
from qforms.omega import HFormId, h_form, omega_check
from qforms.pool import num_workers_from_env
from qforms.quasimodular import (
    QMPoly,
    Residual,
    decompose,
    eisenstein_series,
    recognize,
    required_truncation,
)
from qforms.series import InsufficientTruncation, QSeries, format_fraction

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_TRUNCATION = 2


def _table(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    cells = [list(headers)] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines) + "\n"


def _series_rows(s: QSeries) -> List[List[str]]:
    return [[str(n), format_fraction(c)] for n, c in enumerate(s.coeffs)]


def _emit(ctx: click.Context, document: Any, headers: Sequence[str], rows: Sequence[Sequence[Any]]):
    if ctx.obj["format"] == "text":
        click.echo(_table(headers, rows), nl=False)
    else:
        click.echo(dumps(document), nl=False)


def _vector(text: str) -> PartVector:
    try:
        return PartVector.parse(text)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--vec")


@click.group()
@click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json")
@click.option("--verbose", is_flag=True, help="Log progress to standard error.")
@click.pass_context
def cli(ctx: click.Context, fmt: str, verbose: bool):
    """Exact q-series, quasimodular forms and prime-detecting partition functions."""
    if verbose:
        logging.basicConfig(level=logging.DEBUG, stream=sys.stderr)
    num_workers_from_env()
    ctx.obj = {"format": fmt}


@cli.command()
@click.option("--weight", type=int, required=True)
@click.option("--order", type=click.IntRange(min=0), required=True)
@click.pass_context
def eisenstein(ctx, weight: int, order: int):
    """Expansion of the Eisenstein series G_weight."""
    s = eisenstein_series(weight, order)
    _emit(ctx, dict(weight=weight, **s.to_json()), ["n", "coeff"], _series_rows(s))


@cli.command()
@click.option("--k", "k", type=int, required=True)
@click.option("--deriv", type=click.IntRange(min=0), default=0)
@click.option("--order", type=click.IntRange(min=0), required=True)
@click.pass_context
def hform(ctx, k: int, deriv: int, order: int):
    """The form D^deriv H_k, symbolically and expanded."""
    form = HFormId(k, deriv)
    poly, s = h_form(form, order)
    document = {"form": form, "poly": poly, "series": s}
    _emit(ctx, document, ["n", "coeff"], _series_rows(s))


@cli.command()
@click.option("--vec", required=True, help="Comma-separated exponents, e.g. 2,1,1.")
@click.option("--n-max", type=click.IntRange(min=0), required=True)
@click.pass_context
def macmahon(ctx, vec: str, n_max: int):
    """Values of the MacMahonesque function M_vec(n) for n <= n-max."""
    vector = _vector(vec)
    values = [int(x) for x in macmahon_table(vector, n_max)]
    document = {"vec": vector, "n_max": n_max, "values": [str(v) for v in values]}
    _emit(ctx, document, ["n", "M"], list(enumerate(values)))


@cli.command()
@click.option("--vec", required=True, help="Comma-separated exponents, e.g. 1,1.")
@click.option("--order", type=click.IntRange(min=0), required=True)
@click.pass_context
def useries(ctx, vec: str, order: int):
    """Generating series sum_n M_vec(n) q^n."""
    vector = _vector(vec)
    s = U_vec_series(vector, order)
    _emit(ctx, dict(vec=vector.to_json(), **s.to_json()), ["n", "coeff"], _series_rows(s))


@cli.command("check-omega")
@click.option("--input", "path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--bound", type=click.IntRange(min=1), required=True)
@click.option("--weight", type=int, default=None, help="Mixed-weight bound K.")
@click.pass_context
def check_omega(ctx, path: str, bound: int, weight: Optional[int]):
    """Decide whether a form is prime-detecting, up to --bound."""
    verdict = omega_check(load_document(path), bound, weight)
    rows = [["status", verdict.status.value], ["bound", bound], ["cutoff", verdict.cutoff]]
    rows += [[key, dumps(value).strip()] for key, value in verdict.certificate.items()]
    _emit(ctx, verdict, ["field", "value"], rows)


@cli.command("recognize")
@click.option("--input", "path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--weight", type=int, required=True)
@click.pass_context
def recognize_command(ctx, path: str, weight: int):
    """Express a series (or polynomial) in the monomial basis of weight <= --weight."""
    document = load_document(path)
    if isinstance(document, QMPoly):
        document = document.expand(required_truncation(weight))
    result = recognize(document, weight)
    if isinstance(result, Residual):
        _emit(
            ctx,
            dict(recognized=False, **result.to_json()),
            ["field", "value"],
            [["recognized", "no"], ["index", result.index], ["value", format_fraction(result.value)]],
        )
        return
    rows = [[str(m), format_fraction(c)] for m, c in result.items()]
    _emit(ctx, dict(recognized=True, **result.to_json()), ["monomial", "coeff"], rows)


@cli.command("decompose")
@click.option("--input", "path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.pass_context
def decompose_command(ctx, path: str):
    """Split a polynomial into Eisenstein derivatives and derivatives of cusp forms."""
    document = load_document(path)
    if not isinstance(document, QMPoly):
        raise click.BadParameter("decompose needs a polynomial document", param_hint="--input")
    result = decompose(document)
    rows = [["eisenstein", r, w, format_fraction(c)] for r, w, c in result.eisenstein_part]
    rows += [
        ["cusp", c.derivative_order, c.weight, ",".join(format_fraction(x) for x in c.coords)]
        for c in result.cusp_part
    ]
    _emit(ctx, result, ["part", "D^r", "weight", "coeff"], rows)


@cli.command("detect-primes")
@click.option("--expr", required=True, help="builtin:1, builtin:2 or builtin:3.")
@click.option("--n-max", type=click.IntRange(min=2), required=True)
@click.pass_context
def detect_primes_command(ctx, expr: str, n_max: int):
    """Zero set of a builtin expression compared with the primes."""
    try:
        expression = builtin_expression(expr)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--expr")
    report = detect_primes(expression, n_max)
    document = dict(expression=expression.name, **report.to_json())
    rows = [["zeros", " ".join(map(str, report.zeros))]]
    rows += [["negatives", " ".join(map(str, report.negatives))]]
    rows += [["detects_primes", report.detects_primes]]
    _emit(ctx, document, ["field", "value"], rows)


@cli.command()
@click.option("--d", "d", type=click.IntRange(min=0), required=True)
@click.option("--primes", "prime_bound", type=click.IntRange(min=2), required=True)
@click.option("--bound", type=click.IntRange(min=1), required=True)
@click.option("--max-combinations", type=click.IntRange(min=1), default=DEFAULT_SEARCH_COMBINATIONS)
@click.option("--cross-certify", is_flag=True)
@click.pass_context
def search(ctx, d: int, prime_bound: int, bound: int, max_combinations: int, cross_certify: bool):
    """Search for prime-detecting combinations of MacMahonesque functions."""
    outcome = search_prime_detecting(d, bound, prime_bound, max_combinations, cross_certify)
    rows = [[i, " ".join(str(c) for c in r.coefficients)] for i, r in enumerate(outcome.results)]
    _emit(ctx, outcome, ["#", "coefficients"], rows)


def run(argv: Sequence[str]) -> int:
    if not argv:
        with click.Context(cli, info_name="qforms") as ctx:
            click.echo(ctx.get_help(), err=True)
        return EXIT_USAGE
    try:
        cli.main(args=list(argv), prog_name="qforms", standalone_mode=False)
    except InsufficientTruncation as e:
        required = f" (needs truncation {e.required})" if e.required is not None else ""
        click.echo(f"Error: {e}{required}", err=True)
        return EXIT_TRUNCATION
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except ValueError as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_USAGE
    return EXIT_OK


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
