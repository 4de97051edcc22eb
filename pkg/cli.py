"""
Command-line entry point: one subcommand per library operation

Results go to stdout as JSON (sorted keys) or a rich table; logs go to stderr and log files.
Exit status: 0 pass, 1 fail verdict, 2 error.
"""
import json
import logging
import math
import sys
from fractions import Fraction
from functools import wraps
from typing import Dict, List, Sequence

import click
import numpy as np
from rich.console import Console
from rich.table import Table

from app_config import config
from errors import DivergenceError, PrecisionError, VadicError
from field_tower import FieldElement, FieldSpec
from hahn_series import HahnSeries, cap_to_str
from logger_config import audit_logger, setup_logging
from period_solvers import (abp_chain_check, branch_difference_check, carlitz_motive, polylog_residual,
                            solve_omega, solve_polylog, valuation_report)
from phi_modules import PhiMatrix, verify_fundamental
from product_fields import pf_reduce, random_instance
from relation_lab import (build_polylog_motive, dim_bounds_report, gamma_polys, kernel_search,
                          verify_Z_point, z_polys)
from session import Session, build_settings, load_settings
from validators import InputValidator, ValidationError
from vadic_ring import VadicElement, eval_theta_power

logger = logging.getLogger(__name__)

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2

SESSION_KEYS = ('q', 'p', 's', 'v', 'prec_t', 'prec_u', 'max_denom', 'max_field_deg', 'max_terms',
                'branch', 'seed', 'fmt', 'nu_max', 'window', 'kernel_cap')


# Output helpers

def _jsonable(obj):
    """json.dumps default for library values"""
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, float) and math.isinf(obj):
        return cap_to_str(obj)
    if isinstance(obj, (FieldElement, HahnSeries, VadicElement, FieldSpec)):
        return obj.to_dict()
    if hasattr(obj, 'to_dict'):
        return obj.to_dict()
    if isinstance(obj, np.ndarray):
        return np.asarray(obj).tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    raise TypeError(f"Cannot serialize {type(obj).__name__}")


def _clean(obj):
    """Replace infinities before json.dumps sees them"""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and math.isinf(obj):
        return cap_to_str(obj)
    return obj


def render_json(result: Dict) -> str:
    return json.dumps(_clean(result), default=_jsonable, sort_keys=True, indent=2)


def render_table(result: Dict, title: str) -> Table:
    """Valuation rows when present, otherwise the top-level scalar fields"""
    table = Table(title=title)
    rows = result.get('valuations', {}).get('rows') if isinstance(result.get('valuations'), dict) else None
    if rows:
        for column in ('m', 'i', 'val', 'cap', 'formula', 'verdict'):
            table.add_column(column)
        for row in rows:
            table.add_row(*(str(row.get(column)) for column in ('m', 'i', 'val', 'cap', 'formula', 'verdict')))
        return table
    table.add_column('field')
    table.add_column('value')
    for key in sorted(result):
        value = result[key]
        if isinstance(value, (str, int, bool, Fraction)) or value is None:
            table.add_row(key, str(value))
        elif isinstance(value, float):
            table.add_row(key, cap_to_str(value))
    return table


def emit(ctx: click.Context, session: Session, command: str, result: Dict):
    """Write the result and exit with the verdict code"""
    result = dict(result, command=command, settings=session.settings.to_dict())
    if session.settings.format == 'table':
        console = Console(file=click.get_text_stream('stdout'), width=120)
        console.print(render_table(result, command))
    else:
        click.echo(render_json(result))
    passed = result.get('passed', True)
    ctx.exit(EXIT_PASS if passed else EXIT_FAIL)


def command_errors(func):
    """Report library and validation errors on stderr with exit status 2"""
    @wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return func(*args, **kwargs)
        except (VadicError, ValidationError, ValueError) as e:
            logger.error(f"{ctx.command_path} failed: {type(e).__name__}: {e}")
            click.echo(f"Error: {e}", err=True)
            ctx.exit(EXIT_ERROR)
    return wrapper


def session_options(func):
    """Options shared by every command that builds a session"""
    options = [
        click.option('--config', 'config_path', type=click.Path(), default=None,
                     help='key = value settings file (default: $VADIC_CONFIG)'),
        click.option('--q', type=int, help='field size q = p^s'),
        click.option('--p', type=int, help='characteristic'),
        click.option('--s', type=int, help='q = p^s'),
        click.option('--v', help='place polynomial, little-endian coefficients, e.g. "0,1" for t'),
        click.option('--prec-t', type=int, help='number of t-coefficients N_t'),
        click.option('--prec-u', help='u-adic precision cap (rational)'),
        click.option('--max-denom', type=int),
        click.option('--max-field-deg', type=int),
        click.option('--max-terms', type=int),
        click.option('--branch', help='max-val | min-val | enumerate'),
        click.option('--seed', type=int),
        click.option('--format', 'fmt', help='json | table'),
        click.option('--nu-max', type=int),
        click.option('--window', type=int),
        click.option('--kernel-cap', type=int),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _session(kwargs: Dict) -> Session:
    """Build the session from --config plus flags, consuming the session keys"""
    config_path = kwargs.pop('config_path', None)
    overrides = {key: kwargs.pop(key, None) for key in SESSION_KEYS}
    overrides['format'] = overrides.pop('fmt')
    q = overrides.pop('q')
    if q is not None:
        overrides['p'], overrides['s'] = InputValidator.split_prime_power(q)
    settings = load_settings(config_path, overrides)
    session = Session(settings)
    audit_logger.log_command(click.get_current_context().command_path, settings.seed)
    return session


def _read_json(path: str) -> Dict:
    try:
        with open(path, encoding='utf-8') as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as e:
        raise ValidationError(f"Cannot read artifact {path}: {e}")


def _adopt(session: Session, artifact: Dict):
    """Continue in the artifact's working field and check its place"""
    if 'field' in artifact:
        session.tower.adopt(FieldSpec.from_dict(artifact['field']))
    place = artifact.get('place')
    if place is not None and [int(c) for c in place['v']] != list(session.place.v):
        raise ValidationError("Artifact was computed at a different place v")


def session_from_artifact(artifact: Dict, overrides: Dict = None) -> Session:
    """Session replaying an artifact's recorded settings"""
    values = dict(artifact.get('settings', {}))
    values.pop('q', None)
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    session = Session(build_settings(values))
    _adopt(session, artifact)
    return session


def _load_element(session: Session, data: Dict) -> VadicElement:
    return VadicElement.from_dict(data, session.place, session.spec, session.budget)


def _theta_value(element: VadicElement, session: Session):
    """Evaluation at t = theta, or None when it cannot be certified"""
    try:
        return eval_theta_power(element, 0, session.settings.window, strict=False)
    except (PrecisionError, DivergenceError) as e:
        logger.info(f"Value at theta not available: {e}")
        return None


def _split(text: str) -> List[str]:
    return [part.strip() for part in text.split(',') if part.strip()]


# Commands

@click.group()
def cli():
    """Exact v-adic Frobenius difference equations: periods, polylogarithms, relations"""


@cli.command()
@session_options
@click.pass_context
@command_errors
def omega(ctx, **kwargs):
    """Carlitz period Omega_v with its verified motive and valuation table"""
    session = _session(kwargs)
    motive = carlitz_motive(session)
    result = motive['omega']
    report = valuation_report(result)
    value = _theta_value(result.omega, session)
    out = motive['pair'].to_dict() if motive['pair'] is not None else {}
    out.update({
        'series': result.omega.to_dict(),
        'branches': result.to_dict()['branches'],
        'valuations': report,
        'denominators': motive['denominators'],
        'verification': {k: v for k, v in motive['verification'].items() if k != 'pair'},
        'value_at_theta': value.to_dict() if value else None,
        'passed': report['passed'] and motive['verification']['passed'],
    })
    emit(ctx, session, 'omega', out)


@cli.command()
@click.option('--alpha', default='1', help='alpha in F_q(theta), e.g. "theta" or "1/(theta+1)"')
@click.option('--n', 'weight', type=int, default=1)
@session_options
@click.pass_context
@command_errors
def polylog(ctx, alpha, weight, **kwargs):
    """Polylogarithm L_{alpha,n}; 'enumerate' lists every index-0 branch"""
    session = _session(kwargs)
    results = solve_polylog(session, alpha, weight)
    many = isinstance(results, list)
    results = results if many else [results]
    branches = []
    for result in results:
        report = valuation_report(result)
        residual = polylog_residual(result)
        value = _theta_value(result.series, session)
        branches.append({
            **result.to_dict(),
            'valuations': report,
            'residual': residual,
            'value_at_theta': value.to_dict() if value else None,
            'passed': report['passed'] and residual['passed'],
        })
    out = {'field': session.spec.to_dict(), 'place': session.place.to_dict()}
    if many:
        differences = [branch_difference_check(results[0], other) for other in results[1:]]
        out.update({'branches': branches, 'differences': differences,
                    'passed': all(b['passed'] for b in branches) and all(d['passed'] for d in differences)})
    else:
        out.update(branches[0])
    emit(ctx, session, 'polylog', out)


@cli.command()
@click.option('--kind', type=click.Choice(['omega', 'polylog']), default='omega')
@click.option('--alpha', default='1')
@click.option('--n', 'weight', type=int, default=1)
@session_options
@click.pass_context
@command_errors
def valuations(ctx, kind, alpha, weight, **kwargs):
    """Valuation certificate: equalities for Omega, lower bounds for polylogarithms"""
    session = _session(kwargs)
    if kind == 'omega':
        result = solve_omega(session)
    else:
        result = solve_polylog(session, alpha, weight, branch='max-val' if session.settings.branch == 'enumerate' else None)
    report = valuation_report(result)
    emit(ctx, session, 'valuations', {'valuations': report, 'passed': report['passed']})


@cli.group()
def motive():
    """t-motive assembly"""


@motive.command('polylog')
@click.option('--n', 'weight', type=int, default=1)
@click.option('--alphas', default='', help='comma-separated alphas, e.g. "1,theta"')
@session_options
@click.pass_context
@command_errors
def motive_polylog(ctx, weight, alphas, **kwargs):
    """Verified (Phi, Psi) for Omega^n and Omega^n L_{alpha_j,n}"""
    session = _session(kwargs)
    built = build_polylog_motive(session, weight, _split(alphas))
    out = built.to_dict()
    out.update(built.pair.to_dict())
    out['passed'] = True
    emit(ctx, session, 'motive polylog', out)


@cli.group()
def verify():
    """Re-check emitted artifacts"""


@verify.command('fundamental')
@click.option('--phi', 'phi_path', type=click.Path(exists=True), default=None,
              help='phi.json: {"phi": [[...]], "motive": ...} or a bare matrix of scalars')
@click.option('--psi', 'psi_path', type=click.Path(exists=True), default=None,
              help='psi.json: {"psi": [[...]], "field", "place", "settings"} or a bare matrix of series')
@click.option('--artifact', type=click.Path(exists=True), default=None,
              help="single artifact holding both 'phi' and 'psi'")
@click.option('--min-cap', default=None, help='smallest verified cap accepted as a pass')
@session_options
@click.pass_context
@command_errors
def verify_fundamental_cmd(ctx, phi_path, psi_path, artifact, min_cap, **kwargs):
    """sigma(Psi) = Phi Psi for --phi/--psi files or one --artifact"""
    if artifact and (phi_path or psi_path):
        raise ValidationError("Give either --artifact or --phi with --psi, not both")
    if artifact:
        phi_data = psi_data = _read_json(artifact)
        if not isinstance(psi_data, dict) or 'phi' not in psi_data or 'psi' not in psi_data:
            raise ValidationError("Artifact needs 'phi' and 'psi' entries")
    elif phi_path and psi_path:
        phi_data, psi_data = _read_json(phi_path), _read_json(psi_path)
    else:
        raise ValidationError("verify fundamental needs --phi and --psi, or --artifact")
    context = psi_data if isinstance(psi_data, dict) else {}
    rows = psi_data['psi'] if isinstance(psi_data, dict) else psi_data
    kwargs.pop('config_path', None)
    overrides = {key: kwargs.pop(key, None) for key in SESSION_KEYS}
    overrides['format'] = overrides.pop('fmt')
    q = overrides.pop('q')
    if q is not None:
        overrides['p'], overrides['s'] = InputValidator.split_prime_power(q)
    session = session_from_artifact(context, overrides)
    audit_logger.log_command(ctx.command_path, session.settings.seed)
    phi = PhiMatrix.from_dict(phi_data, session.base)
    psi = [[_load_element(session, x) for x in row] for row in rows]
    floor = InputValidator.parse_rational(min_cap) if min_cap is not None else None
    check = verify_fundamental(session, phi, psi, min_cap=floor)
    check.pop('pair')
    emit(ctx, session, 'verify fundamental', check)


@cli.group()
def abp():
    """Rank-1 functional-equation chain"""


@abp.command('check')
@click.option('--artifact', type=click.Path(exists=True), default=None,
              help='rank-1 artifact (phi with motive data, psi); default computes Omega')
@session_options
@click.pass_context
@command_errors
def abp_check(ctx, artifact, **kwargs):
    """psi(theta^(q^(d nu)))^(q^d) against the product factor times psi(theta^(q^(d(nu+1))))"""
    session = _session(kwargs)
    if artifact:
        data = _read_json(artifact)
        _adopt(session, data)
        phi = PhiMatrix.from_dict(data, session.base)
        psi = _load_element(session, data['psi'][0][0])
    else:
        phi = PhiMatrix.carlitz(session.base)
        psi = solve_omega(session).omega
    emit(ctx, session, 'abp check', abp_chain_check(session, psi, phi))


@cli.group()
def relations():
    """Bounded-degree relation search"""


def _load_values(session: Session, tokens: Sequence[str], level: str) -> list:
    """Artifact paths (their series or value at theta) or exact scalars"""
    values = []
    for token in tokens:
        if token.endswith('.json'):
            data = _read_json(token)
            _adopt(session, data)
            if level == 'series':
                values.append(_load_element(session, data['series']))
            else:
                entry = data.get('value_at_theta')
                if not entry:
                    raise PrecisionError(f"{token} carries no certified value at theta")
                values.append(HahnSeries.from_dict(entry['value'], session.spec, session.budget))
        else:
            x = session.scalar(token)
            if level == 'series':
                values.append(session.expand(x))
            else:
                lam0 = session.place.reference
                values.append(x.expand_at(lam0, lam0, 1, session.prec_u, session.budget)[0][0])
    return values


@relations.command('search')
@click.option('--values', 'value_list', required=True, help='comma-separated artifact paths or scalars')
@click.option('--deg-theta', type=int, default=0)
@click.option('--cutoff', required=True)
@click.option('--level', type=click.Choice(['theta', 'series']), default='theta')
@click.option('--coefficient-field', type=click.Choice(['F_q', 'F_qd']), default='F_q')
@session_options
@click.pass_context
@command_errors
def relations_search(ctx, value_list, deg_theta, cutoff, level, coefficient_field, **kwargs):
    """Least relation sum P_j(theta) y_j = 0 below cutoff, or an independence certificate"""
    session = _session(kwargs)
    values = _load_values(session, _split(value_list), level)
    certificate = kernel_search(session, values, deg_theta, InputValidator.parse_rational(cutoff),
                                coefficient_field)
    emit(ctx, session, 'relations search', {'certificate': certificate.to_dict(), 'passed': True})


@cli.group('galois')
def galois_group():
    """Polynomials cutting out the Galois-group point"""


@galois_group.command('polys')
@click.option('--forms', 'forms_path', required=True, type=click.Path(exists=True),
              help='JSON {"c": s x r matrix}')
@click.option('--gamma', 'gamma_path', required=True, type=click.Path(exists=True),
              help='JSON {"b": [b_0, ..., b_r]}')
@click.option('--xi', 'xi_path', required=True, type=click.Path(exists=True),
              help='JSON {"xi": [f_0, ..., f_r]}')
@click.option('--alphas', default=None, help='also check the period point of these polylogarithms')
@click.option('--n', 'weight', type=int, default=1)
@click.option('--cutoff', default='1')
@session_options
@click.pass_context
@command_errors
def galois_polys(ctx, forms_path, gamma_path, xi_path, alphas, weight, cutoff, **kwargs):
    """G_i from (c, b), H_i from xi, and optionally H_i at the period point"""
    session = _session(kwargs)
    c = _read_json(forms_path)['c']
    b = _read_json(gamma_path)['b']
    xi = [session.scalar(x) for x in _read_json(xi_path)['xi']]
    G = gamma_polys(session, c, b)
    H = z_polys(G, xi)
    identity = [session.scalar(1)] + [session.scalar(0)] * (len(b) - 1)
    out = {
        'G': [g.to_dict() for g in G],
        'H': [h.to_dict() for h in H],
        'G_at_identity_zero': all(g.evaluate(identity).is_zero() for g in G),
        'H_at_xi_zero': all(h.evaluate(xi).is_zero() for h in H),
    }
    passed = out['G_at_identity_zero'] and out['H_at_xi_zero']
    if alphas:
        built = build_polylog_motive(session, weight, _split(alphas))
        check = verify_Z_point(session, H, built, InputValidator.parse_rational(cutoff))
        out['z_point'] = check
        out['dimension'] = dim_bounds_report(len(built.polylogs), [], None)
        passed = passed and check['passed']
    out['passed'] = passed
    emit(ctx, session, 'galois polys', out)


@cli.command('pf-reduce')
@click.option('--e', 'e_degree', type=int, default=2, help='E = F_{p^e}')
@click.option('--degrees', default='2,2', help='Lambda_l = F_{p^(e*m_l)}, comma-separated m_l')
@click.option('--shape', default='2,1', help='s,m')
@click.option('--instances', type=int, default=1)
@session_options
@click.pass_context
@command_errors
def pf_reduce_cmd(ctx, e_degree, degrees, shape, instances, **kwargs):
    """Normal form B*D*A = [I; *] on random full-rank product-field matrices"""
    session = _session(kwargs)
    m_list = InputValidator.parse_coefficients(degrees)
    s, m = InputValidator.parse_coefficients(shape)
    reports = []
    for k in range(instances):
        Dm = random_instance(session.rng, session.tower.p, e_degree, m_list, s, m)
        result = pf_reduce(Dm, seed=session.settings.seed + k)
        reports.append({key: result[key] for key in ('passed', 'B_invertible', 'A_invertible', 'identity_top')})
        if instances == 1:
            reports[-1].update({'instance': Dm.to_dict(), 'B': result['B'].tolist(),
                                'A': [Al.tolist() for Al in result['A']]})
    failures = sum(not r['passed'] for r in reports)
    emit(ctx, session, 'pf-reduce', {'instances': reports, 'failures': failures, 'passed': failures == 0})


def run(argv: Sequence[str] = None) -> int:
    """Dispatch one command line and return its exit status"""
    is_valid, errors = config.validate_config()
    if not is_valid:
        logger.error(f"Configuration validation failed: {errors}")
        click.echo(f"Error: {'; '.join(errors)}", err=True)
        return EXIT_ERROR
    try:
        code = cli.main(args=list(argv) if argv is not None else None, prog_name='vadic',
                        standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return EXIT_ERROR
    except click.exceptions.Abort:
        return EXIT_ERROR
    return code if isinstance(code, int) else EXIT_PASS


def main():
    """Console entry: attach log handlers, then dispatch"""
    setup_logging()
    sys.exit(run())


if __name__ == '__main__':
    main()
