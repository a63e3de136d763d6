"""
COMMAND MANAGER
One handler per CLI command. Every handler builds a Report from the engines
bound in a Workbench; errors propagate to the orchestrator, which maps them
to exit codes.
"""

from argparse import Namespace
from typing import Any, Callable, Dict, List, Sequence

from adapters.expression import (
    ExpressionEvaluator,
    format_cylinder,
    format_element,
    format_point,
    format_qterm,
    format_semidirect,
    format_vector,
    parse_cylinder,
    parse_point,
    parse_semidirect,
    read_expression_file,
    resolve_input,
)
from adapters.reports import Report
from core.algebra import WordAlgebra
from core.dynamics import DynamicsEngine
from core.group import EndoContext
from core.oracle import L2Oracle
from core.orthogonalizer import Orthogonalizer
from core.telemetry import RunMonitor
from domain.entities import CheckReport, CosetHandle, Cylinder, EndoSpec, FreenessKind, ProfinitePoint, \
    PurityKind, SemidirectElement
from utils.helpers import ParseError, PreconditionError
from utils.logger import get_logger

logger = get_logger(__name__)

COSET_LISTING_LIMIT = 27


class Workbench:
    """Engines for one context plus the merged settings"""

    def __init__(self, spec: EndoSpec, settings: Dict[str, Any], monitor: RunMonitor = None):
        self.settings = settings
        self.monitor = monitor or RunMonitor()
        self.context = EndoContext(spec)
        self.algebra = WordAlgebra(self.context)
        self.oracle = L2Oracle(self.algebra)
        self.orthogonalizer = Orthogonalizer(self.algebra, settings['engine']['companion_candidates'])
        dyn = settings['dynamics']
        self.dynamics = DynamicsEngine(
            self.algebra,
            relations_sample_bound=dyn['relations_sample_bound'],
            spectrum_level_bound=dyn['spectrum_level_bound'],
            spectrum_shift_bound=dyn['spectrum_shift_bound'],
        )
        self.evaluator = ExpressionEvaluator(self.algebra)

    # --- input helpers ---

    def texts(self, arguments: Sequence[str]) -> List[str]:
        out: List[str] = []
        for argument in arguments:
            out.extend(resolve_input(argument))
        return out

    def semidirect(self, text: str) -> SemidirectElement:
        coords, depth, shift = parse_semidirect(text)
        return self.dynamics.element(self.evaluator.group(coords), depth, shift)

    def point(self, text: str) -> ProfinitePoint:
        coords, depth = parse_point(text)
        if depth > self.context.max_depth:
            raise ParseError(f"point depth {depth} exceeds max_depth {self.context.max_depth}")
        return self.dynamics.point(self.evaluator.group(coords), depth)

    def cylinder(self, text: str) -> Cylinder:
        level, indices = parse_cylinder(text)
        size = self.context.index(level) if level else 1
        bad = [k for k in indices if k >= size]
        if bad:
            raise ParseError(f"class index {bad[0]} out of range at level {level} (size {size})")
        return Cylinder(level, tuple(CosetHandle(level, k) for k in indices))

    def report(self, args: Namespace, **arguments) -> Report:
        return Report(
            command=args.command,
            arguments=arguments,
            context=self.context.fingerprint(),
            schema_version=self.settings['report']['schema_version'],
        )


def _need(args: Namespace, count: int, usage: str) -> List[str]:
    if len(args.inputs) != count:
        raise PreconditionError(f"usage: {args.command} {usage}")
    return list(args.inputs)


def _point_text(bench: Workbench, x: ProfinitePoint) -> str:
    return format_point(x, bench.dynamics.point_rep(x))


def _check_section(check: CheckReport) -> Dict[str, Any]:
    return {'counts': dict(check.counts), 'failures': list(check.failures)}


# ========== ALGEBRA ==========

def cmd_normalize(bench: Workbench, args: Namespace) -> Report:
    texts = bench.texts(args.inputs)
    if not texts:
        raise PreconditionError("usage: normalize EXPR [EXPR ...]")
    report = bench.report(args, inputs=texts)
    results = []
    for text in texts:
        with bench.monitor.track('normalize'):
            results.append(format_element(bench.algebra.normal_form(bench.evaluator.parse(text))))
    report.payload['normal_form'] = results[0] if len(results) == 1 else results
    return report


def cmd_mul(bench: Workbench, args: Namespace) -> Report:
    left, right = _need(args, 2, "EXPR EXPR")
    alg = bench.algebra
    with bench.monitor.track('mul'):
        product = alg.normal_form(alg.mul(bench.evaluator.parse(left), bench.evaluator.parse(right)))
    report = bench.report(args, left=left, right=right)
    report.payload['product'] = format_element(product)
    return report


def cmd_adjoint(bench: Workbench, args: Namespace) -> Report:
    (text,) = _need(args, 1, "EXPR")
    alg = bench.algebra
    report = bench.report(args, input=text)
    report.payload['adjoint'] = format_element(alg.normal_form(alg.adjoint(bench.evaluator.parse(text))))
    return report


def cmd_expect(bench: Workbench, args: Namespace) -> Report:
    (text,) = _need(args, 1, "EXPR")
    alg = bench.algebra
    image = alg.normal_form(alg.expectation(alg.normal_form(bench.evaluator.parse(text))))
    report = bench.report(args, input=text)
    report.payload['expectation'] = format_element(image)
    report.payload['diagonal_norm_sq'] = alg.diagonal_norm_sq(image)
    return report


def cmd_equal(bench: Workbench, args: Namespace) -> Report:
    left, right = _need(args, 2, "EXPR EXPR")
    with bench.monitor.track('equal'):
        verdict = bench.algebra.equals(bench.evaluator.parse(left), bench.evaluator.parse(right))
    report = bench.report(args, left=left, right=right)
    report.payload['equal'] = verdict
    report.verdicts['equal'] = verdict
    return report


def cmd_oracle_check(bench: Workbench, args: Namespace) -> Report:
    """Two expressions: compare on the window. None: seeded random-word suite."""
    radius = args.window if args.window is not None else bench.settings['oracle']['window_radius']
    window = bench.oracle.window(radius)
    if args.inputs:
        left, right = _need(args, 2, "[EXPR EXPR]")
        x, y = bench.evaluator.parse(left), bench.evaluator.parse(right)
        agrees = bench.oracle.equal_on_window(x, y, window)
        report = bench.report(args, left=left, right=right, window_radius=radius)
        report.payload['window_points'] = len(window)
        report.payload['agrees_on_window'] = agrees
        separating = bench.oracle.separating_point(bench.algebra.normal_form(x - y), window)
        report.payload['separating_point'] = None if separating is None else format_vector(separating)
        report.verdicts['agrees_on_window'] = agrees
        return report
    return _oracle_suite(bench, args, radius, window)


def _oracle_suite(bench: Workbench, args: Namespace, radius: int, window) -> Report:
    cfg = bench.settings['oracle']
    seed = args.seed if args.seed is not None else 0
    with bench.monitor.track('oracle'):
        passed, failures = bench.oracle.random_word_suite(
            seed, cfg['random_words'], cfg['random_word_length'], cfg['displacement_radius'], window)
    report = bench.report(args, seed=seed, window_radius=radius)
    report.payload['words'] = cfg['random_words']
    report.payload['passed'] = passed
    report.payload['failures'] = len(failures)
    report.verdicts['random_words'] = not failures
    return report


# ========== GROUP CORE ==========

def _coset_rows(bench: Workbench, levels: int) -> List[Dict[str, Any]]:
    ctx = bench.context
    rows = []
    for n in range(levels + 1):
        size = ctx.index(n) if n else 1
        row: Dict[str, Any] = {'level': n, 'index': size}
        if size <= COSET_LISTING_LIMIT:
            row['transversal'] = [format_vector(g) for g in ctx.transversal(n)]
        rows.append(row)
    return rows


def cmd_cosets(bench: Workbench, args: Namespace) -> Report:
    levels = min(args.levels if args.levels is not None else 3, bench.context.max_depth)
    report = bench.report(args, levels=levels)
    rows = _coset_rows(bench, levels)
    report.payload['levels'] = rows
    base = bench.context.index(1)
    report.verdicts['multiplicative_index'] = all(row['index'] == base ** row['level'] for row in rows)
    return report


def _purity_section(bench: Workbench) -> Dict[str, Any]:
    verdict = bench.context.purity_check()
    return {
        'kind': verdict.kind.value,
        'depth': verdict.depth,
        'witness': None if verdict.witness is None else format_vector(verdict.witness),
        'declared_pure': verdict.declared_pure,
        'usable_as_pure': verdict.usable_as_pure,
        'reason': verdict.reason,
    }


def cmd_purity(bench: Workbench, args: Namespace) -> Report:
    report = bench.report(args)
    section = _purity_section(bench)
    report.payload.update(section)
    report.verdicts['pure'] = section['kind'] == PurityKind.PURE_UP_TO_DEPTH.value
    return report


# ========== ORTHOGONALIZER ==========

def _orthogonalize_into(bench: Workbench, report: Report, texts: Sequence[str], exponent=None):
    ortho = bench.orthogonalizer
    terms = bench.evaluator.qterms(texts)
    with bench.monitor.track('orthogonalize'):
        result = ortho.build(terms)
        if exponent is not None:
            result = ortho.with_exponent(result, exponent)
        li = ortho.verify_li(terms, result)

    critical = []
    for idx, worst in result.per_term_exponents.items():
        rows = []
        for h in result.h_list:
            quantity = ortho.critical_quantity(idx, h)
            rows.append({'companion': format_vector(h), 'quantity': format_vector(quantity),
                         'exponent': ortho.critical_exponent(idx, h) if not quantity.is_zero else None})
        critical.append({'index': idx.label(), 'exponent': worst, 'companions': rows})

    report.payload.update({
        'terms': [format_qterm(t) for t in terms],
        'M': result.M,
        'N': result.N,
        'g_list': [format_vector(g) for g in result.g_list],
        'companions': [format_vector(h) for h in result.h_list],
        'per_term_exponents': [row['exponent'] for row in critical],
        'p': result.p,
        'slack': result.slack,
        'critical': critical,
        'projections': [format_element(bench.algebra.element(f)) for f in result.f_list],
        'expectation': format_element(bench.algebra.normal_form(bench.algebra.expectation(
            bench.algebra.from_qform(terms)))),
        'expectation_norm_sq': li.expectation_norm_sq,
        'compressed_norm_sq': li.compressed_norm_sq,
        'scalars': [None if c is None else str(c) for c in li.scalars],
        'iv_identity': li.iv_identity,
        'iv_certificate': li.iv_certificate,
        'projections_bounded': ortho.projections_bounded(result),
        'failures': list(li.failures),
    })
    for name, value in li.verdicts.items():
        report.verdicts[name] = value


def cmd_orthogonalize(bench: Workbench, args: Namespace) -> Report:
    texts = bench.texts(args.inputs)
    if not texts:
        raise PreconditionError("usage: orthogonalize EXPR|@FILE [...]")
    report = bench.report(args, inputs=texts, exponent=args.exponent)
    _orthogonalize_into(bench, report, texts, args.exponent)
    return report


# ========== DYNAMICS ==========

def cmd_freeness(bench: Workbench, args: Namespace) -> Report:
    t_text, c_text = _need(args, 2, "(g,i,n) V[m]{i,...}")
    t, c = bench.semidirect(t_text), bench.cylinder(c_text)
    with bench.monitor.track('freeness'):
        verdict = bench.dynamics.freeness_witness(t, c)
    report = bench.report(args, element=format_semidirect(t), cylinder=format_cylinder(c))
    report.payload['kind'] = verdict.kind.value
    report.payload['point'] = None if verdict.point is None else _point_text(bench, verdict.point)
    report.payload['level'] = verdict.level
    report.payload['reason'] = verdict.reason
    if verdict.kind is FreenessKind.WITNESS:
        image = bench.dynamics.apply_partial(t, verdict.point)
        report.payload['image'] = _point_text(bench, image)
    report.verdicts['conclusive'] = verdict.kind is not FreenessKind.INCONCLUSIVE
    return report


def cmd_orbit(bench: Workbench, args: Namespace) -> Report:
    x_text, c_text = _need(args, 2, "v@N V[m]{i,...}")
    x, c = bench.point(x_text), bench.cylinder(c_text)
    t = bench.dynamics.orbit_mover(x, c)
    image = bench.dynamics.apply_partial(t, x)
    report = bench.report(args, point=_point_text(bench, x), cylinder=format_cylinder(c))
    report.payload['mover'] = format_semidirect(t)
    report.payload['image'] = _point_text(bench, image)
    report.verdicts['lands_in_cylinder'] = bench.dynamics.in_cylinder(image, c)
    return report


def cmd_ore(bench: Workbench, args: Namespace) -> Report:
    first, second = _need(args, 2, "(g,0,n) (g,0,n)")
    s1, s2 = bench.semidirect(first), bench.semidirect(second)
    l1, l2, common = bench.dynamics.ore_witness(s1, s2)
    report = bench.report(args, s1=format_semidirect(s1), s2=format_semidirect(s2))
    report.payload.update({'l1': format_semidirect(l1), 'l2': format_semidirect(l2),
                           'common': format_semidirect(common)})
    dyn = bench.dynamics
    report.verdicts['ore_identity'] = dyn.multiply(l1, s1) == common == dyn.multiply(l2, s2)
    return report


def cmd_relations_check(bench: Workbench, args: Namespace) -> Report:
    seed = args.seed if args.seed is not None else 0
    bound = args.bound if args.bound is not None else bench.dynamics.relations_sample_bound
    with bench.monitor.track('relations'):
        check = bench.dynamics.relations_check(bound, seed=seed)
    report = bench.report(args, bound=bound, seed=seed)
    report.payload.update(_check_section(check))
    report.verdicts.update(check.verdicts)
    return report


def _spectrum_section(bench: Workbench, depth: int) -> Dict[str, Any]:
    dyn = bench.dynamics
    failing = []
    checked = 0
    for x in dyn.points(depth):
        checked += 1
        check = dyn.spectrum_check(x)
        recovered = dyn.point_from_spectrum(lambda w, x=x: dyn.xi_contains(x, w), depth)
        if not check.all_true or recovered != x:
            failing.append(_point_text(bench, x))
    return {'depth': depth, 'points': checked, 'failing': failing}


def cmd_report_all(bench: Workbench, args: Namespace) -> Report:
    seed = args.seed if args.seed is not None else 0
    report = bench.report(args, seed=seed, input=args.input)
    payload = report.payload

    with bench.monitor.track('purity'):
        payload['purity'] = _purity_section(bench)
    with bench.monitor.track('cosets'):
        rows = _coset_rows(bench, min(3, bench.context.max_depth))
        payload['cosets'] = rows
        report.verdicts['multiplicative_index'] = all(
            row['index'] == bench.context.index(1) ** row['level'] for row in rows)
    with bench.monitor.track('relations'):
        check = bench.dynamics.relations_check(args.bound, seed=seed)
        payload['relations'] = _check_section(check)
        report.verdicts['relations'] = check.all_true
    with bench.monitor.track('expectation'):
        correspondence = bench.dynamics.expectation_correspondence_check(
            bench.dynamics.sample_qterms(seed=seed))
        payload['expectation_correspondence'] = _check_section(correspondence)
        report.verdicts['expectation_correspondence'] = correspondence.all_true
    with bench.monitor.track('spectrum'):
        depth = min(args.levels if args.levels is not None else 2, bench.context.max_depth)
        payload['spectrum'] = _spectrum_section(bench, depth)
        report.verdicts['spectrum'] = not payload['spectrum']['failing']
    radius = args.window if args.window is not None else bench.settings['oracle']['window_radius']
    oracle = _oracle_suite(bench, args, radius, bench.oracle.window(radius))
    payload['oracle'] = oracle.payload
    report.verdicts['random_words'] = oracle.verdicts['random_words']

    if args.input:
        section = bench.report(args)
        _orthogonalize_into(bench, section, read_expression_file(args.input.lstrip("@")), args.exponent)
        payload['orthogonalize'] = section.payload
        report.verdicts.update({f"li_{name}": value for name, value in section.verdicts.items()})
    return report


COMMANDS: Dict[str, Callable[[Workbench, Namespace], Report]] = {
    'normalize': cmd_normalize,
    'mul': cmd_mul,
    'adjoint': cmd_adjoint,
    'expect': cmd_expect,
    'equal': cmd_equal,
    'oracle-check': cmd_oracle_check,
    'cosets': cmd_cosets,
    'purity': cmd_purity,
    'orthogonalize': cmd_orthogonalize,
    'freeness': cmd_freeness,
    'orbit': cmd_orbit,
    'ore': cmd_ore,
    'relations-check': cmd_relations_check,
    'report-all': cmd_report_all,
}
