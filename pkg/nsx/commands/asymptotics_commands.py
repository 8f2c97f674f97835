from nsx.commands.registry import CommandGroup
from nsx.models.mp_types import BigComplex
from nsx.services.asymptotics_service import AsymptoticsService
from nsx.services.export_service import export_service
from nsx.utils.logger import logger

asymptotics_group = CommandGroup('asymptotics')


@asymptotics_group.command('asymptotics')
def asymptotics(pipeline):
    problem = pipeline.problem
    options = problem.options
    service = AsymptoticsService(options.tube_width, problem.epsilon, options.boundary_samples)
    grid = pipeline.grid()
    indices = problem.indices()
    report = service.compare_run(pipeline.germ, pipeline.contour, pipeline.surface, pipeline.density,
                                 pipeline.triples, indices, grid, problem.epsilon,
                                 boundary=options.boundary_samples > 0)
    weak_triples = {n: pipeline.triples[n] for n in indices}
    report.weak = service.weak_asymptotics_check(weak_triples, pipeline.contour, grid, options.n_min)
    if options.error_rate_point is not None:
        z = BigComplex.from_pair(options.error_rate_point).value
        report.error_rate = service.error_rate_check(pipeline.germ, weak_triples, pipeline.contour, z)
    export_service.add_deviations(pipeline.bundle, report)
    diagnostics = report.to_dict(pipeline.settings.OUTPUT_DIGITS)
    diagnostics['zero_accounting'] = {str(n): row for n, row in sorted(service.zero_accounting(report).items())}
    pipeline.diagnostics['asymptotics'] = diagnostics
    logger.info(f'asymptotics: {len(report.records)} comparisons, {report.excluded} points excluded')
    pipeline.mark_done('asymptotics')
