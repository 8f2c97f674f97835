from nsx.commands.registry import CommandGroup
from nsx.services.surface_service import surface_service
from nsx.services.szego_service import szego_service
from nsx.utils.logger import logger

surface_group = CommandGroup('surface')


@surface_group.command('surface')
def surface(pipeline):
    digits = pipeline.settings.OUTPUT_DIGITS
    data = pipeline.surface
    diagnostics = surface_service.diagnostics(data)
    divisors, checks = None, None
    if data.genus <= szego_service.genus_cap:
        history = pipeline.szego_history
        divisors = []
        for item in history:
            entry = item.to_dict(digits)
            entry['jump_residual'] = szego_service.jump_residual(data, pipeline.density, item.current)
            entry['ratio_bound'] = szego_service.ratio_bound(data, pipeline.density, item)
            divisors.append(entry)
        checks = szego_service.divisor_diagnostics(history, data.genus)
    else:
        logger.warning(f'surface: genus {data.genus} above the cap, divisors skipped')
    result = data.to_dict(digits)
    result['divisors'] = divisors
    pipeline.bundle.add_json('surface.json', result)
    diagnostics['divisors'] = checks
    pipeline.diagnostics['surface'] = diagnostics
    logger.info(f'surface: genus {data.genus}, {len(divisors or [])} divisors')
    pipeline.mark_done('surface')
