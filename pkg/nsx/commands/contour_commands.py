from nsx.commands.registry import CommandGroup
from nsx.services.contour_service import contour_service
from nsx.services.export_service import export_service
from nsx.utils.logger import logger
from nsx.utils.numformat import format_real

contour_group = CommandGroup('contour')


@contour_group.command('contour')
def contour(pipeline):
    c = pipeline.contour
    digits = pipeline.settings.OUTPUT_DIGITS
    omega, tau = contour_service.cycle_constants(c)
    jumps = contour_service.phi_jump_residuals(c)
    data = c.to_dict(digits)
    data['omega'] = [format_real(x, digits) for x in omega]
    data['tau'] = [format_real(x, digits) for x in tau]
    pipeline.bundle.add_json('contour.json', data)
    export_service.add_arcs(pipeline.bundle, c)
    pipeline.diagnostics['contour'] = {
        'capacity': c.capacity,
        'leja_capacity': contour_service.leja_capacity(c),
        'boundary_residual': c.boundary_residual,
        's_property_residual': contour_service.s_property_residual(c),
        'period_residual': c.period_residual,
        'phi_jump_a': max((a for a, _ in jumps), default=0),
        'phi_jump_b': max((b for _, b in jumps), default=0),
        'trivalent_angles': contour_service.trivalent_angles(c)
    }
    logger.info(f'contour: genus {c.genus}, capacity {data["capacity"]}')
    pipeline.mark_done('contour')
