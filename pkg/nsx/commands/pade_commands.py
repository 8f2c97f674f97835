from nsx.commands.registry import CommandGroup
from nsx.services.pade_service import pade_service
from nsx.utils.logger import logger

pade_group = CommandGroup('pade')


@pade_group.command('pade')
def pade(pipeline):
    digits = pipeline.settings.OUTPUT_DIGITS
    triples = pipeline.triples
    normal = sorted(pipeline.normal_indices)
    pipeline.bundle.add_json('pade.json', {
        'germ': pipeline.germ.to_dict(digits),
        'n_max': pipeline.problem.n_max,
        'normal_indices': normal,
        'triples': [triples[n].to_dict(digits) for n in sorted(triples)]
    })
    pipeline.diagnostics['pade'] = {
        'normal_count': len(normal),
        'abnormal_indices': [n for n in sorted(triples) if n not in pipeline.normal_indices],
        'exact': all(t.exact for t in triples.values()),
        'max_precision_bits': max(t.precision_bits for t in triples.values()),
        'remainder_order_exact': {str(n): pade_service.remainder_order_exact(triples[n], pipeline.moments)
                                  for n in sorted(triples)}
    }
    logger.info(f'pade: {len(triples)} triples, normal indices {normal}')
    pipeline.mark_done('pade')
