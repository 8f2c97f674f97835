from nsx.commands.asymptotics_commands import asymptotics
from nsx.commands.contour_commands import contour
from nsx.commands.pade_commands import pade
from nsx.commands.registry import CommandGroup
from nsx.commands.surface_commands import surface

all_group = CommandGroup('all')


@all_group.command('all')
def run_all(pipeline):
    for step in (contour, pade, surface, asymptotics):
        step(pipeline)
