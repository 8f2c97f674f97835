import json

import pytest

from nsx.app import main, registry
from nsx.commands.registry import CommandGroup, CommandRegistry
from nsx.models.problem_config import load_problem_config
from nsx.services.export_service import ExportService, OutputBundle
from nsx.utils.errors import ValidationError

CHEBYSHEV = {
    'germ': {'kind': 'two-point-sqrt', 'branch_points': [[-1, 0], [1, 0]]},
    'n_max': 4
}


def run_cli(command, config_path, out_dir, *extra):
    return main([command, '--config', str(config_path), '--out', str(out_dir), '--precision', '128', *extra])


def test_registry_lists_every_command():
    assert registry.names == ['all', 'asymptotics', 'contour', 'pade', 'surface']


def test_registry_rejects_duplicate_commands():
    first, second = CommandGroup('a'), CommandGroup('b')
    first.command('run')(lambda pipeline: None)
    second.command('run')(lambda pipeline: None)
    commands = CommandRegistry()
    commands.register_group(first)
    with pytest.raises(KeyError):
        commands.register_group(second)


def test_contour_command(write_config, tmp_path, capsys):
    out = tmp_path / 'out'
    assert run_cli('contour', write_config(CHEBYSHEV), out) == 0
    contour = json.loads((out / 'contour.json').read_text(encoding='utf-8'))
    assert float(contour['capacity']) == pytest.approx(0.5, abs=1e-12)
    assert contour['omega'] == [] and contour['tau'] == []
    arcs = (out / 'arcs.csv').read_text(encoding='utf-8').splitlines()
    assert arcs[0] == 'arc_id,s,re,im'
    assert len(arcs) > 2
    report = json.loads((out / 'report.json').read_text(encoding='utf-8'))
    assert report['command'] == 'contour'
    assert 'contour' in report['completed']
    assert report['config']['precision_bits'] == 128
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert summary['success']


def test_pade_command(write_config, tmp_path):
    out = tmp_path / 'out'
    assert run_cli('pade', write_config(CHEBYSHEV), out) == 0
    pade = json.loads((out / 'pade.json').read_text(encoding='utf-8'))
    assert pade['normal_indices'] == [0, 1, 2, 3, 4]
    second = pade['triples'][2]
    assert second['n'] == 2
    assert [float(re) for re, _ in second['q']] == pytest.approx([-0.5, 0, 1])
    assert all(float(im) == 0 for _, im in second['q'])


@pytest.mark.parametrize('command', ['contour', 'pade'])
def test_json_outputs_are_byte_identical(write_config, tmp_path, command):
    config = write_config(CHEBYSHEV)
    assert run_cli(command, config, tmp_path / 'first') == 0
    assert run_cli(command, config, tmp_path / 'second') == 0
    names = sorted(p.name for p in (tmp_path / 'first').glob('*.json'))
    assert 'report.json' in names
    for name in names:
        assert (tmp_path / 'first' / name).read_bytes() == (tmp_path / 'second' / name).read_bytes(), name


def test_timings_go_to_stdout_not_report(write_config, tmp_path, capsys):
    out = tmp_path / 'out'
    assert run_cli('pade', write_config(CHEBYSHEV), out) == 0
    report = json.loads((out / 'report.json').read_text(encoding='utf-8'))
    assert 'timings' not in report
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert 'pade.normal_indices' in summary['timings']['stages']
    assert summary['timings']['overall']['count'] >= 1


def test_missing_branch_points_writes_nothing(write_config, tmp_path, capsys):
    out = tmp_path / 'out'
    config = write_config({'germ': {'kind': 'two-point-sqrt'}, 'n_max': 2})
    assert run_cli('contour', config, out) == 2
    assert not out.exists()
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error['success'] is False
    assert error['error'] == 'ValidationError'
    assert 'branch_points' in error['context']['errors']


@pytest.mark.parametrize('data', [
    {'germ': {'kind': 'meromorphic', 'branch_points': [[-1, 0], [1, 0]]}, 'n_max': 2},
    {'germ': {'kind': 'two-point-sqrt', 'branch_points': [[1, 0], [1, 0]]}, 'n_max': 2},
    {'germ': {'kind': 'two-point-sqrt', 'branch_points': [[-1, 0], [1, 0]]}, 'n_max': -1},
    {'germ': {'kind': 'two-point-sqrt', 'branch_points': [[-1, 0], [1, 0]]}, 'n_max': 2, 'colour': 'red'},
])
def test_invalid_configs_exit_with_validation_code(write_config, tmp_path, data):
    out = tmp_path / 'out'
    assert run_cli('pade', write_config(data), out) == 2
    assert not out.exists()


def test_missing_config_file(tmp_path):
    assert run_cli('pade', tmp_path / 'absent.json', tmp_path / 'out') == 2


def test_load_problem_config_defaults_and_overrides(write_config):
    path = write_config({**CHEBYSHEV, 'options': {'n_list': [3, 1, 3]}})
    problem = load_problem_config(path, {'precision_bits': 200, 'epsilon': 0.05}, epsilon=0.2, precision_bits=None)
    assert problem.precision_bits == 200
    assert problem.epsilon == 0.2
    assert problem.options.n_list == [1, 3]
    assert problem.indices() == [1, 3]
    assert problem.echo()['germ']['kind'] == 'two-point-sqrt'


def test_load_problem_config_rejects_non_objects(write_config, tmp_path):
    with pytest.raises(ValidationError):
        load_problem_config(write_config([1, 2, 3]))
    broken = tmp_path / 'broken.json'
    broken.write_text('{"germ": ', encoding='utf-8')
    with pytest.raises(ValidationError):
        load_problem_config(broken)


def test_germ_spec_builds_germ(write_config):
    problem = load_problem_config(write_config(CHEBYSHEV))
    germ = problem.germ.to_germ(problem.precision_bits)
    assert germ.kind == 'two-point-sqrt'
    assert len(germ.branch_points) == 2


def test_export_commit_writes_all_files(tmp_path):
    bundle = OutputBundle()
    bundle.add_json('data.json', {'values': [1, 2]})
    bundle.add_table('table.csv', ['a', 'b'], [[1, 'x'], [2, 'y']])
    assert len(bundle) == 2 and 'table.csv' in bundle
    paths = ExportService().commit(bundle, tmp_path / 'out')
    assert [p.name for p in paths] == ['data.json', 'table.csv']
    assert json.loads((tmp_path / 'out' / 'data.json').read_text(encoding='utf-8')) == {'values': [1, 2]}
    assert (tmp_path / 'out' / 'table.csv').read_text(encoding='utf-8') == 'a,b\n1,x\n2,y\n'
    assert sorted(p.name for p in (tmp_path / 'out').iterdir()) == ['data.json', 'table.csv']


@pytest.mark.slow
def test_all_commands_on_segment(write_config, tmp_path, capsys):
    out = tmp_path / 'out'
    config = write_config({**CHEBYSHEV, 'options': {'grid_count': 6, 'boundary_samples': 2}})
    assert run_cli('all', config, out) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ['arcs.csv', 'contour.json', 'deviations.csv', 'pade.json', 'report.json', 'surface.json']
    report = json.loads((out / 'report.json').read_text(encoding='utf-8'))
    assert report['completed'] == ['contour', 'pade', 'surface', 'asymptotics']
    timings = json.loads(capsys.readouterr().out.strip().splitlines()[-1])['timings']
    assert set(timings['stages']) >= {'pade.normal_indices', 'surface.build'}
    surface = json.loads((out / 'surface.json').read_text(encoding='utf-8'))
    assert surface['genus'] == 0
    assert [entry['n'] for entry in surface['divisors']] == [1, 2, 3, 4]
