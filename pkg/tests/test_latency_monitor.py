import pytest

from nsx.utils.latency_monitor import LatencyMonitor, measure_latency, monitor


def test_stage_and_overall_statistics():
    stats = LatencyMonitor(max_samples=3)
    for stage, latency in [('a', 1.0), ('b', 3.0), ('a', 5.0), ('a', 7.0)]:
        stats.record(stage, latency)
    summary = stats.get_stats()
    assert summary['overall'] == {'avg': 5.0, 'min': 3.0, 'max': 7.0, 'count': 3}
    assert summary['stages']['a'] == {'avg': pytest.approx(13 / 3), 'min': 1.0, 'max': 7.0, 'count': 3}
    assert list(summary['stages']) == ['a', 'b']
    assert stats.get_average() == 5.0
    assert stats.get_stage_stats('missing')['count'] == 0


def test_reset_clears_every_sample():
    stats = LatencyMonitor()
    stats.record('a', 2.0)
    stats.reset()
    assert stats.get_stats() == {'overall': {'avg': 0, 'min': 0, 'max': 0, 'count': 0}, 'stages': {}}


def test_measure_latency_records_failures():
    monitor.reset()

    @measure_latency('test.fails')
    def fails():
        raise RuntimeError('boom')

    with pytest.raises(RuntimeError):
        fails()
    assert monitor.get_stage_stats('test.fails')['count'] == 1
    assert monitor.get_stats()['overall']['count'] == 1
