import time
from collections import deque
from functools import wraps


def summarize(samples):
    if not samples:
        return {'avg': 0, 'min': 0, 'max': 0, 'count': 0}
    return {
        'avg': sum(samples) / len(samples),
        'min': min(samples),
        'max': max(samples),
        'count': len(samples)
    }


class LatencyMonitor:
    def __init__(self, max_samples=100):
        self.latencies = deque(maxlen=max_samples)
        self.stage_latencies = {}
        self.max_samples = max_samples

    def record(self, stage, latency_ms):
        self.latencies.append(latency_ms)
        if stage not in self.stage_latencies:
            self.stage_latencies[stage] = deque(maxlen=self.max_samples)
        self.stage_latencies[stage].append(latency_ms)

    def get_average(self):
        return summarize(self.latencies)['avg']

    def get_stage_stats(self, stage):
        return summarize(self.stage_latencies.get(stage))

    def get_stats(self):
        return {
            'overall': summarize(self.latencies),
            'stages': {stage: self.get_stage_stats(stage) for stage in sorted(self.stage_latencies)}
        }

    def reset(self):
        self.latencies.clear()
        self.stage_latencies = {}


monitor = LatencyMonitor()


def measure_latency(stage):
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            try:
                return func(*args, **kwargs)
            finally:
                monitor.record(stage, (time.perf_counter() - start_time) * 1000)
        return wrapper
    return decorator
