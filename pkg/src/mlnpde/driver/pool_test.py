import threading
import time

from mlnpde.driver.pool import fan_out


def test_results_keep_input_order():
    def slow_square(x):
        time.sleep(0.01 * (5 - x))
        return x * x

    assert fan_out(slow_square, range(5), workers=4) == [0, 1, 4, 9, 16]


def test_single_worker_runs_inline():
    seen = []
    fan_out(lambda x: seen.append(threading.current_thread().name), [1, 2], workers=1)
    assert seen == [threading.current_thread().name] * 2
    assert fan_out(str, [], workers=4) == []
