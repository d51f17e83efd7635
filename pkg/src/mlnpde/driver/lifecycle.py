from statemachine import State, StateMachine

import mlnpde.customlogger as log
from mlnpde.driver.report import (
    EXIT_FAILED, EXIT_INCONCLUSIVE, EXIT_IO, EXIT_PASSED, EXIT_PRECONDITION, FAIL, INCONCLUSIVE, PASS)


class RunLifecycle(StateMachine):
    """configured → running → passed | failed | inconclusive, or aborted from either."""

    configured = State(initial=True)
    running = State()
    passed = State(final=True)
    failed = State(final=True)
    inconclusive = State(final=True)
    aborted = State(final=True)

    start = configured.to(running)
    succeed = running.to(passed)
    fail = running.to(failed)
    undecided = running.to(inconclusive)
    abort = configured.to(aborted) | running.to(aborted)

    def __init__(self, experiment='run'):
        self.experiment = experiment
        self.abort_code = EXIT_IO
        self._logger = log.get_logger('driver')
        super().__init__()

    def conclude(self, outcome):
        {PASS: self.succeed, FAIL: self.fail, INCONCLUSIVE: self.undecided}[outcome]()

    def before_abort(self, code=EXIT_IO):
        self.abort_code = code

    def on_enter_running(self):
        self._logger.info('Experiment %s started', self.experiment)

    def on_enter_state(self, target):
        if target.final:
            self._logger.info('Experiment %s finished: %s', self.experiment, target.id)

    @property
    def exit_code(self):
        state = self.current_state
        if state == self.aborted:
            return self.abort_code
        return {
            self.passed.id: EXIT_PASSED,
            self.failed.id: EXIT_FAILED,
            self.inconclusive.id: EXIT_INCONCLUSIVE,
        }.get(state.id, EXIT_PRECONDITION)
