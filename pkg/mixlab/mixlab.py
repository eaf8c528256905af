import argparse
import json
import logging
import os.path
import sys
import time

from . import __version__
from .artifacts import ensure_output_dir
from .artifacts import error_document
from .artifacts import write_error
from .artifacts import write_manifest
from .config import echo
from .config import load_config
from .config import validate_config
from .errors import ConfigError
from .pool import resolve_workers
from .types import restricted_int
from .types import restricted_str

log = logging.getLogger(__name__)

LOG_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)
LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


class ArgumentParser(argparse.ArgumentParser):
    """ Raises ValueError instead of exiting, so usage errors share the config error path. """

    def error(self, message):
        raise ValueError(message)


def _path():
    return restricted_str(regex=r'^[A-Za-z0-9_./~+-]+$', maxlen=4096)


class Mixlab:
    def __init__(self, experiments=None, description=None):
        if experiments is None:
            from .experiments import EXPERIMENTS as experiments
        self._experiments = experiments
        self._description = description or 'Run mixing and enhanced-dissipation experiments from a config file.'
        self._parsed_args = None
        self._config = None

    def _add_common(self, required_args, optional_args):
        optional_args.add_argument(
            '-h', '--help', action='help', default=argparse.SUPPRESS,
            help='show this help message and exit'
        )
        required_args.add_argument('config', type=_path(), help='YAML experiment config')
        optional_args.add_argument(
            '-v', '--verbose', action='count', default=0,
            help='log progress (-v) or everything (-vv) to stderr'
        )

    def _build_argparser(self):
        parser = ArgumentParser(
            prog='mixlab',
            add_help=False,
            description=self._description,
        )
        optionalArgs = parser.add_argument_group('optional arguments')
        optionalArgs.add_argument(
            '-h', '--help', action='help', default=argparse.SUPPRESS,
            help='show this help message and exit'
        )
        optionalArgs.add_argument('--version', action='version', version='%(prog)s ' + __version__)

        commands = parser.add_subparsers(dest='command', metavar='command')
        commands.required = True

        run = commands.add_parser('run', add_help=False, help='run the experiment named in a config')
        requiredArgs = run.add_argument_group('required arguments')
        optionalArgs = run.add_argument_group('optional arguments')
        self._add_common(requiredArgs, optionalArgs)
        optionalArgs.add_argument('--output-dir', type=_path(), help='overrides the output_dir key')
        optionalArgs.add_argument('--workers', type=restricted_int(minimum=1),
                                  help='worker processes; overrides the workers key and $MIXLAB_WORKERS')

        validate = commands.add_parser('validate', add_help=False, help='check a config without running it')
        self._add_common(validate.add_argument_group('required arguments'),
                         validate.add_argument_group('optional arguments'))

        return parser

    def parse_args(self, argv=None):
        parser = self._build_argparser()
        try:
            args = parser.parse_args(argv)
            config = validate_config(load_config(args.config))
            if config['experiment'] not in self._experiments:
                raise ConfigError('unknown experiment {}'.format(config['experiment']))
            if getattr(args, 'output_dir', None):
                config['output_dir'] = args.output_dir
            self._parsed_args = args
            self._config = config
        except ValueError as exc:
            self._report(error_document(exc), code=getattr(exc, 'code', 'usage'))
            sys.exit(3)

    @staticmethod
    def _report(document, code=None):
        if code is not None:
            document['error'] = code
        print(json.dumps(document, sort_keys=True), file=sys.stderr)

    def configure_logging(self):
        verbose = min(self._parsed_args.verbose, len(LOG_LEVELS) - 1)
        logging.basicConfig(level=LOG_LEVELS[verbose], format=LOG_FORMAT, stream=sys.stderr)

    def auto(self):
        self.parse_args()
        self.configure_logging()
        status = self.execute()
        sys.exit(0 if status else 1)

    def execute(self):
        if self._parsed_args.command == 'validate':
            print('{}: valid {} config'.format(self._parsed_args.config, self._config['experiment']))
            return True
        return self.run()

    def run(self):
        config = self._config
        name = config['experiment']
        output_dir = config['output_dir']
        try:
            workers = resolve_workers(self._parsed_args.workers, config['workers'])
            ensure_output_dir(output_dir)
            experiment = self._experiments[name](config, output_dir, workers)

            log.info('running %s with %d worker(s) into %s', name, workers, output_dir)
            start = time.perf_counter()
            experiment.run()
            wall_time = time.perf_counter() - start
            write_manifest(output_dir, echo(config), __version__, wall_time, experiment.artifacts)
        except Exception as exc:
            log.debug('%s failed', name, exc_info=True)
            document = error_document(exc, name)
            self._report(document)
            if os.path.isdir(output_dir):
                write_error(output_dir, document)
            return False

        log.info('%s finished in %.1fs', name, wall_time)
        return True


def main():
    Mixlab().auto()
