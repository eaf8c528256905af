class MixlabError(Exception):
    """ base class of all failures an experiment can report """
    code = 'error'


class StallError(MixlabError):
    code = 'stall'


class NoReturnError(MixlabError):
    code = 'no-return'


class CFLViolation(MixlabError):
    code = 'cfl'


class FitQualityError(MixlabError):
    code = 'fit-quality'


class DegenerateFieldError(MixlabError):
    code = 'degenerate-field'


class OutsideChartError(MixlabError, ValueError):
    code = 'outside-chart'


class ConfigError(MixlabError, ValueError):
    code = 'config'


class OutputError(MixlabError):
    code = 'output-dir'


__all__ = [
    'MixlabError',
    'StallError',
    'NoReturnError',
    'CFLViolation',
    'FitQualityError',
    'DegenerateFieldError',
    'OutsideChartError',
    'ConfigError',
    'OutputError',
]
