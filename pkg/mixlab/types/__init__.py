# -*- encoding: utf8 -*-
import math
import re


class restricted_str:
    __name__ = 'string'

    def __init__(self, allowed_chars=None, regex=None, minlen=1, maxlen=255):
        if minlen is not None and maxlen is not None and minlen > maxlen:
            raise ValueError('minlen must be smaller than maxlen')
        if not allowed_chars and not regex:
            raise ValueError('either allowed_chars or regex must be supplied')
        if allowed_chars and regex:
            raise ValueError('allowed_chars or regex are mutally exclusive')

        if allowed_chars:
            self._regex = re.compile(r'\A[{}]+\Z'.format(allowed_chars))
        else:
            if not regex.startswith('^') or not regex.endswith('$'):
                raise ValueError('regex must be anchored')

            # replace $ at the end with \Z, so we can't match "a\n" for "^a$"
            self._regex = re.compile(r'\A' + regex[1:-1] + r'\Z')

        self._minlen = minlen
        self._maxlen = maxlen

    def __call__(self, val):
        if not isinstance(val, str):
            raise ValueError('expected a string')
        if self._maxlen is not None and len(val) > self._maxlen:
            raise ValueError('string is too long (must be <= {})'.format(self._maxlen))
        if self._minlen is not None and len(val) < self._minlen:
            raise ValueError('string is too short (must be >= {})'.format(self._minlen))
        if not self._regex.match(val):
            raise ValueError('invalid value')
        return val


class choice:
    __name__ = 'choice'

    def __init__(self, *options):
        if not options:
            raise ValueError('at least one option must be given')
        self._options = options

    def __call__(self, val):
        if val not in self._options:
            raise ValueError('must be one of {}'.format(', '.join(str(o) for o in self._options)))
        return val


class restricted_int:
    __name__ = 'integer'

    def __init__(self, minimum=None, maximum=None):
        if minimum is not None:
            try:
                minimum = int(minimum)
            except (ValueError, TypeError):
                raise ValueError('minimum is not a integer')

        if maximum is not None:
            try:
                maximum = int(maximum)
            except (ValueError, TypeError):
                raise ValueError('maximum is not a integer')

        if minimum is not None and maximum is not None and minimum > maximum:
            raise ValueError('minimum must be smaller than maximum')

        self._minimum = minimum
        self._maximum = maximum

    def __call__(self, val):
        # yaml hands us bools for yes/no, which int() would happily accept
        if isinstance(val, bool):
            raise ValueError('invalid integer')
        if isinstance(val, float) and not val.is_integer():
            raise ValueError('invalid integer')
        try:
            val = int(val)
        except (TypeError, ValueError):
            raise ValueError('invalid integer')

        if self._minimum is not None and val < self._minimum:
            raise ValueError('value too small (must be >= {})'.format(self._minimum))
        if self._maximum is not None and val > self._maximum:
            raise ValueError('value too big (must be <= {})'.format(self._maximum))

        return val


class power_of_two(restricted_int):
    __name__ = 'power of two'

    def __call__(self, val):
        val = super().__call__(val)
        if val < 1 or val & (val - 1):
            raise ValueError('value must be a power of two')
        return val


class restricted_float:
    """
    Validate a finite float within bounds.

    *exclusive* turns both bounds into strict ones, which is what open level
    intervals like (0, 1) need.

    """
    __name__ = 'float'

    def __init__(self, minimum=None, maximum=None, exclusive=False):
        if minimum is not None and maximum is not None and minimum > maximum:
            raise ValueError('minimum must be smaller than maximum')

        self._minimum = minimum
        self._maximum = maximum
        self._exclusive = exclusive

    def __call__(self, val):
        if isinstance(val, bool):
            raise ValueError('invalid float')
        try:
            val = float(val)
        except (TypeError, ValueError):
            raise ValueError('invalid float')
        if not math.isfinite(val):
            raise ValueError('value must be finite')

        if self._minimum is not None:
            if val < self._minimum or (self._exclusive and val == self._minimum):
                raise ValueError('value too small (must be {} {})'.format(
                    '>' if self._exclusive else '>=', self._minimum))
        if self._maximum is not None:
            if val > self._maximum or (self._exclusive and val == self._maximum):
                raise ValueError('value too big (must be {} {})'.format(
                    '<' if self._exclusive else '<=', self._maximum))

        return val


class float_list:
    __name__ = 'list of floats'

    def __init__(self, minlen=1, maxlen=None, increasing=False, **bounds):
        self._item = restricted_float(**bounds)
        self._minlen = minlen
        self._maxlen = maxlen
        self._increasing = increasing

    def __call__(self, val):
        if isinstance(val, (str, bytes)) or not hasattr(val, '__iter__'):
            raise ValueError('expected a list')

        val = [self._item(v) for v in val]

        if self._minlen is not None and len(val) < self._minlen:
            raise ValueError('list is too short (must have >= {} items)'.format(self._minlen))
        if self._maxlen is not None and len(val) > self._maxlen:
            raise ValueError('list is too long (must have <= {} items)'.format(self._maxlen))
        if self._increasing and any(b <= a for a, b in zip(val, val[1:])):
            raise ValueError('list must be strictly increasing')

        return val


class field_spec:
    """
    Validate a velocity field name.

    Accepts the built-in names and ``expr:<expression>`` where the expression
    may only use the documented grammar: numbers, x1, x2, + - * / ^ **,
    parentheses, sin, cos, exp, pi and e.

    """
    __name__ = 'field'

    BUILTIN = ('cellular', 'shear-cos', 'harmonic', 'anharmonic')
    EXPR_PREFIX = 'expr:'
    EXPR_WORDS = ('x1', 'x2', 'sin', 'cos', 'exp', 'pi', 'e')
    NUMBER_REGEX = r'(?<![a-z0-9.])(?:\d+\.?\d*|\.\d+)(?:e[+\-]?\d+)?'

    def __init__(self):
        self._expression = restricted_str(regex=r'^[0-9a-z .+\-*/^()]+$', maxlen=512)

    def __call__(self, val):
        if not isinstance(val, str):
            raise ValueError('expected a string')
        if val in self.BUILTIN:
            return val
        if not val.startswith(self.EXPR_PREFIX):
            raise ValueError('unknown field (must be one of {} or expr:...)'.format(', '.join(self.BUILTIN)))

        expression = self._expression(val[len(self.EXPR_PREFIX):].strip())
        for word in re.findall(r'[a-z][a-z0-9]*', re.sub(self.NUMBER_REGEX, ' ', expression)):
            if word not in self.EXPR_WORDS:
                raise ValueError('unknown name in expression: {}'.format(word))

        return self.EXPR_PREFIX + expression


class boolean:
    __name__ = 'boolean'

    def __call__(self, val):
        if not isinstance(val, bool):
            raise ValueError('expected true or false')
        return val


class point:
    __name__ = 'point'

    def __init__(self):
        self._coords = float_list(minlen=2, maxlen=2)

    def __call__(self, val):
        return tuple(self._coords(val))


__all__ = [
    'boolean',
    'choice',
    'field_spec',
    'float_list',
    'point',
    'power_of_two',
    'restricted_float',
    'restricted_int',
    'restricted_str',
]
