from .definition import SchemeDefinition, SchemeError, TargetSpec, dump_scheme, load_scheme, scheme_from_dict, scheme_to_dict
from .formulas import CALCULATORS, TABLE_VALUES, calculate
from .registry import FILE_SLOTS, SMS_PATTERN_TAGS, builtin_names, builtin_registry, get_scheme
from .run import PatternReport, SchemeRun, rationalize, run

__all__ = [
    "CALCULATORS",
    "FILE_SLOTS",
    "SMS_PATTERN_TAGS",
    "TABLE_VALUES",
    "PatternReport",
    "SchemeDefinition",
    "SchemeError",
    "SchemeRun",
    "TargetSpec",
    "builtin_names",
    "builtin_registry",
    "calculate",
    "dump_scheme",
    "get_scheme",
    "load_scheme",
    "rationalize",
    "run",
    "scheme_from_dict",
    "scheme_to_dict",
]
