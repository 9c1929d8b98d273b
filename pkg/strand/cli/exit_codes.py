"""Process exit codes of the command-line tool."""

from strand.services.bench_service import BenchError
from strand.services.parsing import ParseError
from strand.services.serialization import SchemaError

OK = 0
VALIDATION_FAILURE = 1
USAGE_ERROR = 2

_USAGE_ERRORS = (ParseError, SchemaError, BenchError, OSError)


def exit_code_for(exc: BaseException) -> int:
    """Parse, schema, file and usage problems exit 2; any other failure exits 1."""
    return USAGE_ERROR if isinstance(exc, _USAGE_ERRORS) else VALIDATION_FAILURE
