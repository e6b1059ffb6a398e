import csv
import json
import logging
import os
import re
import numpy as np
import requests
from typing import Any, Dict, Iterable, List, Sequence, Union

from psig_tools import exceptions


logger = logging.getLogger(__name__)

# Numbers are written with 17 significant digits so that every float round-trips exactly and
# two runs with the same seed produce byte-identical files.
_NUMBER_FORMAT = '%.17g'

_KEY_VALUE_REGEX = r'\s*([A-Za-z_][-A-Za-z0-9_.]*)\s*=\s*(.*?)\s*'


def download(url: str) -> str:
    """Reads the contents located at the url into memory and returns them as text.

    Urls starting with http are fetched with an http request. All others are assumed to be local file paths
    and read from the local file system.

    Args:
        url: The url to the content to be downloaded, or the path to the local file.

    Returns:
        Downloaded content as str.

    Raises:
        TypeError: If the url is not a str type.
    """
    if not isinstance(url, str):
        raise TypeError('The url/path must be a (str) type, not {}!'.format(type(url)))

    if url.startswith('http'):
        return download_http(url)
    else:
        return read_local_file(url)


def download_http(url: str) -> str:
    """Makes an http request for the contents at the given url and returns the response body.

    Args:
        url: The url to the content to be downloaded.

    Returns:
        Content returned from the server.

    Raises:
        requests.exceptions.HTTPError: If the server answers with an error status.
    """
    response = requests.get(url)
    response.raise_for_status()
    return response.text


def read_local_file(path: str) -> str:
    """Reads the file contents and returns them.

    Args:
        path: Path to the local file to be loaded.

    Returns:
        contents: The loaded content.
    """
    with open(os.path.abspath(path), 'r') as f:
        contents = f.read()
    return contents


def parse_key_value_text(text: str) -> Dict[str, str]:
    """Parse the plain-text ``key = value`` format used by run configs and MLP weight files.

    Blank lines and lines starting with ``#`` are skipped. Keys are normalized so that ``mc-repeats``
    and ``mc_repeats`` name the same setting.

    Args:
        text: The file content.

    Returns:
        A dict mapping normalized keys to their raw (stripped) string values.

    Raises:
        ValidationError: If a line is not a ``key = value`` pair or a key is repeated.
    """
    entries = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith('#'):
            continue
        matched = re.fullmatch(_KEY_VALUE_REGEX, stripped)
        if not matched:
            raise exceptions.ValidationError(
                'Invalid config line {}: {!r} is not a "key = value" pair.'.format(
                    lineno, line
                )
            )
        key = normalize_key(matched.group(1))
        if key in entries:
            raise exceptions.ValidationError(
                'Invalid config line {}: duplicate key {!r}.'.format(lineno, key)
            )
        entries[key] = matched.group(2)
    return entries


def load_key_value_file(path: str) -> Dict[str, str]:
    """Load and parse a ``key = value`` file from a local path or an http(s) url."""
    return parse_key_value_text(download(path))


def normalize_key(key: str) -> str:
    return key.strip().lower().replace('-', '_')


def parse_vector(text: Union[str, Sequence[float]]) -> List[float]:
    """Parse a comma-separated list of reals, e.g. ``"1,1,1"``.

    Args:
        text: The comma-separated string, or an already parsed sequence.

    Returns:
        The list of floats.

    Raises:
        ValidationError: If any item is not a finite real number.
    """
    if not isinstance(text, str):
        items = list(text)
    else:
        items = [item for item in text.split(',') if item.strip()]
    if not items:
        raise exceptions.ValidationError('Expected a comma-separated list of numbers.')
    values = []
    for item in items:
        try:
            value = float(item)
        except (TypeError, ValueError):
            raise exceptions.ValidationError('{!r} is not a real number.'.format(item))
        if value != value or value in (float('inf'), float('-inf')):
            raise exceptions.ValidationError('{!r} is not finite.'.format(item))
        values.append(value)
    return values


def parse_int_list(text: Union[str, Sequence[int]]) -> List[int]:
    """Parse a comma-separated list of integers, e.g. ``"10,100,1000"``."""
    if not isinstance(text, str):
        items = list(text)
    else:
        items = [item for item in text.split(',') if item.strip()]
    if not items:
        raise exceptions.ValidationError('Expected a comma-separated list of integers.')
    try:
        return [int(item) for item in items]
    except (TypeError, ValueError):
        raise exceptions.ValidationError(
            '{!r} is not a list of integers.'.format(text)
        )


def format_number(value: Any) -> str:
    """Format a number for CSV output; integers stay integers, floats get 17 significant digits."""
    if isinstance(value, bool) or value is None:
        return str(value)
    if isinstance(value, int):
        return str(value)
    try:
        return _NUMBER_FORMAT % float(value)
    except (TypeError, ValueError):
        return str(value)


def metadata_line(version: str, seed: int, config: Dict[str, Any]) -> str:
    """The comment line that opens every CSV: tool version, seed and the fully resolved config."""
    return '# psig-tools {} seed={} config={}'.format(
        version, seed, json.dumps(config, sort_keys=True, default=str)
    )


def write_csv(
    path: str,
    headers: Sequence[str],
    rows: Iterable[Sequence[Any]],
    comment: str = None,
) -> None:
    """Write a CSV file with an optional leading comment line.

    Args:
        path: Destination path.
        headers: The header row.
        rows: Data rows; numbers are formatted with `format_number`.
        comment: Optional first line, written verbatim (it should start with ``#``).
    """
    with open(path, 'w', newline='') as f:
        if comment:
            f.write(comment + '\n')
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(headers)
        for row in rows:
            writer.writerow([format_number(value) for value in row])
    logger.info('Wrote %s', path)


def write_json(path: str, payload: Dict[str, Any]) -> None:
    """Write a JSON summary with sorted keys; floats use Python's exact round-trip repr."""
    with open(path, 'w') as f:
        json.dump(payload, f, indent=2, sort_keys=True, default=_json_default)
        f.write('\n')
    logger.info('Wrote %s', path)


def _json_default(value: Any) -> Any:
    # numpy scalars and arrays
    if hasattr(value, 'tolist'):
        return value.tolist()
    raise TypeError('{!r} is not JSON serializable'.format(value))


def remove_files(paths: Iterable[str]) -> None:
    """Remove partially written outputs, ignoring the ones that were never created."""
    for path in paths:
        if path and os.path.isfile(path):
            os.remove(path)
            logger.info('Removed partial output %s', path)


def random_substream(seed: int, *key: int) -> np.random.Generator:
    """An independent generator for ``(seed, *key)``, e.g. one per trial or per baseline index.

    Streams are derived with ``numpy.random.SeedSequence`` spawn keys, so results do not depend on the
    order (or the thread) in which substreams are consumed.
    """
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(sequence))


def derived_seed(seed: int, *key: int) -> int:
    """A 32-bit integer seed derived from ``(seed, *key)`` for APIs that take a plain seed."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(sequence.generate_state(1)[0])


VARIANCE_COLUMNS = [
    'model_name',
    'density_name',
    'trials',
    'sigma',
    'grid_steps',
    'feature',
    'var_ig',
    'var_ps',
    'ratio',
    'predicted_ratio',
    'discrete_ratio',
]

CONVERGENCE_COLUMNS = ['budget', 'mse_det', 'mse_mc', 'n_baselines', 'inner_steps']


def _rows_from_reports(reports: Iterable[Any], columns: Sequence[str]) -> List[List[Any]]:
    rows = []
    for report in reports:
        fields = report.as_dict()
        rows.append([fields[column] for column in columns])
    return rows


def write_variance_csv(path: str, reports: Iterable[Any], comment: str = None) -> None:
    """One row per `VarianceReport`."""
    write_csv(path, VARIANCE_COLUMNS, _rows_from_reports(reports, VARIANCE_COLUMNS), comment)


def write_convergence_csv(path: str, points: Iterable[Any], comment: str = None) -> None:
    """One row per `ConvergencePoint`, budgets ascending."""
    write_csv(
        path, CONVERGENCE_COLUMNS, _rows_from_reports(points, CONVERGENCE_COLUMNS), comment
    )


def write_json_summary(
    path: str, version: str, seed: int, config: Dict[str, Any], results: Any
) -> None:
    """The JSON summary of a run: tool version, seed, resolved config and the command's results."""
    write_json(
        path,
        {
            'tool': 'psig-tools',
            'version': version,
            'seed': seed,
            'config': config,
            'results': results,
        },
    )
