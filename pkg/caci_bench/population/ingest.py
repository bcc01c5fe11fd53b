"""Worker CSV ingestion."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from ..exceptions import DatasetError, InvalidParameterError
from .arrivals import RecordedArrivals
from .workers import OfflinePool

__all__ = ['CsvSchema', 'ingest_worker_csv']

_CONTEXT_COLUMN = re.compile(r'^ctx(\d+)$')
_PARSER_LINE = re.compile(r'\bline (\d+)')
_HEADER_LINES = 1


@dataclass
class CsvSchema:
    """
    Column layout of a worker file.

    context_columns defaults to every ctx<k> column in numeric order. In truthful mode
    a missing bid column means bid = cost; a bid below the cost is always rejected.
    """

    context_columns: Sequence[str] | None = None
    truthful: bool = True


def _line(row_position: int) -> int:
    return row_position + _HEADER_LINES + 1


def _parser_line(error: Exception) -> int | None:
    """File line named in a pandas parser message, if any."""
    match = _PARSER_LINE.search(str(error))
    return int(match.group(1)) if match else None


def _numeric(frame: pd.DataFrame, column: str, required: bool) -> pd.Series:
    raw = frame[column].astype(str).str.strip()
    values = pd.to_numeric(raw, errors='coerce')
    bad = values.isna() & (raw != '') if not required else values.isna()
    if bad.any():
        position = int(np.flatnonzero(bad.to_numpy())[0])
        raise DatasetError(
            f'column {column!r}: cannot parse {raw.iloc[position]!r} as a number',
            line=_line(position),
        )
    return values


def _integer(frame: pd.DataFrame, column: str) -> pd.Series:
    values = _numeric(frame, column, required=True)
    fractional = values != np.floor(values)
    if fractional.any():
        position = int(np.flatnonzero(fractional.to_numpy())[0])
        raise DatasetError(f'column {column!r} must hold integers', line=_line(position))
    return values.astype(np.int64)


def _context_columns(frame: pd.DataFrame, schema: CsvSchema) -> list[str]:
    if schema.context_columns is not None:
        columns = list(schema.context_columns)
        missing = [c for c in columns if c not in frame.columns]
        if missing:
            raise DatasetError(f'missing context columns {missing}')
    else:
        found = [(int(m.group(1)), c) for c in frame.columns if (m := _CONTEXT_COLUMN.match(c))]
        columns = [c for _, c in sorted(found)]
    if not columns:
        raise DatasetError('no context columns (expected ctx0..ctx{M-1})')
    return columns


def ingest_worker_csv(
    path: str | Path,
    schema: CsvSchema | None = None,
) -> OfflinePool | RecordedArrivals:
    """
    Load workers from a CSV file.

    Each context column is min-max normalized to [0,1] over the whole file. Rows that
    repeat an id (within a slot) carry additional reward observations. A file with a
    slot column yields a RecordedArrivals grouped by slot, otherwise an OfflinePool.
    """
    schema = schema or CsvSchema()
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f'worker file {str(path)!r} does not exist')

    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except pd.errors.ParserError as e:
        raise DatasetError(f'malformed CSV: {e}', line=_parser_line(e)) from e
    except UnicodeDecodeError as e:
        raise DatasetError(f'malformed CSV: {e}') from e
    except pd.errors.EmptyDataError as e:
        raise DatasetError('empty CSV file') from e

    frame.columns = [c.strip() for c in frame.columns]
    for required in ('id', 'cost'):
        if required not in frame.columns:
            raise DatasetError(f'missing required column {required!r}')
    if frame.empty:
        raise DatasetError('worker file has a header but no rows')

    context_columns = _context_columns(frame, schema)
    data = pd.DataFrame({'id': _integer(frame, 'id'), 'cost': _numeric(frame, 'cost', True)})

    if 'bid' in frame.columns:
        data['bid'] = _numeric(frame, 'bid', required=True)
    elif schema.truthful:
        data['bid'] = data['cost']
    else:
        raise DatasetError('strategic mode needs a bid column')

    has_slot = 'slot' in frame.columns
    if has_slot:
        data['slot'] = _integer(frame, 'slot')

    has_quality = 'quality' in frame.columns
    if has_quality:
        data['quality'] = _numeric(frame, 'quality', required=True)
        out_of_range = (data['quality'] < 0) | (data['quality'] > 1)
        if out_of_range.any():
            position = int(np.flatnonzero(out_of_range.to_numpy())[0])
            raise DatasetError('quality must lie in [0, 1]', line=_line(position))

    has_reward = 'reward' in frame.columns
    if has_reward:
        reward = _numeric(frame, 'reward', required=False)
        invalid = reward.notna() & ~reward.isin([0, 1])
        if invalid.any():
            position = int(np.flatnonzero(invalid.to_numpy())[0])
            raise DatasetError('reward must be 0 or 1', line=_line(position))
        data['reward'] = reward
    if not has_quality and not has_reward:
        raise DatasetError('need a quality column or a reward column for replay')

    for column in context_columns:
        values = _numeric(frame, column, required=True)
        low, high = float(values.min()), float(values.max())
        data[column] = (values - low) / (high - low) if high > low else 0.0

    nonpositive = data['cost'] <= 0
    if nonpositive.any():
        position = int(np.flatnonzero(nonpositive.to_numpy())[0])
        raise DatasetError('cost must be > 0', line=_line(position))
    underbid = data['cost'] > data['bid']
    if underbid.any():
        position = int(np.flatnonzero(underbid.to_numpy())[0])
        raise DatasetError(
            f'row for worker {int(data["id"].iloc[position])}: cost exceeds bid',
            line=_line(position),
        )

    reward_samples = None
    if has_reward:
        observed = data.dropna(subset=['reward'])
        reward_samples = {
            int(worker_id): group['reward'].to_numpy(dtype=np.int8)
            for worker_id, group in observed.groupby('id', sort=True)
        }

    def build_pool(rows: pd.DataFrame) -> OfflinePool:
        first = rows.groupby('id', sort=False).head(1)
        if has_quality:
            qualities = first['quality'].to_numpy(dtype=float)
        else:
            qualities = np.asarray([
                float(reward_samples[int(w)].mean()) if reward_samples and int(w) in reward_samples else 0.0
                for w in first['id']
            ])
        try:
            return OfflinePool(
                ids=first['id'].to_numpy(),
                contexts=first[context_columns].to_numpy(dtype=float),
                costs=first['cost'].to_numpy(dtype=float),
                bids=first['bid'].to_numpy(dtype=float),
                qualities=qualities,
                reward_samples=reward_samples,
            )
        except InvalidParameterError as e:
            raise DatasetError(str(e)) from e

    if not has_slot:
        return build_pool(data)

    labels = sorted(int(s) for s in data['slot'].unique())
    slots = [build_pool(data[data['slot'] == label]) for label in labels]
    return RecordedArrivals(slots, reward_samples=reward_samples, slot_labels=labels)
