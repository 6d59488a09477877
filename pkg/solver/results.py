import dataclasses
import enum
import json

import numpy as np
import pandas as pd
import serde

SWEEP_COLUMNS = ['realization', 'mode', 'value', 'runtime_ms', 'seed']
GAP_COLUMNS = ['instance_id', 'c_t3', 'c_det', 'lb', 'ub', 'ok']
METRIC_COLUMNS = ['client_id', 'delivered', 'intervals']
ONLINE_COLUMNS = ['instance_id', 'optimal_online', 'greedy_heuristic', 'best_split']


def encode_json(o):
    if hasattr(o, '__serde__'):
        return serde.to_dict(o)
    if dataclasses.is_dataclass(o):
        return dataclasses.asdict(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, enum.Enum):
        return o.value
    if isinstance(o, TableResult):
        return o.rows

    raise TypeError(f"{type(o).__name__} is not JSON serializable")


class TableResult:
    """Rows of one output table; written as CSV with an optional JSON mirror."""

    def __init__(self, columns):
        self.columns = list(columns)
        self.rows = []

    def append(self, row: dict):
        unknown = set(row) - set(self.columns)
        if unknown:
            raise KeyError(f"unknown columns {sorted(unknown)}")
        self.rows.append({c: row.get(c) for c in self.columns})

    def extend(self, rows):
        for row in rows:
            self.append(row)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=self.columns)

    def csv(self, header=True) -> str:
        return self.frame().to_csv(index=False, header=header)

    def write_csv(self, out, header=True):
        if self.rows or header:
            out.write(self.csv(header))

    def save(self, path):
        with open(path, 'w') as f:
            json.dump(self.rows, f, indent=4, default=encode_json)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)


def sweep_table() -> TableResult:
    return TableResult(SWEEP_COLUMNS)


def metrics_table(metrics) -> TableResult:
    table = TableResult(METRIC_COLUMNS)
    for j, delivered in enumerate(metrics.per_client_delivered):
        table.append({
            'client_id': j,
            'delivered': delivered,
            'intervals': metrics.intervals_run,
        })
    return table


def gap_table(reports) -> TableResult:
    table = TableResult(GAP_COLUMNS)
    table.extend(report.as_row() for report in reports)
    return table


def online_table(comparisons) -> TableResult:
    table = TableResult(ONLINE_COLUMNS)
    for instance_id, comparison in comparisons:
        table.append({'instance_id': instance_id, **dataclasses.asdict(comparison)})
    return table


def save_json(obj, path):
    with open(path, 'w') as f:
        json.dump(obj, f, indent=4, default=encode_json)
