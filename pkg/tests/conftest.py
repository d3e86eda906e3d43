import numpy as np
import pytest

from logselect.eventlog import EventRecord, build_log


def make_log(traces, temporal=False, attrs=None):
    """Build an EventLog from {case_id: [activity, ...]} in dict order.

    Order keys are per-case integers, or minute-spaced timestamps when
    temporal=True. `attrs` maps case id -> attribute dict.
    """
    from datetime import datetime, timedelta

    records = []
    base = datetime(2023, 1, 1, 8, 0, 0)
    for case_id, activities in traces.items():
        case_attrs = (attrs or {}).get(case_id, {})
        for t, activity in enumerate(activities):
            key = base + timedelta(minutes=t) if temporal else t
            records.append(EventRecord(case_id, activity, key, case_attrs))
    return build_log(records)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
