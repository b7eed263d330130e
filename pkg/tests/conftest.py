import dataclasses

import numpy as np
import pytest

from dramxray.device import create_device
from dramxray.port import CommandPort, Session
from dramxray.profile import Bitline, DeviceProfile, FaultParams, PolarityRule, Remap, Timing

TOY_TIMING = Timing(tCK_ns=1.25, tRAS_cycles=28, tRP_cycles=11, tRCD_cycles=11, tREFW_cycles=51_200_000)


def toy_profile(bitline=Bitline.OPEN, pattern=(40, 40, 48), rows=256, period=128, stride=None,
                inversion=True, polarity=PolarityRule.ALTERNATING_BY_SUBARRAY, serialization=4,
                remap=None, seed=5, **fault) -> DeviceProfile:
    """N_row = 256, W = 64 device with DDR4 timing."""
    fp = dict(fault)
    return DeviceProfile(
        chip_label="toy", num_banks=1, rows_per_bank=rows, row_width_bits=64,
        subarray_pattern=list(pattern), bitline_structure=bitline, datapath_inversion=inversion,
        polarity_rule=polarity, coupled_row_stride=stride, edge_pair_period=period,
        serialization_period=serialization, timing=dataclasses.replace(TOY_TIMING),
        fault_params=FaultParams(seed=seed, **fp), remap=remap or Remap(),
    )


@pytest.fixture
def toy():
    return toy_profile()


@pytest.fixture
def session(toy):
    return Session(CommandPort(create_device(toy)))


def bits(value: int, width: int = 64) -> np.ndarray:
    return np.array([(value >> j) & 1 for j in range(width)], dtype=np.uint8)


# one line per acceptance criterion, repeated at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
