import numpy as np
import pytest

from piezores import bvd

# single-branch reference twin: series resonance, parallel resonance from
# the 0.72 MHz / 62% suppression data, unloaded Q and a 100 pF static cap
TWIN_FS = 10.14e6
TWIN_FP = TWIN_FS + 0.72e6 / 0.62
TWIN_Q = 4000.0
TWIN_C0 = 100e-12


@pytest.fixture(scope="session")
def twin_model():
    return bvd.from_resonance_specs(TWIN_FS, TWIN_FP, TWIN_Q, TWIN_C0,
                                    label="reference twin")


@pytest.fixture(scope="session")
def twin_sweep(twin_model):
    freq = np.linspace(9.6e6, 12.0e6, 12001)
    return bvd.impedance(twin_model, freq)
