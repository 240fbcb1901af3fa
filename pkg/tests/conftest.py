import pytest

from photonic_gemm.models.archsim import AcceleratorConfig, TpcConfig
from photonic_gemm.models.device import MrmModel
from photonic_gemm.models.params import PlatformId
from photonic_gemm.models.workload import LayerKind, LayerSpec
from photonic_gemm.services.archsim import load_presets
from photonic_gemm.services.params import default_peripherals, load_platform


@pytest.fixture(scope="session")
def sin_params():
    return load_platform(PlatformId.SIN)


@pytest.fixture(scope="session")
def soi_params():
    return load_platform(PlatformId.SOI)


@pytest.fixture(scope="session")
def mrm():
    return MrmModel()


@pytest.fixture(scope="session")
def peripherals():
    return default_peripherals()


@pytest.fixture(scope="session")
def presets():
    return load_presets()


@pytest.fixture
def small_accelerator(peripherals):
    """Two paired 4x4 cores at 1 GS/s"""
    tpc = TpcConfig(n=4, m=4, dr_sps=1e9, platform_id=PlatformId.SIN)
    return AcceleratorConfig(name="small", tpc=tpc, tpc_count=4, peripheral=peripherals)


@pytest.fixture
def tiny_layers():
    return [
        LayerSpec(kind=LayerKind.CONV, name="conv1", h=8, w=8, c=3, r=3, s=3, k=8, padding=1),
        LayerSpec(kind=LayerKind.ACTIVATION, name="relu1", h=8, w=8, c=8),
        LayerSpec(kind=LayerKind.POOL, name="pool1", h=8, w=8, c=8, r=2, s=2, stride=2),
        LayerSpec(kind=LayerKind.CONV, name="dw2", h=4, w=4, c=8, r=3, s=3, k=8, padding=1, groups=8),
        LayerSpec(kind=LayerKind.FC, name="fc", c=128, k=10),
    ]
