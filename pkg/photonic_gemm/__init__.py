"""Design-space exploration toolkit for microring photonic GEMM accelerators."""

__version__ = "1.0.0"
