import sys

from photonic_gemm.cli import main

if __name__ == "__main__":
    sys.exit(main())
