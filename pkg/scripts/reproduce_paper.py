#!/usr/bin/env python3
"""
Regenerate every published table and figure dataset into the output directory
"""

import logging
import sys
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from photonic_gemm.config import settings
from photonic_gemm.cli import reproduce_paper
from photonic_gemm.exceptions import PhotonicGemmError

logging.basicConfig(
    level=getattr(logging, settings.log_level.upper(), logging.INFO),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)

logger = logging.getLogger(__name__)


def main():
    """Write the reproduction bundle to settings.output_dir"""
    try:
        logger.info(f"Output directory: {settings.output_dir}")
        written = reproduce_paper(settings.output_dir, settings.workers, settings.seed)
        logger.info(f"✓ {len(written)} files written")
    except PhotonicGemmError as e:
        logger.error(f"Error reproducing datasets: {e.message}")
        sys.exit(e.exit_code)
    except Exception as e:
        logger.error(f"Error reproducing datasets: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
