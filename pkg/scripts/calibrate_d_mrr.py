#!/usr/bin/env python3
"""
Fit the ring pitch per platform and optionally freeze it into platforms.toml
"""

import argparse
import logging
import sys
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from photonic_gemm.config import settings
from photonic_gemm.exceptions import PhotonicGemmError
from photonic_gemm.services.linkbudget import calibrate_d_mrr, load_calibration_targets

logging.basicConfig(
    level=getattr(logging, settings.log_level.upper(), logging.INFO),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)

logger = logging.getLogger(__name__)

HEADER = """# Calibrated platform values layered over the built-in defaults.
# Keys must match PlatformParams field names exactly.
#
# d_mrr_cm was produced by `python -m photonic_gemm calibrate` against
# calibration_targets.csv (1 um grid over [5 um, 2 cm]) and frozen here.
"""


def render_platforms(results) -> str:
    sections = [
        f"\n[{platform.value}]\nd_mrr_cm = {result.d_mrr_cm:g}\n"
        for platform, result in sorted(results.items(), key=lambda item: item[0].value, reverse=True)
    ]
    return HEADER + "".join(sections)


def main():
    parser = argparse.ArgumentParser(description=__doc__.strip())
    parser.add_argument("--targets", default=settings.calibration_targets)
    parser.add_argument("--write", action="store_true", help=f"overwrite {settings.platform_config}")
    args = parser.parse_args()

    try:
        targets = load_calibration_targets(args.targets)
        results = calibrate_d_mrr(targets)
        for platform, result in results.items():
            logger.info(f"{platform.value}: d_mrr = {result.d_mrr_cm} cm, total residual {result.total_residual}")
            for r in result.residuals:
                logger.info(f"  B={r.bits} DR={r.dr_sps:g}: n_opt {r.n_opt} vs {r.expected_n} ({r.residual:+d})")

        if args.write:
            Path(settings.platform_config).write_text(render_platforms(results), encoding="utf-8")
            logger.info(f"✓ Frozen into {settings.platform_config}")
    except PhotonicGemmError as e:
        logger.error(f"Error calibrating d_mrr: {e.message}")
        sys.exit(e.exit_code)
    except Exception as e:
        logger.error(f"Error calibrating d_mrr: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
