"""Allow `python -m cardiag` as an alias for the console script."""

import sys

from cardiag.cli import main

sys.exit(main())
