"""Allow ``python -m lvq_drift``."""

import sys

from .cli import main

sys.exit(main())
