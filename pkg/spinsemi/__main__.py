# © spinsemi developers
#
# License: BSD (3-clause)

import sys

from spinsemi.cli import main

sys.exit(main())
