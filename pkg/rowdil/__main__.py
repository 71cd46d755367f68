import sys

from rowdil.cli import main

sys.exit(main())
