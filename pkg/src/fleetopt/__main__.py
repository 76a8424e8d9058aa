import sys

from fleetopt.cli import main

sys.exit(main())
