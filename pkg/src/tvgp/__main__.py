import sys

from tvgp.cli import main

sys.exit(main())
