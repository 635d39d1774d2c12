import sys

from vmdeeg.cli import main

sys.exit(main())
