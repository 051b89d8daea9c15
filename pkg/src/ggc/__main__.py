import sys

from ggc.cli import main

sys.exit(main())
