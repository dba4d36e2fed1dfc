import sys

from aslk.cli import main

sys.exit(main())
