import sys

from dfinvariant.cli import main

sys.exit(main())
