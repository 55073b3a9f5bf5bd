import sys

from wahbakit.presentation.cli.main import main

sys.exit(main())
