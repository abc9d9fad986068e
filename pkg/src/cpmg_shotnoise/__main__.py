"""Run the command-line tool with ``python -m cpmg_shotnoise``."""
import sys

from .cli import main

sys.exit(main())
