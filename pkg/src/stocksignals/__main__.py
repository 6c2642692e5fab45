import sys

from stocksignals.cli import main

sys.exit(main())
