import sys

from fpp.experiments import main

sys.exit(main())
