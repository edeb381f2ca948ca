import sys

from fleetsim.main import main

sys.exit(main())
