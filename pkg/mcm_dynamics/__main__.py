import sys

from mcm_dynamics.main import main

sys.exit(main())
