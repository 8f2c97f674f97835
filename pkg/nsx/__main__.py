import sys

from nsx.app import main

sys.exit(main())
