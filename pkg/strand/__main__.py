import sys

from strand.main import main

sys.exit(main())
