import sys

from Q_CRYPTO.main import main

sys.exit(main())
