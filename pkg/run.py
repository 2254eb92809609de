#!/usr/bin/env python3
"""
Application Runner
Start the stochastic Douglas-Rachford CLI
"""

import sys

from sdr.main import main

if __name__ == "__main__":
    sys.exit(main())
