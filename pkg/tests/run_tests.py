#!/usr/bin/env python3
"""Run the test suite, or only the modules named on the command line.

    python tests/run_tests.py                  # everything
    python tests/run_tests.py oracle cli       # test_oracle.py and test_cli.py
"""

import unittest
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))


def run_tests(names=None) -> int:
    loader = unittest.TestLoader()
    start_dir = Path(__file__).parent
    if names:
        suite = unittest.TestSuite(loader.discover(start_dir, pattern=f'test_{name}.py') for name in names)
    else:
        suite = loader.discover(start_dir, pattern='test_*.py')

    result = unittest.TextTestRunner(verbosity=2).run(suite)
    return 0 if result.wasSuccessful() else 1


if __name__ == '__main__':
    sys.exit(run_tests(sys.argv[1:]))
