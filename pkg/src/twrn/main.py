# Licensed under the Apache License: http://www.apache.org/licenses/LICENSE-2.0
# For details: see the NOTICE file at the repository root

import sys

from .cli import run


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
