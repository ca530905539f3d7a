import sys

from finsler_forge.cli import main

if __name__ == "__main__":
    sys.exit(main())
