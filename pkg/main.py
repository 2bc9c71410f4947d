import sys

from cli.cli import run


def main() -> int:
    return run(sys.argv[1:]).exit_code


if __name__ == "__main__":
    sys.exit(main())
