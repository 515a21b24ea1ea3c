"""Allow `python -m gmpe_ann` as an alias for the gmpe-ann console script."""

from .cli import entry

if __name__ == "__main__":
    entry()
