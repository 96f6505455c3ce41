"""Entry point for `python -m mawalk`."""
from mawalk.cli import cli

if __name__ == "__main__":
    cli()
