"""Command-line entry point: render a figure-data bundle to SVG or PNG."""

from __future__ import annotations

import sys

import click

from .bundle import BundleError, load_bundle
from .render import render_bundle


@click.group()
@click.version_option("0.1.0", prog_name="scmair-render")
def main():
    """Render scmair figure-data bundles (CSV tables + manifest.json)."""


@main.command()
@click.argument("bundle_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", default="rendered", show_default=True,
              type=click.Path(file_okay=False),
              help="Directory for the rendered figure files.")
@click.option("--format", "fmt", type=click.Choice(["svg", "png"]),
              default="svg", show_default=True)
def render(bundle_dir, out_dir, fmt):
    """Render the bundle in BUNDLE_DIR."""
    try:
        bundle = load_bundle(bundle_dir)
        paths = render_bundle(bundle, out_dir, fmt)
    except BundleError as exc:
        click.echo(f"bundle error: {exc}", err=True)
        sys.exit(2)
    for path in paths:
        click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
