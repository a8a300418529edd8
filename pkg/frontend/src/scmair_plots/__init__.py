"""Renderer for scmair figure-data bundles."""

from .bundle import Bundle, BundleError, load_bundle
from .render import render_bundle

__all__ = ["Bundle", "BundleError", "load_bundle", "render_bundle"]
__version__ = "0.1.0"
