#!/usr/bin/env python3
"""Render an entbuffer CSV into its figure panel.

Usage: render.py --figure fig4a --in path.csv --out path.png
"""
import sys

from entbuffer_plots.rendering import main

if __name__ == "__main__":
    sys.exit(main())
