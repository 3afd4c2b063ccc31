#!/usr/bin/env python3
"""
charlab command-line application

Runs one finite-field character-sum experiment, configured via the charlab.yaml file.

Usage:
    python app.py weil-scan --def definitions/gauss.cdl --primes 5..199 --out gauss.csv
    python app.py measure-fit --def definitions/squares.cdl --primes 11..97 --out fit.json
    python app.py witness --preset sqrt2 --profile ci --out w.json
"""
import sys

from charlab.cli import main

if __name__ == "__main__":
    sys.exit(main())
