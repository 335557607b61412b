#!/usr/bin/env python3
"""condition_precedents: precedent-backed reaction condition recommendation.

    ./condition_precedents.py synthesize --corpus complementarity --out runs/toy --no-log-file
    ./condition_precedents.py evaluate --dataset runs/toy/reactions.tsv --bank runs/toy/bank.bin \
        --heads runs/toy/heads_*.bin --out runs/toy/eval
"""
import sys

from cpm.classes.cli.commands import main

if __name__ == "__main__":
    sys.exit(main())
