"""
NP-LDA Workbench entry point

    python main.py simulate --example toy_table1 --out results
    python main.py umbrella-k --m 63 --alpha 0.1 --delta 0.1
"""
import sys

from app.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
