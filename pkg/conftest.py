import os
import sys

# Flat top-level packages are imported by name from the repository root.
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
