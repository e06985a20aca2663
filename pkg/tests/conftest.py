import sys
from pathlib import Path

# make the shared fixture module (instances.py) importable from any rootdir
sys.path.insert(0, str(Path(__file__).parent))
