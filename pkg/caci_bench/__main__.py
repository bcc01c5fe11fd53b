"""python -m caci_bench"""

from .cli import main

raise SystemExit(main())
