"""Run the acceptance criteria and print one pass/fail line each.

    python scripts/run_acceptance.py              # all criteria
    python scripts/run_acceptance.py --only 1 12  # a subset
    python scripts/run_acceptance.py --json out.json
"""

import argparse
from dataclasses import asdict, dataclass, field
import json
import sys

from bifbm import acceptance


@dataclass
class Config:
    only: list = field(default_factory=list)
    threads: int = 1
    json: str | None = None


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--only", type=int, nargs="*", default=[])
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--json", default=None, help="also write every report to this file")
    cfg = Config(**vars(ap.parse_args(argv)))
    results = acceptance.run_all(cfg.only or None, threads=cfg.threads)
    failed = [n for n, r in results.items() if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failing: {failed}" if failed else ""))
    if 10 in results:
        print(f"p-variation constant matched: {acceptance.pvariation_match(results[10])}")
    if cfg.json:
        doc = {"config": asdict(cfg),
               "criteria": {n: {"passed": r.passed, "line": r.line(),
                                "reports": [json.loads(x.to_json()) for x in r.reports]}
                            for n, r in results.items()}}
        with open(cfg.json, "w") as fh:
            json.dump(doc, fh, indent=1)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
