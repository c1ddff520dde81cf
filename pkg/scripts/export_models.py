"""Write every benchmark model to models/<name>.ppg with a sidecar <name>.json."""

import argparse
import json
from pathlib import Path

from fkppg.bench import all_models


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "models"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, bm in all_models().items():
        bm.ppg()  # refuse to write a model that does not validate
        (out / f"{name}.ppg").write_text(bm.source, encoding="utf-8")
        (out / f"{name}.json").write_text(json.dumps(bm.sidecar(), indent=2) + "\n", encoding="utf-8")
        print(f"wrote {name}")


if __name__ == "__main__":
    main()
