"""Write one of the synthetic datasets to disk as 8-bit PNG class folders.

    python scripts/make_synthetic_dataset.py disjoint /tmp/synth5
"""

import argparse

from sgrec.synthetic import disjoint_support_dataset, shapes_dataset, square_translates_dataset, write_dataset

KINDS = {
    "disjoint": lambda seed: disjoint_support_dataset(seed=seed),
    "squares": lambda seed: square_translates_dataset(seed=seed),
    "shapes": lambda seed: shapes_dataset(seed=seed),
}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("kind", choices=sorted(KINDS))
    p.add_argument("out")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    data = KINDS[args.kind](args.seed)
    write_dataset(data, args.out)
    print(f"wrote {sum(len(v) for v in data.values())} images in {len(data)} classes to {args.out}")


if __name__ == "__main__":
    main()
