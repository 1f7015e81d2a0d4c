import argparse

from dermforge.utils.initialize_logic import initialize_logging
from dermforge.utils.synthetic import write_synthetic_dataset


def main() -> None:
    """Write a seeded blob dataset in the HAM10000 layout."""
    parser = argparse.ArgumentParser(description=main.__doc__)
    parser.add_argument("out_dir", help="Directory for the images and HAM10000_metadata.csv")
    parser.add_argument("--per-class", type=int, default=10, help="Images per class")
    parser.add_argument("--seed", type=int, default=0, help="Generator seed")
    args = parser.parse_args()
    initialize_logging()
    print(write_synthetic_dataset(args.out_dir, args.per_class, args.seed))


if __name__ == "__main__":
    main()
