#!/usr/bin/env python3
"""End-to-end demo on synthetic domains with planted gender-career skew.

Generates four corpora whose gender-career association increases from
news (none) to entertainment (strong), pushes each through the full
pipeline (ingest -> split -> train-sgns -> weat -> neighbors -> report),
and emits a cross-domain comparison.  All stages run through the CLI
dispatcher, so this doubles as a living example of the command surface.

Usage: python scripts/synthetic_demo.py [workdir]
"""

import json
import sys
from pathlib import Path

from biasprobe.cli import dispatch
from biasprobe.rng import derive_seed
from biasprobe.synthetic import CAREER, FAMILY, FEMALE, MALE, write_planted_csv

DOMAIN_SKEWS = [
    ("news", 0.5),
    ("sports", 0.6),
    ("social_media", 0.7),
    ("entertainment", 0.9),
]
SEED = 7
SENTENCES = 1600


def write_wordsets(workdir: Path) -> dict:
    paths = {}
    for name, words in (
        ("career", CAREER), ("family", FAMILY), ("male", MALE), ("female", FEMALE),
    ):
        path = workdir / f"{name}.txt"
        path.write_text("\n".join(words) + "\n", encoding="utf-8")
        paths[name] = path
    return paths


def run(argv: list) -> None:
    argv = [str(a) for a in argv]
    print(f"$ biasprobe {' '.join(argv)}", file=sys.stderr)
    code = dispatch(argv)
    if code != 0:
        sys.exit(code)


def main() -> None:
    workdir = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
    workdir.mkdir(parents=True, exist_ok=True)
    sets = write_wordsets(workdir)
    report_paths = []

    for index, (domain, skew) in enumerate(DOMAIN_SKEWS):
        base = workdir / domain
        base.mkdir(exist_ok=True)
        csv_path = base / f"{domain}.csv"
        write_planted_csv(csv_path, skew, SENTENCES, seed=derive_seed(SEED, index))

        run(["ingest", "--input", csv_path, "--column", "desc",
             "--domain", domain, "--out", base / "corpus.txt"])
        run(["split", "--corpus", base / "corpus.txt", "--ratio", "0.8",
             "--seed", SEED, "--out-train", base / "train.txt",
             "--out-test", base / "test.txt"])
        run(["train-sgns", "--corpus", base / "train.txt",
             "--out", base / "vectors.vec", "--dimension", "30", "--window", "2",
             "--negatives", "4", "--epochs", "1", "--min-count", "2",
             "--subsample", "1.0", "--seed", SEED, "--domain", domain])
        run(["weat", "--embeddings", base / "vectors.vec",
             "--targets-x", sets["career"], "--targets-y", sets["family"],
             "--attrs-a", sets["male"], "--attrs-b", sets["female"],
             "--balance", "--seed", SEED, "--out", base / "weat_career_family.json"])
        run(["neighbors", "--embeddings", base / "vectors.vec", "--k", "5",
             "--out", base / "neighbors.json"])
        report_path = base / "report.json"
        run(["report", "--domain", domain,
             "--weat", f"career_family={base / 'weat_career_family.json'}",
             "--neighbors", base / "neighbors.json",
             "--provenance", f"sgns on planted skew {skew}",
             "--out", report_path])
        report_paths.append(report_path)

    run(["compare", "--reports", *report_paths,
         "--out", workdir / "cross_domain.json"])
    run(["compare", "--reports", *report_paths, "--format", "markdown",
         "--out", workdir / "cross_domain.md"])

    cross = json.loads((workdir / "cross_domain.json").read_text(encoding="utf-8"))
    ranking = cross["rankings"]["career_family"]["signed"]
    planted = [d for d, _ in sorted(DOMAIN_SKEWS, key=lambda kv: -kv[1])]
    print(f"\nplanted order (most to least biased): {planted}")
    print(f"recovered order by effect size:        {ranking}")
    print(f"reports written under {workdir}/")


if __name__ == "__main__":
    main()
