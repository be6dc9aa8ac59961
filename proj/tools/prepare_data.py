#!/usr/bin/env python3
"""Lay out IDX datasets under a data root and write manifest.jsonl.

Layout produced:
  <root>/mnist/{train,t10k}-{images-idx3,labels-idx1}-ubyte
  <root>/fashion/...same names...
  <root>/manifest.jsonl   {"name", "path" (relative), "sha256"} per file

MNIST is copied from a directory of (optionally gzipped) IDX files.
Fashion-MNIST can come from the same IDX layout or from the per-class JSON
files of the `fashion-mnist` npm package ({"data": [[784 ints], ...]}, 7000
non-empty images per class); those are split per class into the first 6000
images for training and the rest for testing, then shuffled with a fixed seed.
"""

import argparse
import gzip
import hashlib
import json
import shutil
import struct
from pathlib import Path

import numpy as np

NAMES = [
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
]


def copy_idx_dir(src: Path, dst: Path) -> None:
    dst.mkdir(parents=True, exist_ok=True)
    for name in NAMES:
        plain, gz = src / name, src / (name + ".gz")
        if plain.exists():
            shutil.copyfile(plain, dst / name)
        elif gz.exists():
            with gzip.open(gz, "rb") as f, open(dst / name, "wb") as out:
                shutil.copyfileobj(f, out)
        else:
            raise SystemExit(f"missing {plain} (or .gz)")


def write_images(path: Path, images: np.ndarray) -> None:
    n, h, w = images.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">BBBB", 0, 0, 0x08, 3))
        f.write(struct.pack(">III", n, h, w))
        f.write(images.astype(np.uint8).tobytes())


def write_labels(path: Path, labels: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(struct.pack(">BBBB", 0, 0, 0x08, 1))
        f.write(struct.pack(">I", len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def convert_class_json(src: Path, dst: Path, train_per_class: int, seed: int) -> None:
    parts = {"train": ([], []), "t10k": ([], [])}
    for label in range(10):
        records = json.loads((src / f"{label}.json").read_text())["data"]
        # the npm package carries a couple of empty records; drop them
        data = np.asarray([r for r in records if len(r) > 0], dtype=np.int64)
        if data.ndim != 2 or data.shape[1] != 784 or data.min() < 0 or data.max() > 255:
            raise SystemExit(f"{src / f'{label}.json'}: expected N x 784 values in 0..255")
        for split, rows in (("train", data[:train_per_class]), ("t10k", data[train_per_class:])):
            parts[split][0].append(rows.reshape(-1, 28, 28))
            parts[split][1].append(np.full(len(rows), label))
    rng = np.random.default_rng(seed)
    dst.mkdir(parents=True, exist_ok=True)
    for split, (imgs, labs) in parts.items():
        images, labels = np.concatenate(imgs), np.concatenate(labs)
        order = rng.permutation(len(labels))
        write_images(dst / f"{split}-images-idx3-ubyte", images[order])
        write_labels(dst / f"{split}-labels-idx1-ubyte", labels[order])


def sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(root: Path) -> None:
    lines = []
    for ds in ("mnist", "fashion"):
        for name in NAMES:
            p = root / ds / name
            if p.exists():
                rel = p.relative_to(root).as_posix()
                lines.append(json.dumps({"name": f"{ds}/{name}", "path": rel, "sha256": sha256(p)}))
    (root / "manifest.jsonl").write_text("\n".join(lines) + "\n")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--root", type=Path, required=True, help="data root to populate")
    ap.add_argument("--mnist-idx", type=Path, help="directory with MNIST IDX files")
    ap.add_argument("--fashion-idx", type=Path, help="directory with Fashion-MNIST IDX files")
    ap.add_argument("--fashion-json", type=Path, help="directory with 0.json .. 9.json")
    ap.add_argument("--train-per-class", type=int, default=6000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if args.mnist_idx:
        copy_idx_dir(args.mnist_idx, args.root / "mnist")
    if args.fashion_idx:
        copy_idx_dir(args.fashion_idx, args.root / "fashion")
    elif args.fashion_json:
        convert_class_json(args.fashion_json, args.root / "fashion", args.train_per_class, args.seed)
    args.root.mkdir(parents=True, exist_ok=True)
    write_manifest(args.root)


if __name__ == "__main__":
    main()
